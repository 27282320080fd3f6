#include "pim/neighbors.hpp"

#include <algorithm>
#include <cmath>

#include "pim/error.hpp"

namespace pim {

namespace {
// 21 bits per axis; offsets keep keys nonnegative for cells around the origin.
constexpr std::int64_t kAxisBits = 21;
constexpr std::int64_t kAxisOffset = std::int64_t{1} << (kAxisBits - 1);
}  // namespace

CellList::CellList(const Points& points, double cell_size)
    : points_(&points), cell_size_(cell_size), dim_(static_cast<int>(points.cols())) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw InvalidArgument("cell size must be positive");
  if (dim_ < 1 || dim_ > 3) throw InvalidArgument("cell list supports 1 <= d <= 3");
  origin_ = points.colwise().minCoeff().transpose();
  const Eigen::VectorXd extent = points.colwise().maxCoeff().transpose() - origin_;
  if ((extent.array() / cell_size).maxCoeff() >= static_cast<double>(kAxisOffset - 2))
    throw InvalidArgument("cell list: too many cells along one axis; increase the cell size");

  sorted_.reserve(points.rows());
  std::int64_t cell[3] = {0, 0, 0};
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    cell_of(row_view(points, i), cell);
    sorted_.emplace_back(key(cell), static_cast<std::size_t>(i));
  }
  std::sort(sorted_.begin(), sorted_.end());
}

void CellList::cell_of(PointView x, std::int64_t* cell) const {
  for (int k = 0; k < dim_; ++k)
    cell[k] = static_cast<std::int64_t>(std::floor((x[k] - origin_[k]) / cell_size_));
}

std::int64_t CellList::key(const std::int64_t* cell) const {
  std::int64_t k = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const std::int64_t c = axis < dim_ ? std::clamp(cell[axis], -kAxisOffset + 1, kAxisOffset - 1) : 0;
    k = (k << kAxisBits) | (c + kAxisOffset);
  }
  return k;
}

std::vector<std::size_t> CellList::within(PointView x, double radius) const {
  if (radius > cell_size_ * (1.0 + 1e-12))
    throw InvalidArgument("cell list query radius exceeds the cell size");
  std::vector<std::size_t> out;
  for_each_within(x, radius, [&out](std::size_t j, double) { out.push_back(j); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pim
