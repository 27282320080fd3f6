#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pim/geometry.hpp"

namespace pim {

/**
 * Uniform cell list over points in R^d (d <= 3). Cells are keyed by their
 * integer coordinates; lookups scan the 3^d cells around the query.
 */
class CellList {
 public:
  CellList(const Points& points, double cell_size);

  double cell_size() const noexcept { return cell_size_; }

  /// Indices j with |x - x_j|^2 <= radius^2, ascending. radius must not exceed cell_size.
  std::vector<std::size_t> within(PointView x, double radius) const;

  /// Calls visit(j, squared_distance) for every point within radius (unordered).
  template <class Visitor>
  void for_each_within(PointView x, double radius, Visitor&& visit) const;

 private:
  std::int64_t key(const std::int64_t* cell) const;
  void cell_of(PointView x, std::int64_t* cell) const;

  const Points* points_;
  double cell_size_;
  int dim_;
  Eigen::VectorXd origin_;
  std::vector<std::pair<std::int64_t, std::size_t>> sorted_;  // (cell key, point index)
};

template <class Visitor>
void CellList::for_each_within(PointView x, double radius, Visitor&& visit) const {
  const double r2 = radius * radius;
  std::int64_t center[3] = {0, 0, 0};
  cell_of(x, center);
  const int span_y = dim_ >= 2 ? 1 : 0;
  const int span_z = dim_ >= 3 ? 1 : 0;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -span_y; dy <= span_y; ++dy) {
      for (int dz = -span_z; dz <= span_z; ++dz) {
        const std::int64_t cell[3] = {center[0] + dx, center[1] + dy, center[2] + dz};
        const std::int64_t k = key(cell);
        auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(k, std::size_t{0}));
        for (auto it = lo; it != sorted_.end() && it->first == k; ++it) {
          const double d2 = squared_distance(x, row_view(*points_, static_cast<Eigen::Index>(it->second)));
          if (d2 <= r2) visit(it->second, d2);
        }
      }
    }
  }
}

}  // namespace pim
