#include "pim/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "pim/error.hpp"
#include "pim/neighbors.hpp"

namespace pim {

const char* to_string(Storage storage) {
  return storage == Storage::dense ? "dense" : "sparse";
}

Eigen::Index SymmetricMatrix::rows() const {
  return std::visit([](const auto& m) { return static_cast<Eigen::Index>(m.rows()); }, data_);
}

double SymmetricMatrix::coeff(Eigen::Index i, Eigen::Index j) const {
  return std::visit([i, j](const auto& m) { return static_cast<double>(m.coeff(i, j)); }, data_);
}

Eigen::VectorXd SymmetricMatrix::apply(const Eigen::VectorXd& x) const {
  return std::visit([&x](const auto& m) -> Eigen::VectorXd { return m * x; }, data_);
}

Eigen::MatrixXd SymmetricMatrix::apply(const Eigen::MatrixXd& x) const {
  return std::visit([&x](const auto& m) -> Eigen::MatrixXd { return m * x; }, data_);
}

Eigen::MatrixXd SymmetricMatrix::to_dense() const {
  if (const auto* dense = std::get_if<Eigen::MatrixXd>(&data_)) return *dense;
  return Eigen::MatrixXd(std::get<SparseMatrix>(data_));
}

SparseMatrix SymmetricMatrix::to_sparse() const {
  if (const auto* sparse = std::get_if<SparseMatrix>(&data_)) return *sparse;
  return std::get<Eigen::MatrixXd>(data_).sparseView(0.0, 0.0);
}

std::vector<Eigen::Triplet<double, std::ptrdiff_t>> SymmetricMatrix::triplets() const {
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> out;
  if (const auto* dense = std::get_if<Eigen::MatrixXd>(&data_)) {
    for (Eigen::Index i = 0; i < dense->rows(); ++i)
      for (Eigen::Index j = 0; j < dense->cols(); ++j)
        if ((*dense)(i, j) != 0.0) out.emplace_back(i, j, (*dense)(i, j));
    return out;
  }
  const auto& sparse = std::get<SparseMatrix>(data_);
  for (Eigen::Index col = 0; col < sparse.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(sparse, col); it; ++it)
      out.emplace_back(it.row(), it.col(), it.value());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
  });
  return out;
}

double SymmetricMatrix::trace() const {
  if (const auto* dense = std::get_if<Eigen::MatrixXd>(&data_)) return dense->trace();
  const auto& sparse = std::get<SparseMatrix>(data_);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sparse.rows(); ++i) acc += sparse.coeff(i, i);
  return acc;
}

double SymmetricMatrix::max_abs_row_sum() const {
  if (const auto* dense = std::get_if<Eigen::MatrixXd>(&data_))
    return dense->rows() ? dense->cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  const auto& sparse = std::get<SparseMatrix>(data_);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(sparse.rows());
  for (Eigen::Index col = 0; col < sparse.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(sparse, col); it; ++it) sums[it.row()] += std::abs(it.value());
  return sums.size() ? sums.maxCoeff() : 0.0;
}

double kernel_normalizer(double t, int intrinsic_dim) {
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * intrinsic_dim);
}

double LaplacianSystem::normalizing_constant() const {
  return kernel_normalizer(t, cloud.manifold.intrinsic_dim());
}

double default_bandwidth(std::size_t n, int intrinsic_dim, double c) {
  if (n == 0) throw InvalidArgument("default_bandwidth: n must be positive");
  if (!(c > 0.0)) throw InvalidArgument("default_bandwidth: c must be positive");
  return c * std::pow(static_cast<double>(n), -2.0 / (2.0 * intrinsic_dim + 7.0));
}

namespace {

struct Row {
  std::vector<std::ptrdiff_t> cols;  // ascending, includes the diagonal
  std::vector<double> r;             // scaled squared distances
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

template <class Body>
void parallel_rows(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) body(i);
    });
  }
}

}  // namespace

LaplacianSystem assemble(const PointCloud& cloud, const KernelSpec& kernel, double t,
                         const AssemblyOptions& options) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("assemble: t must be positive");
  const std::size_t n = cloud.size();
  if (n == 0) throw InvalidArgument("assemble: empty point cloud");

  LaplacianSystem sys;
  sys.t = t;
  sys.kernel = kernel;
  sys.cloud = cloud;
  sys.storage = options.force_storage.value_or(n <= options.dense_threshold ? Storage::dense
                                                                              : Storage::sparse);

  // Pair predicate shared by both search paths: |x_i - x_j|^2 / 4t <= 1.
  const double four_t = 4.0 * t;
  std::vector<Row> rows(n);
  if (sys.storage == Storage::dense) {
    parallel_rows(n, options.threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double r = squared_distance(cloud.point(i), cloud.point(j)) / four_t;
        if (r <= 1.0) {
          rows[i].cols.push_back(static_cast<std::ptrdiff_t>(j));
          rows[i].r.push_back(r);
        }
      }
    });
  } else {
    const double reach = 2.0 * std::sqrt(t) * (1.0 + 1e-9);
    const CellList cells(cloud.points, reach);
    parallel_rows(n, options.threads, [&](std::size_t i) {
      for (std::size_t j : cells.within(cloud.point(i), reach)) {
        const double r = squared_distance(cloud.point(i), cloud.point(j)) / four_t;
        if (r <= 1.0) {
          rows[i].cols.push_back(static_cast<std::ptrdiff_t>(j));
          rows[i].r.push_back(r);
        }
      }
    });
  }

  // Common quantum for the off-diagonal weights: a power of two fine enough
  // that every row's partial sums are exact.
  double largest_row = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rows[i].cols.size(); ++k)
      if (rows[i].cols[k] != static_cast<std::ptrdiff_t>(i)) acc += kernel.R(rows[i].r[k]) / t;
    largest_row = std::max(largest_row, acc);
  }
  const double quantum = largest_row > 0.0 ? std::ldexp(1.0, std::ilogb(largest_row) + 1 - 52) : 1.0;
  const auto snap = [quantum](double v) { return std::nearbyint(v / quantum) * quantum; };

  const double ct = kernel_normalizer(t, cloud.manifold.intrinsic_dim());
  sys.w.resize(static_cast<Eigen::Index>(n));
  UnionFind groups(n);
  std::size_t pairs = 0;

  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> l_entries;
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> b_entries;
  Eigen::MatrixXd l_dense;
  Eigen::MatrixXd b_dense;
  if (sys.storage == Storage::dense) {
    l_dense = Eigen::MatrixXd::Zero(n, n);
    b_dense = Eigen::MatrixXd::Zero(n, n);
  } else {
    std::size_t total = 0;
    for (const auto& row : rows) total += row.cols.size();
    l_entries.reserve(total);
    b_entries.reserve(total);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    double diag = 0.0;
    double kernel_sum = 0.0;
    for (std::size_t k = 0; k < rows[i].cols.size(); ++k) {
      const std::ptrdiff_t j = rows[i].cols[k];
      const double r = rows[i].r[k];
      const double rv = kernel.R(r);
      const double bv = kernel.bar_R(r);
      kernel_sum += rv;
      if (j != ii) {
        ++pairs;
        if (rv > 0.0 || bv > 0.0) groups.unite(i, static_cast<std::size_t>(j));
        const double weight = snap(rv / t);
        diag += weight;
        if (sys.storage == Storage::dense) {
          l_dense(ii, j) = -weight;
        } else {
          l_entries.emplace_back(ii, j, -weight);
        }
      }
      if (sys.storage == Storage::dense) {
        b_dense(ii, j) = bv;
      } else {
        b_entries.emplace_back(ii, j, bv);
      }
    }
    if (sys.storage == Storage::dense) {
      l_dense(ii, ii) = diag;
    } else {
      l_entries.emplace_back(ii, ii, diag);
    }
    sys.w[ii] = ct * kernel_sum / static_cast<double>(n);
  }

  if (sys.storage == Storage::dense) {
    sys.L = SymmetricMatrix(std::move(l_dense));
    sys.B = SymmetricMatrix(std::move(b_dense));
  } else {
    SparseMatrix l(n, n), b(n, n);
    l.setFromTriplets(l_entries.begin(), l_entries.end());
    b.setFromTriplets(b_entries.begin(), b_entries.end());
    l.makeCompressed();
    b.makeCompressed();
    sys.L = SymmetricMatrix(std::move(l));
    sys.B = SymmetricMatrix(std::move(b));
  }

  sys.pair_count = pairs;
  sys.component.resize(n);
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = groups.find(i);
    if (label[root] < 0) label[root] = next++;
    sys.component[i] = label[root];
  }
  sys.component_count = next;
  sys.disconnected = next > 1;
  return sys;
}

std::vector<double> w_field(const PointCloud& cloud, const KernelSpec& kernel, double t,
                            const Points& queries) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("w_field: t must be positive");
  if (queries.rows() > 0 && queries.cols() != cloud.dim())
    throw InvalidArgument("w_field: query dimension does not match the cloud");
  const double reach = 2.0 * std::sqrt(t) * (1.0 + 1e-9);
  const double four_t = 4.0 * t;
  const CellList cells(cloud.points, reach);
  const double scale = kernel_normalizer(t, cloud.manifold.intrinsic_dim()) / cloud.size();
  std::vector<double> out(queries.rows(), 0.0);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    double acc = 0.0;
    for (std::size_t j : cells.within(row_view(queries, q), reach)) {
      const double r = squared_distance(row_view(queries, q), cloud.point(j)) / four_t;
      if (r <= 1.0) acc += kernel.R(r);
    }
    out[q] = scale * acc;
  }
  return out;
}

}  // namespace pim
