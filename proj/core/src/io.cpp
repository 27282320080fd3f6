#include "pim/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

namespace pim {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_point_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  for (int d = 0; d < cloud.dim(); ++d) out << 'x' << d + 1 << ',';
  out << "p\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (double v : cloud.point(i)) out << format_number(v) << ',';
    out << format_number(i < cloud.density_at_points.size() ? cloud.density_at_points[i]
                                                             : std::numeric_limits<double>::quiet_NaN())
        << '\n';
  }
}

void write_triplets_csv(std::ostream& out, const SymmetricMatrix& matrix) {
  out << "i,j,value\n";
  for (const auto& e : matrix.triplets()) out << e.row() << ',' << e.col() << ',' << format_number(e.value()) << '\n';
}

void write_eigenvalues_csv(std::ostream& out, const EigResult& eig) {
  out << "index,lambda,residual\n";
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i)
    out << i << ',' << format_number(eig.eigenvalues[i]) << ',' << format_number(eig.residuals[i]) << '\n';
}

void write_eigenvectors_csv(std::ostream& out, const EigResult& eig) {
  for (Eigen::Index c = 0; c < eig.eigenvectors.cols(); ++c) out << (c ? "," : "") << 'u' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < eig.eigenvectors.rows(); ++r) {
    for (Eigen::Index c = 0; c < eig.eigenvectors.cols(); ++c)
      out << (c ? "," : "") << format_number(eig.eigenvectors(r, c));
    out << '\n';
  }
}

void write_poisson_csv(std::ostream& out, const PointCloud& cloud, const Eigen::VectorXd& f,
                       const Eigen::VectorXd& u) {
  out << 'i';
  for (int d = 0; d < cloud.dim(); ++d) out << ",x" << d + 1;
  out << ",f,u\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out << i;
    for (double v : cloud.point(i)) out << ',' << format_number(v);
    const auto ii = static_cast<Eigen::Index>(i);
    out << ',' << format_number(f[ii]) << ',' << format_number(u[ii]) << '\n';
  }
}

void write_report_csv(std::ostream& out, const SpectralReport& report, bool include_timings) {
  out << "n,t,seed,eig_index,lambda_discrete,lambda_reference,abs_error,subspace_angle,coercivity,discrepancy,"
         "wall_ms\n";
  for (const auto& row : report.rows) {
    out << row.n << ',' << format_number(row.t) << ',' << row.seed << ',' << row.eig_index << ','
        << format_number(row.lambda_discrete) << ',' << format_number(row.lambda_reference) << ','
        << format_number(row.abs_error) << ',' << format_number(row.subspace_angle) << ','
        << format_number(row.coercivity) << ',' << format_number(row.discrepancy) << ',';
    if (include_timings) out << format_number(std::round(row.wall_ms * 1000.0) / 1000.0);
    out << '\n';
  }
}

namespace {

struct Series {
  std::size_t index;
  std::vector<std::pair<double, double>> points;
};

}  // namespace

void write_error_plot_svg(std::ostream& out, const SpectralReport& report) {
  constexpr double width = 640, height = 420, left = 70, right = 150, top = 30, bottom = 50;
  std::vector<Series> series;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  if (!report.grid.n_values.empty()) {
    const std::size_t n_max = *std::max_element(report.grid.n_values.begin(), report.grid.n_values.end());
    for (std::size_t i = 1; i < report.count; ++i) {
      Series s{i, {}};
      for (const auto& cell : report.cells) {
        if (cell.n != n_max || cell.missing()) continue;
        const double e = cell.mean_abs_error[i];
        if (!(e > 0.0) || !std::isfinite(e)) continue;
        s.points.emplace_back(std::log10(cell.t), std::log10(e));
      }
      std::sort(s.points.begin(), s.points.end());
      for (const auto& [x, y] : s.points) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
      if (!s.points.empty()) series.push_back(std::move(s));
    }
  }
  if (series.empty()) xmin = -2, xmax = 0, ymin = -2, ymax = 0;
  xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
  const double pw = width - left - right, ph = height - top - bottom;
  const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  static constexpr std::array<const char*, 8> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                     "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = xmin; d <= xmax + 1e-9; d += 1.0)
    out << "<line x1=\"" << px(d) << "\" y1=\"" << top + ph << "\" x2=\"" << px(d) << "\" y2=\"" << top + ph + 5
        << "\" stroke=\"black\"/><text x=\"" << px(d) << "\" y=\"" << top + ph + 20
        << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
  for (double d = ymin; d <= ymax + 1e-9; d += 1.0)
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << py(d) << "\" x2=\"" << left << "\" y2=\"" << py(d)
        << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << py(d) + 4
        << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">t</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\" text-anchor=\"middle\">|lambda_i - reference|</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % colors.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) out << px(x) << ',' << py(y) << ' ';
    out << "\"/>\n";
    for (const auto& [x, y] : s.points)
      out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 15 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/><text x=\"" << left + pw + 40 << "\" y=\"" << ly
        << "\">lambda_" << s.index << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace pim
