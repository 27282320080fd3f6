#include "pim/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pim/error.hpp"

namespace pim::cli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"kernel", {"family", "coeffs", "grid"}},
      {"manifold", {"shape", "radius", "lower", "upper"}},
      {"density", {"form", "a", "values"}},
      {"sample", {"n", "seed"}},
      {"assemble", {"t", "t_auto", "t_c", "dense_threshold"}},
      {"sweep", {"n", "t", "seeds", "count", "angles", "coercivity", "discrepancy", "discrepancy_centers"}},
      {"acceptance", {"cell_n", "cell_t", "coercivity_min"}},
      {"poisson", {"f", "tolerance", "max_iterations"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto begin = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto end = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return begin < end ? std::string(begin, end) : std::string();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (char c : s + ",") {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item.push_back(c);
    }
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(key, "expected a number, got '" + text + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(key, "expected a finite number, got '" + text + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw ConfigError(key, "expected a nonempty list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = lower(trim(text));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::optional<AcceptanceCheck> acceptance_entry(const std::string& name, const std::string& value) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) return std::nullopt;
  const std::string metric = name.substr(0, dot);
  AcceptanceCheck check;
  check.key = "acceptance." + name;
  if (metric == "rel_error") {
    check.metric = AcceptanceMetric::rel_error;
  } else if (metric == "abs_error") {
    check.metric = AcceptanceMetric::abs_error;
  } else if (metric == "angle") {
    check.metric = AcceptanceMetric::angle;
  } else {
    return std::nullopt;
  }
  check.index = parse_number<std::size_t>(check.key, name.substr(dot + 1));
  check.tolerance = parse_number<double>(check.key, value);
  if (check.tolerance <= 0.0) throw ConfigError(check.key, "tolerance must be positive");
  return check;
}

PoissonConfig parse_poisson_source(const std::string& key, const std::string& text) {
  PoissonConfig out;
  const auto words = split_list(lower(text));
  out.expression = trim(text);
  if (words.empty()) throw ConfigError(key, "expected zero, coordinate [d] or cosine m");
  if (words[0] == "zero" && words.size() == 1) {
    out.source = PoissonSource::zero;
    out.parameter = 0;
  } else if (words[0] == "coordinate" && words.size() <= 2) {
    out.source = PoissonSource::coordinate;
    out.parameter = words.size() == 2 ? parse_number<int>(key, words[1]) : 1;
    if (out.parameter < 1 || out.parameter > 3) throw ConfigError(key, "coordinate axis must be 1, 2 or 3");
  } else if (words[0] == "cosine" && words.size() == 2) {
    out.source = PoissonSource::cosine;
    out.parameter = parse_number<int>(key, words[1]);
    if (out.parameter < 0) throw ConfigError(key, "cosine frequency must be nonnegative");
  } else {
    throw ConfigError(key, "expected zero, coordinate [d] or cosine m, got '" + text + "'");
  }
  return out;
}

void build_models(RunConfig& c) {
  try {
    if (c.manifold_shape == "interval") {
      c.manifold = ManifoldModel::interval(c.manifold_lower, c.manifold_upper);
    } else if (c.manifold_shape == "circle") {
      c.manifold = ManifoldModel::circle(c.manifold_radius);
    } else if (c.manifold_shape == "sphere") {
      c.manifold = ManifoldModel::sphere(c.manifold_radius);
    } else {
      throw ConfigError("manifold.shape", "unknown shape '" + c.manifold_shape + "' (interval, circle, sphere)");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(c.manifold_shape == "interval" ? "manifold.lower" : "manifold.radius", e.what());
  }

  try {
    if (c.density_form == "uniform") {
      c.density = DensitySpec::uniform();
    } else if (c.density_form == "cosine") {
      c.density = DensitySpec::cosine_perturbed(c.density_a);
    } else if (c.density_form == "table") {
      if (c.density_values.empty()) throw ConfigError("density.values", "required for density.form = table");
      c.density = DensitySpec::table(c.density_values);
    } else {
      throw ConfigError("density.form", "unknown form '" + c.density_form + "' (uniform, cosine, table)");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(c.density_form == "table" ? "density.values" : "density.a", e.what());
  }

  const auto family = kernel_family_from_string(c.kernel_family);
  if (!family || *family == KernelFamily::custom)
    throw ConfigError("kernel.family", "unknown family '" + c.kernel_family + "' (wendland41, truncated_gaussian, polynomial)");
  try {
    switch (*family) {
      case KernelFamily::wendland41:
        c.kernel = KernelSpec::wendland41();
        break;
      case KernelFamily::truncated_gaussian:
        c.kernel = KernelSpec::truncated_gaussian();
        break;
      default:
        if (c.kernel_coeffs.empty()) throw ConfigError("kernel.coeffs", "required for kernel.family = polynomial");
        c.kernel = KernelSpec::polynomial(c.kernel_coeffs);
        break;
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("kernel.coeffs", e.what());
  }
}

void apply_entry(RunConfig& c, const std::string& section, const std::string& name, const std::string& value) {
  const std::string key = section + "." + name;
  if (section == "kernel") {
    if (name == "family") c.kernel_family = lower(trim(value));
    if (name == "coeffs") c.kernel_coeffs = parse_list<double>(key, value);
    if (name == "grid") c.kernel_grid = parse_number<int>(key, value);
  } else if (section == "manifold") {
    if (name == "shape") c.manifold_shape = lower(trim(value));
    if (name == "radius") c.manifold_radius = parse_number<double>(key, value);
    if (name == "lower") c.manifold_lower = parse_number<double>(key, value);
    if (name == "upper") c.manifold_upper = parse_number<double>(key, value);
  } else if (section == "density") {
    if (name == "form") c.density_form = lower(trim(value));
    if (name == "a") c.density_a = parse_number<double>(key, value);
    if (name == "values") c.density_values = parse_list<double>(key, value);
  } else if (section == "sample") {
    if (name == "n") c.sample_n = parse_number<std::size_t>(key, value);
    if (name == "seed") c.sample_seed = parse_number<std::uint64_t>(key, value);
  } else if (section == "assemble") {
    if (name == "t") c.assemble_t = parse_number<double>(key, value);
    if (name == "t_auto") c.assemble_t_auto = parse_bool(key, value);
    if (name == "t_c") c.assemble_t_c = parse_number<double>(key, value);
    if (name == "dense_threshold") c.dense_threshold = parse_number<std::size_t>(key, value);
  } else if (section == "sweep") {
    if (name == "n") c.sweep_n = parse_list<std::size_t>(key, value);
    if (name == "t") c.sweep_t = parse_list<double>(key, value);
    if (name == "seeds") c.sweep_seeds = parse_list<std::uint64_t>(key, value);
    if (name == "count") c.sweep_count = parse_number<std::size_t>(key, value);
    if (name == "angles") c.sweep_angles = parse_bool(key, value);
    if (name == "coercivity") c.sweep_coercivity = parse_bool(key, value);
    if (name == "discrepancy") c.sweep_discrepancy = parse_bool(key, value);
    if (name == "discrepancy_centers") c.sweep_discrepancy_centers = parse_number<std::size_t>(key, value);
  } else if (section == "acceptance") {
    if (name == "cell_n") c.acceptance.cell_n = parse_number<std::size_t>(key, value);
    if (name == "cell_t") c.acceptance.cell_t = parse_number<double>(key, value);
    if (name == "coercivity_min") c.acceptance.coercivity_min = parse_number<double>(key, value);
  } else if (section == "poisson") {
    if (name == "f") {
      const auto parsed = parse_poisson_source(key, value);
      c.poisson.source = parsed.source;
      c.poisson.parameter = parsed.parameter;
      c.poisson.expression = parsed.expression;
    }
    if (name == "tolerance") c.poisson.tolerance = parse_number<double>(key, value);
    if (name == "max_iterations") c.poisson.max_iterations = parse_number<int>(key, value);
  }
}

void check_ranges(const RunConfig& c) {
  if (c.kernel_grid < 100) throw ConfigError("kernel.grid", "must be at least 100");
  if (c.sample_n == 0) throw ConfigError("sample.n", "must be positive");
  if (c.assemble_t && *c.assemble_t <= 0.0) throw ConfigError("assemble.t", "must be positive");
  if (c.assemble_t_c <= 0.0) throw ConfigError("assemble.t_c", "must be positive");
  if (c.sweep_count == 0 || c.sweep_count > kMaxReferenceCount)
    throw ConfigError("sweep.count", "must lie in [1, " + std::to_string(kMaxReferenceCount) + "]");
  for (std::size_t n : c.sweep_n)
    if (n == 0) throw ConfigError("sweep.n", "sample sizes must be positive");
  for (double t : c.sweep_t)
    if (t <= 0.0 || t > kMaxSweepBandwidth) throw ConfigError("sweep.t", "bandwidths must lie in (0, 0.25]");
  if (c.sweep_discrepancy_centers < kMinDiscrepancyCenters)
    throw ConfigError("sweep.discrepancy_centers", "must be at least " + std::to_string(kMinDiscrepancyCenters));
  for (const auto& check : c.acceptance.checks)
    if (check.index >= c.sweep_count) throw ConfigError(check.key, "index exceeds sweep.count - 1");
  if (c.poisson.tolerance <= 0.0) throw ConfigError("poisson.tolerance", "must be positive");
  if (c.poisson.max_iterations < 0) throw ConfigError("poisson.max_iterations", "must be nonnegative");
}

}  // namespace

double RunConfig::bandwidth() const {
  if (assemble_t) return *assemble_t;
  if (assemble_t_auto) return default_bandwidth(sample_n, manifold.intrinsic_dim(), assemble_t_c);
  throw ConfigError("assemble.t", "missing (set assemble.t or assemble.t_auto = true)");
}

AssemblyOptions RunConfig::assembly_options() const {
  AssemblyOptions options;
  options.dense_threshold = dense_threshold;
  return options;
}

SweepGrid RunConfig::sweep_grid() const {
  SweepGrid grid;
  grid.manifold = manifold;
  grid.density = density;
  grid.kernel = kernel;
  grid.n_values = sweep_n.empty() ? std::vector<std::size_t>{sample_n} : sweep_n;
  if (!sweep_t.empty()) {
    grid.t_values = sweep_t;
  } else if (assemble_t) {
    grid.t_values = {*assemble_t};
  } else if (assemble_t_auto) {
    for (std::size_t n : grid.n_values)
      grid.t_values.push_back(default_bandwidth(n, manifold.intrinsic_dim(), assemble_t_c));
    std::sort(grid.t_values.begin(), grid.t_values.end());
    grid.t_values.erase(std::unique(grid.t_values.begin(), grid.t_values.end()), grid.t_values.end());
  } else {
    throw ConfigError("sweep.t", "missing (set sweep.t, assemble.t or assemble.t_auto = true)");
  }
  grid.seeds = sweep_seeds.empty() ? std::vector<std::uint64_t>{sample_seed} : sweep_seeds;
  return grid;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any [section]");
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) throw ConfigError(section, "unknown section [" + section + "]");
    for (const auto& [name, node] : body) {
      const std::string value = node.get_value<std::string>();
      const std::string key = section + "." + name;
      config.entries[key] = trim(value);
      if (section == "acceptance") {
        if (auto check = acceptance_entry(name, value)) {
          config.acceptance.checks.push_back(*check);
          continue;
        }
      }
      if (!known->second.contains(name)) throw ConfigError(key, "unknown key");
      apply_entry(config, section, name, value);
    }
  }
  build_models(config);
  check_ranges(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

void override_seed(RunConfig& config, std::uint64_t seed) {
  config.sample_seed = seed;
  config.entries["sample.seed"] = std::to_string(seed);
  if (!config.sweep_seeds.empty()) {
    config.sweep_seeds = {seed};
    config.entries["sweep.seeds"] = std::to_string(seed);
  }
}

}  // namespace pim::cli
