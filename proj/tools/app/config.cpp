#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mpfb/error.hpp"

namespace mpfb::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long parse_int(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw Error(ErrorCode::Config, key + ": expected an integer, got '" + s + "'");
  return v;
}

double parse_real_key(const std::string& key, const std::string& s) {
  try {
    return parse_real(s);
  } catch (const Error&) {
    throw Error(ErrorCode::Config, key + ": expected a number, got '" + s + "'");
  }
}

std::vector<long> parse_int_list(const std::string& key, const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
  if (out.empty()) throw Error(ErrorCode::Config, key + ": empty list");
  return out;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw Error(ErrorCode::Config, key + ": " + what);
}

}  // namespace

std::string bare(const Error& e) {
  const std::string m = e.what(), p = std::string(to_string(e.code())) + ": ";
  return m.rfind(p, 0) == 0 ? m.substr(p.size()) : m;
}

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw Error(ErrorCode::Config, "not a number: '" + s + "'");
  return v;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::set(const std::string& key, const std::string& v) {
  if (key == "grid.points") {
    const auto l = parse_int_list(key, v);
    require(l.size() == 1 || l.size() == 3, key, "one or three values");
    for (int a = 0; a < 3; ++a) grid_points[a] = static_cast<int>(l.size() == 1 ? l[0] : l[a]);
  } else if (key == "grid.xi_max") {
    grid_xi_max = parse_real_key(key, v);
  } else if (key == "partition.range") {
    if (v == "auto") {
      partition.reset();
    } else {
      const auto l = parse_int_list(key, v);
      require(l.size() == 2, key, "expected j_min,j_max or auto");
      partition = std::make_pair(static_cast<int>(l[0]), static_cast<int>(l[1]));
    }
  } else if (key == "solver.dt") {
    solver_dt = parse_real_key(key, v);
  } else if (key == "solver.T") {
    solver_T = parse_real_key(key, v);
  } else if (key == "solver.alpha") {
    solver_alpha = parse_real_key(key, v);
  } else if (key == "solver.r") {
    solver_r = parse_real_key(key, v);
  } else if (key == "solver.picard_depth") {
    solver_picard_depth = static_cast<int>(parse_int(key, v));
  } else if (key == "solver.dealias_fraction") {
    solver_dealias_fraction = parse_real_key(key, v);
  } else if (key == "experiment.N") {
    experiment_N = static_cast<int>(parse_int(key, v));
  } else if (key == "experiment.delta") {
    experiment_delta = parse_real_key(key, v);
  } else if (key == "experiment.r") {
    experiment_r = parse_real_key(key, v);
  } else if (key == "experiment.space") {
    experiment_space = parse_space(v);
  } else if (key == "experiment.t_factor") {
    experiment_t_factor = parse_real_key(key, v);
  } else if (key == "quadrature.gauss_order") {
    quadrature_gauss_order = static_cast<int>(parse_int(key, v));
  } else if (key == "quadrature.eta_order") {
    quadrature_eta_order = static_cast<int>(parse_int(key, v));
  } else if (key == "quadrature.tau_order") {
    quadrature_tau_order = static_cast<int>(parse_int(key, v));
  } else if (key == "quadrature.e_order") {
    quadrature_e_order = static_cast<int>(parse_int(key, v));
  } else if (key == "semigroup.samples") {
    semigroup_samples = static_cast<int>(parse_int(key, v));
  } else if (key == "kernel.samples") {
    kernel_samples = parse_int(key, v);
  } else if (key == "crosscheck.levels") {
    crosscheck_levels.clear();
    for (long l : parse_int_list(key, v)) crosscheck_levels.push_back(static_cast<int>(l));
  } else if (key == "crosscheck.samples") {
    crosscheck_samples = static_cast<int>(parse_int(key, v));
  } else if (key == "seed") {
    const long s = parse_int(key, v);
    require(s >= 0, key, "must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "output.dir") {
    require(!v.empty(), key, "must not be empty");
    output_dir = v;
  } else if (key == "calibration.file") {
    require(!v.empty(), key, "must not be empty");
    calibration_file = v;
  } else {
    throw Error(ErrorCode::Config, "unknown key '" + key + "'");
  }
}

void RunConfig::validate() const {
  for (int n : grid_points) require(n >= 4 && n <= 1024 && n % 2 == 0, "grid.points", "even, in [4, 1024]");
  require(grid_xi_max > 0.0 && std::isfinite(grid_xi_max), "grid.xi_max", "must be positive");
  if (partition) require(partition->first < partition->second, "partition.range", "need j_min < j_max");
  require(solver_dt > 0.0 && solver_dt <= solver_T, "solver.dt", "must lie in (0, solver.T]");
  require(solver_T > 0.0 && std::isfinite(solver_T), "solver.T", "must be positive");
  require(solver_alpha > 0.0 && solver_alpha < 1.0, "solver.alpha", "must lie in (0, 1)");
  require(solver_r >= 1.0, "solver.r", "must lie in [1, inf]");
  require(solver_picard_depth >= 1 && solver_picard_depth <= 6, "solver.picard_depth", "must lie in [1, 6]");
  require(solver_dealias_fraction > 0.0 && solver_dealias_fraction <= 1.0, "solver.dealias_fraction",
          "must lie in (0, 1]");
  require(experiment_N >= 2 && experiment_N <= 12, "experiment.N", "must lie in [2, 12]");
  require(experiment_delta > 0.0 && experiment_delta < 1.0, "experiment.delta", "must lie in (0, 1)");
  require(experiment_r >= 1.0, "experiment.r", "must lie in [1, inf]");
  require(experiment_t_factor > 0.0 && std::isfinite(experiment_t_factor), "experiment.t_factor",
          "must be positive");
  require(quadrature_gauss_order >= 2 && quadrature_gauss_order <= 32, "quadrature.gauss_order", "in [2, 32]");
  require(quadrature_eta_order >= 2 && quadrature_eta_order <= 32, "quadrature.eta_order", "in [2, 32]");
  require(quadrature_tau_order >= 2 && quadrature_tau_order <= 32, "quadrature.tau_order", "in [2, 32]");
  require(quadrature_e_order >= 1 && quadrature_e_order <= 16, "quadrature.e_order", "in [1, 16]");
  require(semigroup_samples >= 1, "semigroup.samples", "must be positive");
  require(kernel_samples >= 1, "kernel.samples", "must be positive");
  for (int l : crosscheck_levels) require(l >= 1 && l <= 4, "crosscheck.levels", "levels in [1, 4]");
  require(crosscheck_samples >= 1, "crosscheck.samples", "must be positive");
}

SolverConfig RunConfig::solver() const {
  SolverConfig c;
  c.points = grid_points;
  c.half_extent = Vec3::Constant(grid_xi_max);
  c.dt = solver_dt;
  c.T = solver_T;
  c.alpha = solver_alpha;
  c.r = solver_r;
  c.picard_depth = solver_picard_depth;
  c.dealias_fraction = solver_dealias_fraction;
  c.partition_range = partition;
  return c;
}

SecondIterateOptions RunConfig::iterate_options() const {
  SecondIterateOptions o;
  o.eta_order = quadrature_eta_order;
  o.tau_order = quadrature_tau_order;
  return o;
}

InflationOptions RunConfig::inflation_options() const {
  InflationOptions o;
  o.data_order = quadrature_gauss_order;
  o.e_order = quadrature_e_order;
  o.t_factor = experiment_t_factor;
  o.iterate = iterate_options();
  return o;
}

std::map<std::string, std::string> RunConfig::canonical() const {
  auto list = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  std::map<std::string, std::string> m;
  m["grid.points"] = list(grid_points);
  m["grid.xi_max"] = format_value(grid_xi_max);
  m["partition.range"] = partition ? std::to_string(partition->first) + "," + std::to_string(partition->second) : "auto";
  m["solver.dt"] = format_value(solver_dt);
  m["solver.T"] = format_value(solver_T);
  m["solver.alpha"] = format_value(solver_alpha);
  m["solver.r"] = format_value(solver_r);
  m["solver.picard_depth"] = std::to_string(solver_picard_depth);
  m["solver.dealias_fraction"] = format_value(solver_dealias_fraction);
  m["experiment.N"] = std::to_string(experiment_N);
  m["experiment.delta"] = format_value(experiment_delta);
  m["experiment.r"] = format_value(experiment_r);
  m["experiment.space"] = to_string(experiment_space);
  m["experiment.t_factor"] = format_value(experiment_t_factor);
  m["quadrature.gauss_order"] = std::to_string(quadrature_gauss_order);
  m["quadrature.eta_order"] = std::to_string(quadrature_eta_order);
  m["quadrature.tau_order"] = std::to_string(quadrature_tau_order);
  m["quadrature.e_order"] = std::to_string(quadrature_e_order);
  m["semigroup.samples"] = std::to_string(semigroup_samples);
  m["kernel.samples"] = std::to_string(kernel_samples);
  m["crosscheck.levels"] = list(crosscheck_levels);
  m["crosscheck.samples"] = std::to_string(crosscheck_samples);
  m["seed"] = std::to_string(seed);
  return m;
}

std::string RunConfig::hash() const {
  std::string text;
  for (const auto& [k, v] : canonical()) text += k + " = " + v + "\n";
  return fnv1a_hex(text);
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Config, where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::Config, where + "missing key");
    if (seen.count(key))
      throw Error(ErrorCode::Config, where + "duplicate key '" + key + "' (first on line " +
                                         std::to_string(seen[key]) + ")");
    seen[key] = lineno;
    try {
      cfg.set(key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, where + bare(e));
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, origin + ": " + bare(e));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace mpfb::app
