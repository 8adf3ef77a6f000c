#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpfb/error.hpp"
#include "mpfb/illposedness.hpp"
#include "mpfb/mild_solver.hpp"

namespace mpfb::app {

/// Flat `key = value` configuration with dotted keys. Unknown keys and
/// out-of-range values are rejected with the offending line.
struct RunConfig {
  std::array<int, 3> grid_points{16, 16, 16};
  double grid_xi_max = 8.0;
  std::optional<std::pair<int, int>> partition;

  double solver_dt = 1.0 / 32.0;
  double solver_T = 0.25;
  double solver_alpha = 0.5;
  double solver_r = 2.0;
  int solver_picard_depth = 2;
  double solver_dealias_fraction = 2.0 / 3.0;

  int experiment_N = 4;
  double experiment_delta = 0.05;
  double experiment_r = kInf;
  NormSpace experiment_space = NormSpace::FourierBesov;
  double experiment_t_factor = 1.0;

  int quadrature_gauss_order = 8;
  int quadrature_eta_order = 6;
  int quadrature_tau_order = 6;
  int quadrature_e_order = 4;

  int semigroup_samples = 1000;
  long kernel_samples = 1000000;
  std::vector<int> crosscheck_levels{1, 2};
  int crosscheck_samples = 32;

  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string calibration_file = "data/calibration.json";

  SolverConfig solver() const;
  SecondIterateOptions iterate_options() const;
  InflationOptions inflation_options() const;

  /// Canonical `key = value` lines, sorted by key. output.dir and
  /// calibration.file are left out: paths do not change what a run computes,
  /// and reports carry the calibration's own hash.
  std::map<std::string, std::string> canonical() const;
  /// FNV-1a 64 of the canonical text, as 16 hex digits.
  std::string hash() const;

  /// Set one key from its text value; throws Config errors.
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Error text without its "code: " prefix, for re-wrapping with context.
std::string bare(const Error& e);

std::string format_value(double v);
double parse_real(const std::string& s);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace mpfb::app
