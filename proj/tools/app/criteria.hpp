#pragma once

#include <string>
#include <utility>
#include <vector>

#include "calibration.hpp"
#include "config.hpp"

namespace mpfb::app {

/// One measured quantity against a closed interval [lo, hi]; infinite ends are open.
struct Check {
  std::string name;
  double measured = 0.0;
  double lo = -kInf;
  double hi = kInf;
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string key;
  std::vector<Check> checks;
  /// Reported but not asserted.
  std::vector<std::pair<std::string, double>> info;

  bool pass() const;
  void add(const std::string& name, double measured, double lo, double hi);
};

inline constexpr int kCriterionCount = 11;

/// Criterion `id` in 1..11. Criteria 8 and 11 read the calibration.
CriterionResult run_criterion(int id, const RunConfig& cfg, const Calibration& cal);

std::string criterion_key(int id);
std::string summary_line(const CriterionResult& r);

/// Picard iteration for data of FB^{-1}_{1,2} size 0.9 epsilon.
struct SmallDataResult {
  double epsilon = 0.0;
  double data_norm = 0.0;
  double linear_norm = 0.0;
  double solution_norm = 0.0;
  double bound = 0.0;  // 1 / (2 c1_hat)
  std::vector<double> increments;
  std::vector<double> ratios;
};
SmallDataResult run_smalldata(const RunConfig& cfg, const Calibration& cal);
/// Canonical JSON text of a small-data run.
std::string serialize(const SmallDataResult& r);

/// Spread (max - min) / max of positive values.
double variation(const std::vector<double>& v);
/// Least-squares slope of log y against log x.
double log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mpfb::app
