#pragma once

#include <cstdint>
#include <string>

#include "config.hpp"

namespace mpfb::app {

/// Empirical constants consumed by the small-data and inflation checks.
struct Calibration {
  int schema = 1;
  std::uint64_t seed = 1;
  int eta_order = 6;
  int pairs = 50;
  double T = 0.25;
  int steps = 8;
  double c1_hat = 0.0;   // bilinear constant: ||B(U1,U2)||_X <= c1 ||U1||_X ||U2||_X
  double c2_hat = 0.0;   // linear constant: ||G U0||_X <= c2 ||U0||_{FB^{-1}_{1,r}}
  double epsilon = 0.0;  // 1 / (8 c1 c2)
  double c0 = 0.0;       // u2 surrogate / delta^2 at N = 3
  double c_prime = 0.0;  // ||J2 + J3||_{L1(E)} N 2^N / delta^2 at N = 3
  std::string text;      // serialized form
  std::string hash;      // FNV-1a of text
};

/// Largest ||B(U1,U2)||_X / (||U1||_X ||U2||_X) over a seeded corpus of
/// linear trajectory pairs, and the matching linear ratio.
struct CorpusConstants {
  double c1_hat = 0.0;
  double c2_hat = 0.0;
};
CorpusConstants bilinear_corpus(const RunConfig& cfg, int pairs, std::uint64_t seed);

Calibration run_calibration(const RunConfig& cfg);
std::string serialize(const Calibration& c);
Calibration parse_calibration(const std::string& text);
Calibration load_calibration(const std::string& path);
void save_calibration(const Calibration& c, const std::string& path, bool overwrite);

}  // namespace mpfb::app
