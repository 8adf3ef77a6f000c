#include "calibration.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpfb/error.hpp"
#include "mpfb/rng.hpp"

namespace mpfb::app {

namespace {

int corpus_steps(const RunConfig& cfg) {
  return std::max(4, static_cast<int>(std::ceil(cfg.solver_T / cfg.solver_dt - 1e-9)));
}

}  // namespace

CorpusConstants bilinear_corpus(const RunConfig& cfg, int pairs, std::uint64_t seed) {
  const SolverConfig sc = cfg.solver();
  const LatticeGrid g = sc.grid();
  const DyadicPartition part = sc.partition();
  const int steps = corpus_steps(cfg);
  const double band = sc.dealias_fraction * g.half_extent().minCoeff();
  const CounterRng rng(seed, 0xca11b);
  CorpusConstants out;
  for (int k = 0; k < pairs; ++k) {
    Trajectory L[2];
    for (int m = 0; m < 2; ++m) {
      const std::uint64_t c = 8 * static_cast<std::uint64_t>(2 * k + m);
      const double r_lo = rng.uniform(c, 0.1, 0.4) * band;
      const double r_hi = r_lo + rng.uniform(c + 1, 0.2, 0.55) * band;
      const SpectralField U = random_solenoidal_field(g, seed * 1000 + 2 * k + m, r_lo, r_hi, 1.0);
      L[m] = linear_trajectory(U, sc.T, steps);
      const double data = fb_norm(U, -1.0, 1.0, sc.r, part);
      const double lin = x_alpha_norm(L[m], sc.alpha, sc.r, part);
      if (!(data > 0.0) || !std::isfinite(lin)) {
        std::ostringstream msg;
        msg << "corpus case k=" << k << " m=" << m << " shell=[" << r_lo << "," << r_hi << "] data=" << data
            << " linear=" << lin;
        throw Error(ErrorCode::CalibrationAborted, msg.str());
      }
      out.c2_hat = std::max(out.c2_hat, lin / data);
    }
    const Trajectory B = duhamel_bilinear(L[0], L[1], sc);
    const double ratio = x_alpha_norm(B, sc.alpha, sc.r, part) /
                         (x_alpha_norm(L[0], sc.alpha, sc.r, part) * x_alpha_norm(L[1], sc.alpha, sc.r, part));
    if (!std::isfinite(ratio)) {
      throw Error(ErrorCode::CalibrationAborted, "corpus case k=" + std::to_string(k) + " gave a non-finite ratio");
    }
    out.c1_hat = std::max(out.c1_hat, ratio);
  }
  return out;
}

Calibration run_calibration(const RunConfig& cfg) {
  Calibration c;
  c.seed = cfg.seed;
  c.eta_order = cfg.quadrature_eta_order;
  c.T = cfg.solver_T;
  c.steps = corpus_steps(cfg);
  const CorpusConstants k = bilinear_corpus(cfg, c.pairs, cfg.seed);
  c.c1_hat = k.c1_hat;
  c.c2_hat = k.c2_hat;
  c.epsilon = 1.0 / (8.0 * c.c1_hat * c.c2_hat);

  constexpr int N = 3;
  constexpr double delta = 0.05;
  const IllposedDatum d = make_datum(N, delta);
  const TermNorms tn = term_norms_on_E(d, std::pow(4.0, -N), cfg.quadrature_e_order, cfg.iterate_options());
  c.c0 = tn.u2_fb_partial / (delta * delta);
  c.c_prime = tn.J23 * N * std::ldexp(1.0, N) / (delta * delta);

  for (double v : {c.c1_hat, c.c2_hat, c.epsilon, c.c0, c.c_prime})
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::CalibrationAborted, "non-positive or non-finite constant");
  c.text = serialize(c);
  c.hash = fnv1a_hex(c.text);
  return c;
}

std::string serialize(const Calibration& c) {
  nlohmann::ordered_json j;
  j["schema"] = c.schema;
  j["seed"] = c.seed;
  j["eta_order"] = c.eta_order;
  j["corpus"] = {{"pairs", c.pairs}, {"T", c.T}, {"steps", c.steps}};
  j["c1_hat"] = c.c1_hat;
  j["c2_hat"] = c.c2_hat;
  j["epsilon"] = c.epsilon;
  j["c0"] = c.c0;
  j["c_prime"] = c.c_prime;
  return j.dump(2) + "\n";
}

Calibration parse_calibration(const std::string& text) {
  Calibration c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.schema = j.at("schema").get<int>();
    if (c.schema != 1) throw Error(ErrorCode::Config, "unsupported calibration schema " + std::to_string(c.schema));
    c.seed = j.at("seed").get<std::uint64_t>();
    c.eta_order = j.at("eta_order").get<int>();
    c.pairs = j.at("corpus").at("pairs").get<int>();
    c.T = j.at("corpus").at("T").get<double>();
    c.steps = j.at("corpus").at("steps").get<int>();
    c.c1_hat = j.at("c1_hat").get<double>();
    c.c2_hat = j.at("c2_hat").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.c0 = j.at("c0").get<double>();
    c.c_prime = j.at("c_prime").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed calibration file: ") + e.what());
  }
  c.text = text;
  c.hash = fnv1a_hex(text);
  return c;
}

Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read calibration '" + path + "' (run `mpfb calibrate` first)");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_calibration(ss.str());
}

void save_calibration(const Calibration& c, const std::string& path, bool overwrite) {
  namespace fs = std::filesystem;
  if (fs::exists(path) && !overwrite)
    throw Error(ErrorCode::Io, "calibration '" + path + "' exists; pass --overwrite to replace it");
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << c.text;
}

}  // namespace mpfb::app
