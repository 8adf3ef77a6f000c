#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "app/calibration.hpp"
#include "app/config.hpp"
#include "app/criteria.hpp"
#include "app/report.hpp"
#include "mpfb/field_io.hpp"
#include "mpfb/illposedness.hpp"
#include "mpfb/mild_solver.hpp"
#include "mpfb/semigroup.hpp"

using namespace mpfb;
using namespace mpfb::app;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  std::string calibration;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Config, "--set expects key=value, got '" + kv + "'");
    try {
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, "--set " + kv + ": " + bare(e));
    }
  }
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (!g.calibration.empty()) cfg.calibration_file = g.calibration;
  cfg.validate();
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

int finish(const std::string& command, const RunConfig& cfg, const Calibration* cal,
           const std::vector<CriterionResult>& results, Json extra = Json::object()) {
  Json j = report_header(command, cfg, cal);
  bool pass = true;
  for (const auto& r : results) pass = pass && r.pass();
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  j["criteria"] = criteria_json(results);
  j["pass"] = pass;
  const std::string path = out_path(cfg, command + ".json");
  write_text(path, dump(j));
  for (const auto& r : results) std::cout << summary_line(r) << "\n";
  std::cout << "report: " << path << "\n";
  return pass ? kExitPass : kExitFail;
}

SpectralField data_field(const RunConfig& cfg, const std::string& field_path, double amplitude) {
  if (!field_path.empty()) return load_field(field_path);
  const SolverConfig sc = cfg.solver();
  const LatticeGrid g = sc.grid();
  const double band = sc.dealias_fraction * g.half_extent().minCoeff();
  return random_solenoidal_field(g, cfg.seed, 0.1 * band, 0.5 * band, amplitude);
}

int cmd_lp_check(const RunConfig& cfg) {
  IncompleteMarker mark(cfg.output_dir, "lp-check");
  const int rc = finish("lp-check", cfg, nullptr, {run_criterion(1, cfg, {})});
  mark.release();
  return rc;
}

int cmd_semigroup_verify(RunConfig cfg, int samples, long seed) {
  if (samples > 0) cfg.semigroup_samples = samples;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  IncompleteMarker mark(cfg.output_dir, "semigroup-verify");
  std::vector<CriterionResult> rs;
  for (int id : {2, 3, 4}) rs.push_back(run_criterion(id, cfg, {}));
  const int rc = finish("semigroup-verify", cfg, nullptr, rs);
  mark.release();
  return rc;
}

void write_checkpoints(const RunConfig& cfg, const Trajectory& tr, bool complete) {
  Json manifest;
  manifest["schema"] = kReportSchema;
  manifest["config_hash"] = cfg.hash();
  manifest["complete"] = complete;
  Json entries = Json::array();
  std::ostringstream csv;
  csv << "time,divergence_residual,hermitian_residual,fb_norm\n";
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "checkpoint_%04zu.field", k);
    save_field(out_path(cfg, name), tr.states[k]);
    entries.push_back({{"time", tr.times[k]}, {"file", name}});
  }
  for (const auto& d : tr.diagnostics)
    csv << format_value(d.time) << "," << format_value(d.divergence_residual) << ","
        << format_value(d.hermitian_residual) << "," << format_value(d.fb_norm) << "\n";
  manifest["checkpoints"] = entries;
  write_text(out_path(cfg, "manifest.json"), dump(manifest));
  write_text(out_path(cfg, "diagnostics.csv"), csv.str());
}

int cmd_simulate(const RunConfig& cfg, const std::string& field, double amplitude, int stride) {
  IncompleteMarker mark(cfg.output_dir, "simulate");
  SolverConfig sc = cfg.solver();
  sc.save_stride = stride;
  const SpectralField U0 = data_field(cfg, field, amplitude);
  Trajectory tr;
  try {
    tr = solve_mild(U0, sc);
  } catch (const BlowUpError& e) {
    write_checkpoints(cfg, e.partial(), false);
    throw;
  }
  write_checkpoints(cfg, tr, true);
  mark.release();
  std::cout << "simulate: " << tr.states.size() << " checkpoints, final FB norm "
            << tr.diagnostics.back().fb_norm << "\n";
  return kExitPass;
}

int cmd_picard(const RunConfig& cfg, const std::string& field, double amplitude) {
  IncompleteMarker mark(cfg.output_dir, "picard");
  const SolverConfig sc = cfg.solver();
  const DyadicPartition part = sc.partition();
  const SpectralField f = data_field(cfg, field, amplitude);
  const auto terms = picard_terms(f, sc.T, sc.picard_depth, sc);
  const SpectralField U = solve_mild(f, sc).states.back();
  SpectralField rem = U;
  Json norms = Json::array();
  for (std::size_t n = 0; n < terms.size(); ++n) {
    save_field(out_path(cfg, "A" + std::to_string(n + 1) + ".field"), terms[n]);
    norms.push_back(fb_norm(terms[n], -1.0, 1.0, sc.r, part));
    rem.axpy(-1.0, terms[n]);
  }
  Json j = report_header("picard", cfg, nullptr);
  j["t"] = sc.T;
  j["term_fb_norms"] = norms;
  j["solution_fb_norm"] = fb_norm(U, -1.0, 1.0, sc.r, part);
  j["truncation_remainder_fb_norm"] = fb_norm(rem, -1.0, 1.0, sc.r, part);
  write_text(out_path(cfg, "picard.json"), dump(j));
  mark.release();
  std::cout << "picard: remainder " << j["truncation_remainder_fb_norm"].get<double>() << "\n";
  return kExitPass;
}

std::string integrand_csv(const InflationReport& rep, const RunConfig& cfg) {
  const ObservationRegion region;
  std::vector<Vec3> xs;
  std::vector<double> ws;
  for (const auto& n : region.nodes(cfg.quadrature_e_order)) {
    xs.push_back(n.x);
    ws.push_back(n.w);
  }
  SecondIterateOptions opt = cfg.iterate_options();
  opt.self_check = 0;
  const auto res = second_iterate(make_datum(rep.N, rep.delta), rep.t, xs, opt);
  std::ostringstream csv;
  csv << "xi1,xi2,xi3,weight,u2_abs,omega2_abs,u2_aligned,omega2_aligned,J1,J2,J3,J4,J5,J6,J7,"
         "J1_integrand_min,K11_integrand_min\n";
  for (std::size_t i = 0; i < res.samples.size(); ++i) {
    const auto& s = res.samples[i];
    const Cplx I(0.0, 1.0);
    csv << format_value(s.xi[0]) << "," << format_value(s.xi[1]) << "," << format_value(s.xi[2]) << ","
        << format_value(ws[i]) << "," << format_value(s.value.head<3>().norm()) << ","
        << format_value(s.value.tail<3>().norm()) << "," << format_value((I * s.value[0]).real()) << ","
        << format_value((I * s.value[3]).real());
    for (double v : s.J) csv << "," << format_value(v);
    csv << "," << format_value(s.J1_integrand_min) << "," << format_value(s.K11_integrand_min) << "\n";
  }
  return csv.str();
}

int cmd_inflate(RunConfig cfg, int N, double delta, const std::string& r, const std::string& space) {
  if (N > 0) cfg.experiment_N = N;
  if (delta > 0.0) cfg.experiment_delta = delta;
  if (!r.empty()) cfg.set("experiment.r", r);
  if (!space.empty()) cfg.experiment_space = parse_space(space);
  cfg.validate();
  std::optional<Calibration> cal;
  if (std::filesystem::exists(cfg.calibration_file)) cal = load_calibration(cfg.calibration_file);
  IncompleteMarker mark(cfg.output_dir, "inflate");
  const InflationReport rep = inflation_experiment(cfg.experiment_N, cfg.experiment_delta, cfg.experiment_r,
                                                   cfg.experiment_space, cfg.inflation_options());
  CriterionResult c;
  c.id = 8;
  c.key = "inflation_single_N";
  const double d2 = rep.delta * rep.delta;
  c.add("self_error", rep.terms.self_error, -kInf, cfg.iterate_options().tolerance);
  c.add("u2_surrogate", rep.u2_surrogate, 0.0, kInf);
  c.add("omega2_surrogate", rep.omega2_surrogate, 0.0, kInf);
  c.add("leading_integrand_min", rep.leading_integrand_min, 0.0, kInf);
  if (cal) {
    c.add("u2_surrogate_over_delta2", rep.u2_surrogate / d2, 0.5 * cal->c0, kInf);
    c.add("omega2_surrogate_over_delta2", rep.omega2_surrogate / d2, 0.5 * cal->c0, kInf);
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  write_text(out_path(cfg, "inflate_integrands.csv"), integrand_csv(rep, cfg));
  const int rc = finish("inflate", cfg, cal ? &*cal : nullptr, {c}, inflation_json(rep));
  mark.release();
  return rc;
}

int cmd_smalldata(const RunConfig& cfg) {
  const Calibration cal = load_calibration(cfg.calibration_file);
  IncompleteMarker mark(cfg.output_dir, "smalldata");
  const SmallDataResult a = run_smalldata(cfg, cal);
  CriterionResult c;
  c.id = 11;
  c.key = "small_data_fixed_point";
  double worst = 0.0;
  for (double q : a.ratios) worst = std::max(worst, q);
  c.add("max_successive_ratio", worst, -kInf, 0.5);
  c.add("solution_norm_over_bound", a.solution_norm / a.bound, -kInf, 1.0 - 1e-12);
  const int rc = finish("smalldata", cfg, &cal, {c}, Json::parse(serialize(a)));
  mark.release();
  return rc;
}

int cmd_cross_check(const RunConfig& cfg, int N) {
  IncompleteMarker mark(cfg.output_dir, "cross-check");
  const CrossCheckResult cc =
      grid_cross_check(N, cfg.experiment_delta, cfg.crosscheck_levels, cfg.crosscheck_samples, cfg.iterate_options());
  CriterionResult c;
  c.id = 9;
  c.key = "path_equivalence";
  c.add("deviation_first_level", cc.levels.front().max_deviation, -kInf, 0.05);
  if (cc.levels.size() > 1)
    c.add("refined_over_coarse", cc.levels.back().max_deviation / cc.levels.front().max_deviation, -kInf,
          1.0 - 1e-12);
  Json levels = Json::array();
  for (const auto& l : cc.levels)
    levels.push_back({{"points", l.points}, {"h", {l.h[0], l.h[1], l.h[2]}}, {"max_deviation", l.max_deviation}});
  const int rc = finish("cross-check", cfg, nullptr, {c}, Json{{"N", cc.N}, {"t", cc.t}, {"levels", levels}});
  mark.release();
  return rc;
}

int cmd_report(const RunConfig& cfg, const std::vector<int>& only) {
  const Calibration cal = load_calibration(cfg.calibration_file);
  IncompleteMarker mark(cfg.output_dir, "report");
  std::vector<int> ids = only;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  std::vector<CriterionResult> rs;
  Json timing = Json::object();
  for (int id : ids) {
    const auto t0 = std::chrono::steady_clock::now();
    rs.push_back(run_criterion(id, cfg, cal));
    timing[criterion_key(id)] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << summary_line(rs.back()) << std::endl;
  }
  Json j = report_header("report", cfg, &cal);
  bool pass = true;
  for (const auto& r : rs) pass = pass && r.pass();
  j["criteria"] = criteria_json(rs);
  j["pass"] = pass;
  write_text(out_path(cfg, "report.json"), dump(j));
  write_text(out_path(cfg, "timing.json"), dump(Json{{"seconds", timing}}));
  mark.release();
  std::cout << "report: " << out_path(cfg, "report.json") << "\n";
  return pass ? kExitPass : kExitFail;
}

int cmd_calibrate(const RunConfig& cfg, bool overwrite) {
  if (std::filesystem::exists(cfg.calibration_file) && !overwrite)
    throw Error(ErrorCode::Io, "calibration '" + cfg.calibration_file + "' exists; pass --overwrite to replace it");
  const Calibration c = run_calibration(cfg);
  save_calibration(c, cfg.calibration_file, overwrite);
  std::cout << c.text << "calibration: " << cfg.calibration_file << " (" << c.hash << ")\n";
  return kExitPass;
}

int cmd_symbol(const std::vector<double>& xi) {
  if (xi.size() != 3) throw Error(ErrorCode::Config, "--xi expects three components");
  const SymbolBundle b = build_symbol(Vec3(xi[0], xi[1], xi[2]));
  const Eigen::IOFormat fmt(6, 0, "  ", "\n", "  [", "]");
  std::cout << "xi = (" << xi[0] << ", " << xi[1] << ", " << xi[2] << ")  |xi|^2 = " << b.s << "\n";
  std::cout << "A =\n" << b.A.format(fmt) << "\n";
  std::cout << "Q (" << (b.fallback ? "numerical fallback" : "explicit") << ", cond " << b.q_condition << ") =\n"
            << b.Q.format(fmt) << "\n";
  std::cout << "eigenvalues:";
  for (double l : b.eigenvalues) std::cout << " " << l;
  std::cout << "\nlambda_min = " << lambda_min(b.s) << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mpfb: micropolar Fourier-Besov experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "override one config key, key=value (repeatable)");
  app.add_option("--out", g.out, "output directory (overrides output.dir)");
  app.add_option("--calibration", g.calibration, "calibration file (overrides calibration.file)");

  int rc = kExitPass;
  auto guarded = [&](auto fn) { return [&, fn] { rc = fn(resolve_config(g)); }; };

  app.add_subcommand("lp-check", "partition of unity and block orthogonality")
      ->callback(guarded([](const RunConfig& c) { return cmd_lp_check(c); }));

  int samples = 0;
  long seed = -1;
  auto* sg = app.add_subcommand("semigroup-verify", "symbol, semigroup and decay checks");
  sg->add_option("--samples", samples, "number of sampled frequencies");
  sg->add_option("--seed", seed, "seed");
  sg->callback(guarded([&](const RunConfig& c) { return cmd_semigroup_verify(c, samples, seed); }));

  std::string field;
  double amplitude = 1.0;
  int stride = 1;
  auto* sim = app.add_subcommand("simulate", "mild solution with checkpoints and manifest");
  sim->add_option("--field", field, "initial field file (default: seeded random solenoidal field)");
  sim->add_option("--amplitude", amplitude, "amplitude of the random initial field");
  sim->add_option("--stride", stride, "keep every k-th state")->check(CLI::PositiveNumber);
  sim->callback(guarded([&](const RunConfig& c) { return cmd_simulate(c, field, amplitude, stride); }));

  auto* pic = app.add_subcommand("picard", "Picard terms A_1..A_n at time solver.T");
  pic->add_option("--field", field, "initial field file");
  pic->add_option("--amplitude", amplitude, "amplitude of the random initial field");
  pic->callback(guarded([&](const RunConfig& c) { return cmd_picard(c, field, amplitude); }));

  int N = 0;
  double delta = 0.0;
  std::string r, space;
  auto* inf = app.add_subcommand("inflate", "norm-inflation experiment for one N");
  inf->add_option("--N", N, "scale index N >= 2");
  inf->add_option("--delta", delta, "amplitude delta");
  inf->add_option("--r", r, "summability index (number or inf)");
  inf->add_option("--space", space, "fb or besov");
  inf->callback(guarded([&](const RunConfig& c) { return cmd_inflate(c, N, delta, r, space); }));

  app.add_subcommand("smalldata", "Picard contraction for calibrated small data")
      ->callback(guarded([](const RunConfig& c) { return cmd_smalldata(c); }));

  int cc_N = 2;
  auto* cc = app.add_subcommand("cross-check", "cube quadrature against the lattice solver path");
  cc->add_option("--N", cc_N, "scale index (2 or 3)");
  cc->callback(guarded([&](const RunConfig& c) { return cmd_cross_check(c, cc_N); }));

  std::vector<int> only;
  auto* rep = app.add_subcommand("report", "every acceptance criterion");
  rep->add_option("--only", only, "criterion ids to run")->delimiter(',')->check(CLI::Range(1, kCriterionCount));
  rep->callback(guarded([&](const RunConfig& c) { return cmd_report(c, only); }));

  bool overwrite = false;
  auto* cal = app.add_subcommand("calibrate", "empirical constants file");
  cal->add_flag("--overwrite", overwrite, "replace an existing calibration file");
  cal->callback(guarded([&](const RunConfig& c) { return cmd_calibrate(c, overwrite); }));

  std::vector<double> xi;
  auto* sym = app.add_subcommand("symbol", "dump A, Q and eigenvalues at one frequency");
  sym->add_option("--xi", xi, "frequency x,y,z")->delimiter(',')->required();
  sym->callback([&] { rc = cmd_symbol(xi); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_usage_error() ? kExitUsage : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return rc;
}
