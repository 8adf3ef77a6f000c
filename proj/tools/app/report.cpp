#include "report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mpfb/error.hpp"

#ifndef MPFB_VERSION
#define MPFB_VERSION "unknown"
#endif

namespace mpfb::app {

namespace {

Json bound(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json report_header(const std::string& command, const RunConfig& cfg, const Calibration* cal) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["code_version"] = MPFB_VERSION;
  j["config_hash"] = cfg.hash();
  j["calibration_hash"] = cal ? Json(cal->hash) : Json(nullptr);
  Json params = Json::object();
  for (const auto& [k, v] : cfg.canonical()) params[k] = v;
  j["params"] = params;
  return j;
}

Json criteria_json(const std::vector<CriterionResult>& results) {
  Json out = Json::object();
  for (const auto& r : results) {
    Json c;
    c["id"] = r.id;
    c["pass"] = r.pass();
    Json checks = Json::object();
    for (const auto& k : r.checks)
      checks[k.name] = {{"measured", bound(k.measured)}, {"min", bound(k.lo)}, {"max", bound(k.hi)}, {"pass", k.pass}};
    c["checks"] = checks;
    Json info = Json::object();
    for (const auto& [name, v] : r.info) info[name] = bound(v);
    c["info"] = info;
    out[r.key] = c;
  }
  return out;
}

Json inflation_json(const InflationReport& r) {
  Json j;
  j["params"] = {{"N", r.N}, {"delta", r.delta}, {"r", std::isinf(r.r) ? Json("inf") : Json(r.r)},
                 {"space", to_string(r.space)}, {"t", r.t}};
  j["norms"] = {{"data", r.data_norm},
                {"A1", r.a1_norm},
                {"u2_surrogate", r.u2_surrogate},
                {"omega2_surrogate", r.omega2_surrogate}};
  j["ratios"] = {{"u2", r.ratio}, {"omega2", r.omega_ratio}};
  const TermNorms& t = r.terms;
  Json terms;
  for (int k = 0; k < 7; ++k) terms["J" + std::to_string(k + 1)] = t.J[k];
  terms["J2_plus_J3"] = t.J23;
  for (int k = 0; k < 5; ++k) terms["K" + std::to_string(k + 1)] = t.K[k];
  for (int k = 0; k < 3; ++k) terms["K1" + std::to_string(k + 1)] = t.K1[k];
  terms["J5_op"] = t.J5_op;
  terms["J6_op"] = t.J6_op;
  terms["J7_op"] = t.J7_op;
  terms["K5_op"] = t.K5_op;
  terms["u2_l1"] = t.u2_l1;
  terms["omega2_l1"] = t.omega2_l1;
  terms["self_error"] = t.self_error;
  j["terms_l1_E"] = terms;
  j["sign"] = {{"leading_integrand_min", r.leading_integrand_min},
               {"u2_negative_part", r.u2_negative_part},
               {"omega2_negative_part", r.omega2_negative_part}};
  j["warnings"] = r.warnings;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path + "'");
}

IncompleteMarker::IncompleteMarker(const std::string& dir, const std::string& command)
    : path_((std::filesystem::path(dir) / "INCOMPLETE").string()) {
  write_text(path_, command + " did not finish; artifacts in this directory may be partial\n");
}

void IncompleteMarker::release() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace mpfb::app
