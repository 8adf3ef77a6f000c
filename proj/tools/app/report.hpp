#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calibration.hpp"
#include "config.hpp"
#include "criteria.hpp"

namespace mpfb::app {

inline constexpr int kReportSchema = 1;

using Json = nlohmann::ordered_json;

/// Common header: schema, command, code version, config and calibration
/// hashes, and the canonical config as params. No timing, so reruns are
/// byte-identical.
Json report_header(const std::string& command, const RunConfig& cfg, const Calibration* cal);

/// {key: {pass, checks: {name: {measured, min, max, pass}}, info: {...}}};
/// unbounded ends are written as null.
Json criteria_json(const std::vector<CriterionResult>& results);

Json inflation_json(const InflationReport& r);

/// Pretty JSON text with a trailing newline.
std::string dump(const Json& j);

/// Writes text to path, creating parent directories.
void write_text(const std::string& path, const std::string& text);

/// Writes `dir`/INCOMPLETE; release() removes it once every artifact is out.
/// A job that throws leaves the marker behind.
class IncompleteMarker {
 public:
  IncompleteMarker(const std::string& dir, const std::string& command);
  void release();

 private:
  std::string path_;
};

}  // namespace mpfb::app
