#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "finsler/json_io.hpp"

namespace finsler {

enum class Status { Pass, Fail, Inconclusive };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

inline Status status_from_string(const std::string& s) {
  if (s == "pass") return Status::Pass;
  if (s == "fail") return Status::Fail;
  if (s == "inconclusive") return Status::Inconclusive;
  throw Error(ErrorKind::ConfigInvalid, "unknown status '" + s + "'");
}

/// Outcome of one checker run. A failing report carries a witness from
/// which the violation can be recomputed.
struct VerdictReport {
  std::string claim;
  Status status = Status::Pass;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t instance = 0;
  std::string module;
  std::optional<json> witness;
  std::string note;

  bool passed() const { return status == Status::Pass; }

  json to_json() const {
    json j{{"claim", claim},
           {"status", to_string(status)},
           {"max_residual", double_to_json(max_residual)},
           {"tolerance", tolerance},
           {"samples", samples},
           {"seed", seed},
           {"instance", instance},
           {"module", module}};
    if (witness) j["witness"] = *witness;
    if (!note.empty()) j["note"] = note;
    return j;
  }

  static VerdictReport from_json(const json& j) {
    VerdictReport r;
    r.claim = require_field(j, "claim", "report").get<std::string>();
    r.status = status_from_string(require_field(j, "status", "report").get<std::string>());
    r.max_residual = double_from_json(require_field(j, "max_residual", "report"));
    r.tolerance = require_field(j, "tolerance", "report").get<double>();
    r.samples = require_field(j, "samples", "report").get<std::size_t>();
    r.seed = require_field(j, "seed", "report").get<std::uint64_t>();
    r.instance = j.value("instance", std::size_t{0});
    r.module = j.value("module", std::string{});
    if (j.contains("witness")) r.witness = j["witness"];
    r.note = j.value("note", std::string{});
    return r;
  }
};

/// Tracks the worst sample of a residual-style check.
class ResidualTracker {
 public:
  ResidualTracker(std::string claim, double tolerance, std::uint64_t seed) {
    report_.claim = std::move(claim);
    report_.tolerance = tolerance;
    report_.seed = seed;
  }

  /// Records a residual; `witness` is built only if it becomes the worst.
  template <class F>
  void record(double residual, F&& witness) {
    if (!(residual <= report_.max_residual) || std::isnan(residual)) {
      report_.max_residual = residual;
      worst_ = witness();
      (*worst_)["residual"] = double_to_json(residual);
    }
  }

  VerdictReport finish(const std::string& module, std::size_t samples) {
    report_.module = module;
    report_.samples = samples;
    report_.status = report_.max_residual <= report_.tolerance ? Status::Pass : Status::Fail;
    if (report_.status == Status::Fail) report_.witness = worst_;
    return report_;
  }

 private:
  VerdictReport report_;
  std::optional<json> worst_;
};

}  // namespace finsler
