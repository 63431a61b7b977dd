#pragma once

// Run specifications (JSON documents) for the command-line front end, and the
// measure / grid / gauge records they contain.
//
//   {
//     "command": "classify",
//     "N": 1, "p": 2.0, "T": 1.0,
//     "measure": [{"kind": "atom", "center": [0.0], "kappa": 1.0}],
//     "grid": {"time_nodes": 48},
//     "tolerances": {"picard": {"max_sweeps": 300}, "conditions": {"slope_tol": 0.1}},
//     "options": {...command specific...}
//   }

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "halfheat/conditions.hpp"
#include "halfheat/gauges.hpp"
#include "halfheat/grid.hpp"
#include "halfheat/measures.hpp"
#include "halfheat/solver.hpp"

namespace halfheat {

inline constexpr const char* kRunSpecSchema = "halfheat.runspec/1";
inline constexpr const char* kReportSchema = "halfheat.report/1";

/// A malformed or inconsistent run specification; `path` is a JSON pointer to the offending field.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Command { kernel_check, classify, certify, solve, dichotomy, trace, global_probe };
std::string to_string(Command c);
Command command_from_string(const std::string& name);

/// One measure component: "atom", "gaussian", "bump", "constant" or a profile kind name.
struct MeasureComponent {
  std::string kind;
  Point center;
  double kappa = 1.0;
  double width = 0.0;
  double radius = 0.0;
  /// Profile exponent (defaults to the run exponent).
  double p = 0.0;
};

struct RunSpec {
  Command command = Command::kernel_check;
  int N = 1;
  double p = 2.0;
  double T = 1.0;
  std::vector<MeasureComponent> measure;
  nlohmann::json grid = nlohmann::json::object();
  PicardCaps picard;
  ConditionOptions conditions;
  nlohmann::json options = nlohmann::json::object();
};

RunSpec parse_run_spec(const nlohmann::json& doc);

/// Sum of the components; at most one interior density and one boundary line.
HalfSpaceMeasure build_measure(const std::vector<MeasureComponent>& components, int N, double p);
MeasureComponent parse_measure_component(const nlohmann::json& j, int N, const std::string& path);

/// default_grid(mu, T) with the overrides of a "grid" block applied.
GridSpec build_grid(const HalfSpaceMeasure& mu, double T, const nlohmann::json& overrides);

/// {"kind": "identity" | "power" | "log" | "shifted_log", "alpha", "beta", "L"}.
ConvexGauge parse_gauge(const nlohmann::json& j, const std::string& path);

/// Line (1-based) of the first occurrence of the last key in a JSON pointer, 0 when not found.
std::size_t locate_key(const std::string& text, const std::string& pointer);

}  // namespace halfheat
