#pragma once

// Command dispatch for the command-line front end: one run writes report.json (schema
// "halfheat.report/1") and a plot-ready CSV into the output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "halfheat/runspec.hpp"

namespace halfheat {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNumerical = 2, kExitVerdict = 3 };

struct RunContext {
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 20261016;
  int threads = 1;
  /// Halve every grid spacing once (trend checks).
  bool refine = false;
};

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::ordered_json report;
  /// CSV text (header line first).
  std::string csv;
};

/// Runs the command without touching the file system.
RunOutcome execute(const RunSpec& spec, const RunContext& ctx);

/// execute() plus report.json and samples.csv in ctx.out_dir. I/O failures throw std::runtime_error.
RunOutcome run(const RunSpec& spec, const RunContext& ctx);

}  // namespace halfheat
