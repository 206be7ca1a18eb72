#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "auw/diagnostics.hpp"
#include "auw/kv.hpp"
#include "auw/runtime.hpp"

namespace auw::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kRuntimeAbort = 4 };

/// Applies AUW_LOG (error, info, debug; default info) to the default logger.
void init_logging();

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

std::string iso8601_utc(std::chrono::system_clock::time_point t);

/// Solver settings after precedence is resolved. Values come from
/// flags > config file > mode defaults.
struct UnmixSettings {
  SolverConfig solver;
  std::string init = "perturbed";  ///< perturbed | data | files
  double init_noise = 0.05;
  std::uint64_t init_seed = 7;
  std::string scheduler = "threads";  ///< threads | virtual | tcp
  std::optional<std::size_t> workers;
};

/// Keys match the long flag names with '-' replaced by '_'.
UnmixSettings resolve_settings(const KeyValues& merged);

/// Config echo written into manifests.
KeyValues settings_to_key_values(const UnmixSettings& s);

struct RunManifest {
  KeyValues config;
  std::vector<std::pair<std::string, std::string>> dataset_hashes;  ///< file name → sha256
  std::string mode;
  std::string started;
  std::string finished;
  double final_objective = 0.0;
  std::size_t iterations = 0;
  std::string exit_reason;
  std::string abort_message;
  KeyValues diagnostics;

  KeyValues to_key_values() const;
};

KeyValues diagnostics_summary(const RunResult& r);

struct NamedTrace {
  std::string label;
  std::vector<TracePoint> points;
};

/// Log-scale objective against wall-clock time, one polyline per trace.
/// Throws Error if a trace is empty or an objective is not positive.
std::string render_svg(const std::vector<NamedTrace>& traces);

}  // namespace auw::cli
