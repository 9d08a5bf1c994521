#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsa/generators.hpp"

namespace lsa {

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit codes shared by the runner and the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 1,
  kExitNumericFailure = 2,
  kExitAuditFailure = 3,
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
/// FNV-1a of the canonical dump (sorted keys, shortest round-trip floats),
/// as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Exit code for the exception currently being handled.
int exit_code_for_current_exception(std::string* message = nullptr);

/// A set entry: a sampler spec, or {"cloud": "file.csv"}.
SamplerPtr sampler_from_config(const nlohmann::json& set);

struct StageResult {
  nlohmann::json result;
  std::string csv;
  bool audit_failed = false;
};

/// Runs one pipeline stage ({"op": ..., ...}) on a set without writing files.
StageResult run_stage(SamplerPtr set, std::uint64_t seed, const nlohmann::json& stage);

/// Experiment config:
///   {"set": <sampler spec> | {"cloud": "file.csv"}, "seed": int,
///    "output": "dir", "pipeline": [{"op": ..., ...}, ...]}
/// with ops profile, tangent, calibrate, classify, dimension, audit, verify.
/// Throws InvalidInput on the first schema problem, before any work is done.
void validate_config(const nlohmann::json& config);

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  /// Files written, relative to the output directory.
  std::vector<std::string> files;
};

/// Validates, then runs the pipeline in order. Writes report.json plus one
/// CSV per stage into the output directory (override wins over the config).
/// A stage that throws stops the pipeline; its row carries the failure and
/// later stages are marked skipped. Audits that run but fail give exit 3.
/// An invalid config returns exit 1 and writes nothing.
RunResult run_experiment(const nlohmann::json& config, const std::string& output_override = "");

}  // namespace lsa
