#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lsp {

/// Full schema walk of an experiment config: key-by-key validation with
/// unknown-key rejection. Never executes an experiment. Diagnostics name
/// the offending path (e.g. "system.layers[2].weight").
struct ValidationResult {
  std::vector<std::string> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

ValidationResult validate_config_text(const std::string& config_text);

struct RunOptions {
  unsigned threads = 1;
  /// Overrides the config seed when set (the CLI wires the
  /// STABILITY_PROFILER_SEED environment variable through here).
  std::optional<std::uint64_t> seed_override;
  /// Directory/prefix override; empty keeps the config's output prefix.
  std::string output_override;
};

struct RunResult {
  /// 0: all verdicts passed; 1: some verdict failed or estimation failed;
  /// 2: config error.
  int exit_code = 2;
  std::string summary;
  std::vector<std::string> written_files;
};

/// Parses, validates and executes one experiment config; writes the
/// structured JSON report plus one CSV per table under the config's output
/// prefix and returns the human-readable summary.
RunResult run_experiment_text(const std::string& config_text, const RunOptions& opts = {});

/// FNV-1a 64-bit hash (hex) of the canonical re-serialized config; the
/// report's metadata carries this value so round-tripping is checkable.
std::string config_hash_hex(const std::string& config_text);

std::string tool_version();

}  // namespace lsp
