// stability-profiler: runs experiment configs against the lsp library and
// writes structured reports (JSON + CSV tables).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lsp/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read config file " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning stability profiler: signatures, exponents, step-size laws"};
  app.require_subcommand(1);

  std::string run_config;
  unsigned threads = 1;
  std::string output_override;
  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  run_cmd->add_option("config", run_config, "experiment config (JSON)")->required();
  run_cmd->add_option("--threads", threads, "worker threads for Monte Carlo trials")
      ->default_val(1u);
  run_cmd->add_option("--output", output_override, "override the config's output prefix");

  std::string validate_config_path;
  auto* validate_cmd = app.add_subcommand("validate", "schema-check a config without running");
  validate_cmd->add_option("config", validate_config_path, "experiment config (JSON)")
      ->required();

  auto* version_cmd = app.add_subcommand("version", "print the tool version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (version_cmd->parsed()) {
      std::cout << "stability-profiler " << lsp::tool_version() << "\n";
      return 0;
    }
    if (validate_cmd->parsed()) {
      const lsp::ValidationResult result =
          lsp::validate_config_text(read_file(validate_config_path));
      if (result.ok()) {
        std::cout << "ok\n";
        return 0;
      }
      for (const auto& diag : result.diagnostics) std::cerr << diag << "\n";
      return 2;
    }

    lsp::RunOptions opts;
    opts.threads = threads;
    opts.output_override = output_override;
    if (const char* env_seed = std::getenv("STABILITY_PROFILER_SEED")) {
      opts.seed_override = std::strtoull(env_seed, nullptr, 10);
    }
    const lsp::RunResult result = lsp::run_experiment_text(read_file(run_config), opts);
    if (result.exit_code == 2) {
      std::cerr << result.summary;
    } else {
      std::cout << result.summary;
    }
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
