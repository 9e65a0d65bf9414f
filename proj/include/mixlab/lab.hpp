#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/kernels.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/serialization.hpp"

namespace mixlab::lab {

/// distance, divergence, identify, witness, probe, minimax, posterior-sim
const std::vector<std::string>& subcommands();

struct ExperimentConfig {
  std::string subcommand;  ///< empty when the file leaves it to the command line
  std::uint64_t seed = 0;
  std::optional<unsigned> workers;
  std::string kernel_family;  ///< empty when no kernel section is present
  std::map<std::string, double> kernel_fixed;
  KernelPtr kernel;
  std::vector<MixingMeasure> measures;
  Json params = Json::object();
  std::string out_dir = ".";
  std::string stem;  ///< output file stem; defaults to the subcommand

  Json to_json() const;
};

/// Validates the JSON text. Throws SchemaError naming the offending path.
ExperimentConfig parse_config(const std::string& text);

/// --workers beats LAB_WORKERS beats the config file; default 1.
unsigned resolve_workers(std::optional<unsigned> cli, const char* env,
                         std::optional<unsigned> config);

struct Report {
  std::string csv;
  Json envelope;
};

/// Runs the subcommand in memory. Results depend on (config, seed) only.
Report execute(const ExperimentConfig& config, unsigned workers);

struct RunResult {
  int exit_status = 0;  ///< 0 on success, 2 when a module error propagated
  std::string csv_path;
  std::string json_path;
  std::string error_kind;
  std::string message;
};

/// execute() plus atomic writes of <out_dir>/<stem>.csv and .json. On
/// failure no output file is left behind.
RunResult run(const ExperimentConfig& config, unsigned workers);

}  // namespace mixlab::lab
