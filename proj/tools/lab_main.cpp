#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "mixlab/errors.hpp"
#include "mixlab/lab.hpp"

namespace lab = mixlab::lab;

int main(int argc, char** argv) {
  CLI::App app{"Experiments on finite mixtures of product distributions"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;

  const std::map<std::string, std::string> about{
      {"distance", "D_N, D_r1r2, d_theta, d_p and W_p between two measures"},
      {"divergence", "TV / Hellinger between product mixtures, with upper bounds"},
      {"identify", "rank, singular values and Gram spectra of first-order systems"},
      {"witness", "Bernoulli measures that agree up to length 2k-2"},
      {"probe", "inverse-bound ratio probes along perturbation paths"},
      {"minimax", "two-point lower bound over a parameter grid"},
      {"posterior-sim", "posterior contraction experiment and slope fits"}};
  for (const auto& name : lab::subcommands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "JSON experiment file")->required();
    sub->add_option("--seed", seed, "master seed (overrides the file)");
    sub->add_option("--workers", workers, "worker threads (overrides LAB_WORKERS)")
        ->check(CLI::Range(1u, 4096u));
    sub->add_option("--out", out_dir, "output directory");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "lab: cannot read " << config_path << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();

  try {
    std::string body = text.str();
    // Patch overrides into the document so validation sees one config.
    if (seed || out_dir) {
      mixlab::Json j;
      try {
        j = mixlab::Json::parse(body);
      } catch (const nlohmann::json::parse_error& e) {
        throw mixlab::SchemaError("$", std::string("invalid JSON: ") + e.what());
      }
      if (j.is_object()) {
        if (seed) j["seed"] = *seed;
        if (out_dir) j["output"]["dir"] = *out_dir;
      }
      body = j.dump();
    }
    auto config = lab::parse_config(body);
    if (!config.subcommand.empty() && config.subcommand != subcommand)
      throw mixlab::SchemaError("subcommand", "file says '" + config.subcommand +
                                                  "' but the command line says '" + subcommand + "'");
    config.subcommand = subcommand;
    const unsigned w = lab::resolve_workers(workers, std::getenv("LAB_WORKERS"), config.workers);

    const auto res = lab::run(config, w);
    if (res.exit_status != 0) {
      std::cerr << "lab: " << res.error_kind << ": " << res.message << "\n";
      return res.exit_status;
    }
    std::cout << res.csv_path << "\n" << res.json_path << "\n";
    return 0;
  } catch (const mixlab::Error& e) {
    std::cerr << "lab: " << e.kind() << ": " << e.what() << "\n";
    return 2;
  }
}
