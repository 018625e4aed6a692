// tcs: build reproducible training corpora from multi-parallel data by
// sampling, for every target sentence, one source sentence chosen by
// similarity to a designated low-resource language.
//
// Subcommands: index, sim, select, stats. Exit codes: 0 success,
// 1 validation error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tcs/config.hpp"
#include "tcs/pipeline.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_override;
  uint64_t seed_override = 0;
  bool has_seed_override = false;
  bool quiet = false;
};

tcs::RunConfig load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) {
    throw tcs::ValidationError("--config is required for this command");
  }
  tcs::RunConfig config = tcs::RunConfig::load(args.config_path);
  if (args.has_seed_override) config.seed = args.seed_override;
  if (!args.out_override.empty()) config.out_dir = args.out_override;
  config.validate();
  return config;
}

std::string tau_dir_name(double tau) { return "tau-" + tcs::g17(tau); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"target-conditioned sampling over multi-parallel corpora"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs args;
  app.add_option("--config", args.config_path, "run configuration (JSON)");
  auto* seed_opt = app.add_option("--seed", args.seed_override, "override the config seed");
  app.add_option("--out", args.out_override, "override the output directory");
  app.add_flag("--quiet", args.quiet, "suppress informational output");

  CLI::App* cmd_index = app.add_subcommand("index", "ingest parallel files and build the index");
  bool artifacts = false;
  CLI::App* cmd_sim = app.add_subcommand("sim", "compute the similarity table");
  cmd_sim->add_flag("--artifacts", artifacts, "also dump n-gram profiles / LM counts");
  bool sweep_tau = false;
  CLI::App* cmd_select = app.add_subcommand("select", "build the plan and emit selections");
  cmd_select->add_flag("--sweep-tau", sweep_tau,
                       "write one plan per tau in the configured sweep, under tau-<t>/");
  std::string plan_path;
  bool json_stats = false;
  CLI::App* cmd_stats = app.add_subcommand("stats", "summarize a plan dump");
  cmd_stats->add_option("plan", plan_path, "path to plan.tsv")->required();
  cmd_stats->add_flag("--json", json_stats, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  args.has_seed_override = seed_opt->count() > 0;

  tcs::CommandOptions options;
  options.quiet = args.quiet;
  options.artifacts = artifacts;

  try {
    if (cmd_index->parsed()) {
      tcs::cmd_index(load_config(args), options);
    } else if (cmd_sim->parsed()) {
      tcs::cmd_sim(load_config(args), options);
    } else if (cmd_select->parsed()) {
      tcs::RunConfig config = load_config(args);
      if (sweep_tau) {
        const std::filesystem::path base = config.out_dir;
        tcs::CommandOptions sweep_options = options;
        sweep_options.input_dir = base;
        for (double tau : config.tau_sweep) {
          tcs::RunConfig sweep_config = config;
          sweep_config.tau = tau;
          sweep_config.out_dir = (base / tau_dir_name(tau)).string();
          if (!args.quiet) std::cout << "tau=" << tcs::g17(tau) << ":\n";
          tcs::cmd_select(sweep_config, sweep_options);
        }
      } else {
        tcs::cmd_select(config, options);
      }
    } else if (cmd_stats->parsed()) {
      tcs::cmd_stats(plan_path, json_stats, std::cout);
    }
  } catch (const tcs::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const tcs::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
