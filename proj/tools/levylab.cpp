#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "levylab/config.hpp"
#include "levylab/errors.hpp"
#include "levylab/experiments.hpp"

using namespace levylab;

int main(int argc, char** argv) {
  CLI::App app{"Recurrent bounded solutions of jump-diffusion equations: checks, simulation and recurrence tests"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides run.seed)");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");

  const char* kinds[][2] = {
      {"check", "evaluate the constants and every condition and threshold"},
      {"simulate", "integrate one path from run.y0 over [run.t0, run.t1]"},
      {"bounded", "pullback approximation of the bounded solution and its second moment"},
      {"recurrence", "almost-period scan, distributional test and shift coupling"},
      {"stability", "same-noise gap experiment, decay fit and ultimate bound"},
      {"example61", "scalar example: check, bounded, recurrence, stability"},
      {"example62", "stochastic heat equation on a Galerkin space: same pipeline"},
  };
  for (const auto& k : kinds) app.add_subcommand(k[0], k[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) cfg.run.seed = *seed;
    if (threads) cfg.run.threads = *threads;
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    const auto result = run_experiment(kind, cfg);
    write_result(result, cfg.output.directory, cfg.output.csv);
    std::cout << dump_summary(result.summary);
    std::cerr << "wrote " << cfg.output.directory << "/summary.json\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
