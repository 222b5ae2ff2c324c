#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mmtail/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tail exponents of Markov-modulated Levy prices at random trade times"};
  app.set_version_flag("--version", mmtail::kVersion);
  app.require_subcommand(1);

  mmtail::CommandOptions options;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::string tolerance_json;
  double time = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "Run configuration (JSON)")
        ->required();
    sub->add_option("--out", options.out_path, "Output path (default: stdout)");
    sub->add_option("--seed", seed, "Override simulation.seed");
    sub->add_option("--samples", samples, "Override simulation.count");
    sub->add_option("--tolerance-json", tolerance_json,
                    "Override analysis.tolerances, e.g. '{\"hill_relative\":0.2}'");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Tail exponent, correction order and scale");
  common(analyze);
  analyze->add_option("--csv", options.csv_path, "Write the (alpha, g(alpha)) table");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo draws of (X_T, T)");
  common(simulate);
  simulate->add_option("--threads", options.threads, "Worker threads (0: all cores)");

  CLI::App* validate = app.add_subcommand("validate", "Analyze, simulate and compare");
  common(validate);
  validate->add_option("--report", options.report_path,
                       "Check this report instead of computing one");
  validate->add_option("--csv", options.csv_path, "Write the (y, y^alpha S(y)) table");
  validate->add_option("--threads", options.threads, "Worker threads (0: all cores)");

  CLI::App* density = app.add_subcommand("density", "Trade-time density or mass function");
  common(density);
  density->add_option("--points", options.points, "Number of grid points");
  density->add_option("--t-max", options.t_max, "Right end of the grid");

  CLI::App* mgf = app.add_subcommand("mgf", "M_T(s), or M_t(s) with --time");
  common(mgf);
  mgf->add_option("--s", options.s_values, "Evaluation points")->required()->delimiter(',');
  mgf->add_option("--time", time, "Fixed time t > 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mmtail::kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) options.seed = seed;
  if (chosen->count("--samples")) options.samples = samples;
  if (chosen->count("--tolerance-json")) options.tolerance_json = tolerance_json;
  if (chosen->get_name() == "mgf" && chosen->count("--time")) options.time = time;

  return mmtail::run_command(chosen->get_name(), options, std::cout, std::cerr);
}
