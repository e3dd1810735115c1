#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rankbreak/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rank-breaking toolkit for choice models over partial orders"};
  app.require_subcommand(1);

  rankbreak::GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "sample a synthetic block-ranking dataset");
  generate->add_option("--scenario", gen.scenario, "canonical | tradeoff")
      ->check(CLI::IsMember({"canonical", "tradeoff"}));
  generate->add_option("--d", gen.d, "number of items")->required();
  generate->add_option("--n", gen.n, "number of observations")->required();
  generate->add_option("--kappa", gen.kappa, "offer size per user (0 = all items)");
  generate->add_option("--blocks", gen.block_sizes, "revealed block sizes, top first (canonical)")
      ->delimiter(',');
  generate->add_option("--c", gen.c, "elicitation budget (tradeoff)");
  generate->add_option("--b", gen.bound, "utility box half-width");
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_flag("--no-orders", [&gen](std::int64_t) { gen.keep_orders = false; },
                     "skip the hidden-order sidecar");
  generate->add_option("--output", gen.output, "dataset path (JSON lines)")->required();

  rankbreak::IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest", "coarsen a CSV of complete rankings into block data");
  ingest->add_option("--input", ing.input, "CSV path, one ranking per line, best first")->required();
  ingest->add_option("--output", ing.output, "dataset path (JSON lines)")->required();
  ingest->add_option("--protocol", ing.protocol, "split | blocks")
      ->check(CLI::IsMember({"split", "blocks"}));
  ingest->add_option("--m", ing.m, "block size for the protocol");

  rankbreak::FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "estimate utilities from a dataset");
  fit_cmd->add_option("--input", fit.input, "dataset path")->required();
  fit_cmd->add_option("--output", fit.output, "result JSON path (default stdout)");
  fit_cmd->add_option("--estimator", fit.estimator, "grb | prb | oracle | full_mle")
      ->check(CLI::IsMember({"grb", "prb", "oracle", "full_mle"}));
  fit_cmd->add_option("--orders", fit.orders_path, "hidden-order sidecar (oracle)");
  fit_cmd->add_option("--M", fit.M, "edge order cap");
  fit_cmd->add_option("--b", fit.bound, "utility box half-width");
  fit_cmd->add_option("--max-iters", fit.max_iters, "iteration cap");
  fit_cmd->add_option("--grad-tol", fit.grad_tol, "projected-gradient tolerance");
  fit_cmd->add_option("--workers", fit.workers, "threads over observations");

  rankbreak::DiagnoseArgs diag;
  auto* diagnose = app.add_subcommand("diagnose", "spectral and sample-size diagnostics");
  diagnose->add_option("--input", diag.input, "dataset path")->required();
  diagnose->add_option("--output", diag.output, "report JSON path (default stdout)");
  diagnose->add_option("--M", diag.M, "edge order cap");
  diagnose->add_option("--b", diag.bound, "utility box half-width");

  rankbreak::ExperimentSpec exp;
  auto* experiment = app.add_subcommand("experiment", "sweep (estimator, M, n) over seeded trials");
  experiment->add_option("--scenario", exp.scenario, "canonical | tradeoff")
      ->check(CLI::IsMember({"canonical", "tradeoff"}));
  experiment->add_option("--d", exp.d, "number of items");
  experiment->add_option("--kappa", exp.kappa, "offer size per user (0 = all items)");
  experiment->add_option("--blocks", exp.block_sizes, "revealed block sizes, top first")
      ->delimiter(',');
  experiment->add_option("--c", exp.c, "elicitation budget (tradeoff)");
  experiment->add_option("--n-values", exp.n_values, "sample sizes to sweep")->delimiter(',');
  experiment->add_option("--M-values", exp.M_values, "order caps to sweep (grb)")->delimiter(',');
  experiment->add_option("--trials", exp.trials, "independent datasets per n");
  experiment->add_option("--estimators", exp.estimators, "subset of grb,prb,oracle,full_mle")
      ->delimiter(',');
  experiment->add_option("--b", exp.bound, "utility box half-width");
  experiment->add_option("--seed", exp.seed, "base RNG seed");
  experiment->add_option("--workers", exp.workers, "parallel (n, trial) jobs");
  experiment->add_option("--timing", exp.timing, "wall | none (none zeroes the seconds column)")
      ->check(CLI::IsMember({"wall", "none"}));
  experiment->add_option("--max-iters", exp.max_iters, "iteration cap per fit");
  experiment->add_option("--grad-tol", exp.grad_tol, "projected-gradient tolerance");
  experiment->add_option("--output", exp.output, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help/--version; every parse failure is a config error.
    return code == 0 ? 0 : 2;
  }

  auto guarded = [&](auto&& body) { return rankbreak::run_guarded(body, std::cerr); };
  if (generate->parsed()) return guarded([&] { return rankbreak::cmd_generate(gen, std::cout, std::cerr); });
  if (ingest->parsed()) return guarded([&] { return rankbreak::cmd_ingest(ing, std::cout, std::cerr); });
  if (fit_cmd->parsed()) return guarded([&] { return rankbreak::cmd_fit(fit, std::cout, std::cerr); });
  if (diagnose->parsed()) return guarded([&] { return rankbreak::cmd_diagnose(diag, std::cout, std::cerr); });
  if (experiment->parsed()) return guarded([&] { return rankbreak::cmd_experiment(exp, std::cout, std::cerr); });
  return 2;
}
