#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rankbreak {

// Subcommand drivers. Each validates its arguments, performs the work, writes
// primary output to `out` (or the configured file) and warnings to `err`, and
// returns a process exit code: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure. Exceptions from the library map onto those codes.

struct GenerateArgs {
  std::string scenario = "canonical";  // canonical | tradeoff
  int d = 0;
  int n = 0;
  int kappa = 0;                 // 0 = offer all items
  std::vector<int> block_sizes;  // top block first (canonical scenario)
  double c = 0.5;                // elicitation budget (tradeoff scenario)
  double bound = 2.0;
  std::uint64_t seed = 0;
  bool keep_orders = true;
  std::string output;
};
int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);

struct IngestArgs {
  std::string input;
  std::string output;
  std::string protocol = "blocks";  // split | blocks
  int m = 1;
};
int cmd_ingest(const IngestArgs& args, std::ostream& out, std::ostream& err);

struct FitArgs {
  std::string input;
  std::string output;             // empty = stdout
  std::string estimator = "grb";  // grb | prb | oracle | full_mle
  std::string orders_path;        // oracle only; default <input>.orders.jsonl
  int M = 2;
  double bound = 2.0;
  int max_iters = 5000;
  double grad_tol = 1e-7;
  int workers = 1;
};
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);

struct DiagnoseArgs {
  std::string input;
  std::string output;  // empty = stdout
  int M = 2;
  double bound = 2.0;
};
int cmd_diagnose(const DiagnoseArgs& args, std::ostream& out, std::ostream& err);

struct ExperimentSpec {
  std::string scenario = "canonical";
  int d = 16;
  int kappa = 0;
  std::vector<int> block_sizes = {1, 2, 3};
  double c = 0.5;
  std::vector<int> n_values = {1000};
  std::vector<int> M_values = {2};
  int trials = 20;
  std::vector<std::string> estimators = {"grb"};
  double bound = 2.0;
  std::uint64_t seed = 0;
  int workers = 1;           // parallelism across (n, trial) jobs; fits run single-threaded
  std::string timing = "wall";  // wall | none (none writes 0 in the seconds column,
                                // making the CSV byte-reproducible end to end)
  std::string output = "experiment.csv";
  int max_iters = 5000;
  double grad_tol = 1e-7;
};
int cmd_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

// Runs fn(), translating library exceptions into exit codes and printing the
// message to err.
int run_guarded(const std::function<int()>& fn, std::ostream& err);

}  // namespace rankbreak
