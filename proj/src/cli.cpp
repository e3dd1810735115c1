#include "rankbreak/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "rankbreak/dataset_io.hpp"
#include "rankbreak/diagnostics.hpp"
#include "rankbreak/errors.hpp"
#include "rankbreak/synth.hpp"

namespace rankbreak {

namespace {

using nlohmann::json;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
}

json fit_result_json(const std::string& estimator, int M, double bound, const FitResult& res) {
  json j;
  j["estimator"] = estimator;
  j["M"] = M;
  j["b"] = bound;
  j["theta"] = std::vector<double>(res.theta_hat.values.data(),
                                   res.theta_hat.values.data() + res.theta_hat.values.size());
  j["value"] = res.final_value;
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["grad_norm"] = res.grad_norm;
  j["seconds"] = res.seconds;
  j["permutation_terms"] = res.permutation_terms_evaluated;
  j["connected"] = res.comparison_graph_connected;
  return j;
}

SynthResult generate_for(const std::string& scenario, int d, int n, int kappa,
                         const std::vector<int>& block_sizes, double c, double bound,
                         std::uint64_t seed, bool keep_orders) {
  if (scenario == "canonical") {
    ScenarioConfig cfg;
    cfg.d = d;
    cfg.n = n;
    cfg.kappa = kappa;
    cfg.block_sizes = block_sizes;
    cfg.bound = bound;
    cfg.seed = seed;
    cfg.keep_top_orderings = keep_orders;
    return generate_canonical(cfg);
  }
  if (scenario == "tradeoff") {
    TradeoffConfig cfg;
    cfg.d = d;
    cfg.n = n;
    cfg.c = c;
    cfg.bound = bound;
    cfg.seed = seed;
    cfg.keep_top_orderings = keep_orders;
    return generate_tradeoff(cfg);
  }
  throw ConfigError("scenario must be 'canonical' or 'tradeoff'");
}

}  // namespace

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
  (void)err;
  if (args.output.empty()) throw ConfigError("generate: --output is required");
  SynthResult synth = generate_for(args.scenario, args.d, args.n, args.kappa, args.block_sizes,
                                   args.c, args.bound, args.seed, args.keep_orders);
  write_dataset_jsonl(args.output, synth.dataset);
  write_truth_json(args.output + ".truth.json", synth.theta_star);
  if (args.keep_orders) write_orders_jsonl(args.output + ".orders.jsonl", synth.orders);

  std::map<int, std::int64_t> histogram;
  for (const auto& obs : synth.dataset.observations) {
    for (const auto& e : obs.edges) ++histogram[e.m()];
  }
  out << "wrote " << args.output << ": n=" << synth.dataset.observations.size()
      << " d=" << synth.dataset.d << '\n';
  out << "edge histogram:";
  for (const auto& [m, count] : histogram) out << " m=" << m << ":" << count;
  out << '\n';
  out << "truth: " << args.output << ".truth.json" << '\n';
  if (args.keep_orders) out << "orders: " << args.output << ".orders.jsonl" << '\n';
  return 0;
}

int cmd_ingest(const IngestArgs& args, std::ostream& out, std::ostream& err) {
  (void)err;
  if (args.input.empty() || args.output.empty()) throw ConfigError("ingest: --input and --output are required");
  IngestOptions opts;
  opts.protocol = args.protocol;
  opts.m = args.m;
  IngestResult result = ingest_rankings_csv(args.input, opts);
  write_dataset_jsonl(args.output, result.dataset);
  write_labels_json(args.output + ".labels.json", result.labels);

  std::map<int, std::int64_t> histogram;
  for (const auto& obs : result.dataset.observations) {
    for (const auto& e : obs.edges) ++histogram[e.m()];
  }
  out << "wrote " << args.output << ": n=" << result.dataset.observations.size()
      << " d=" << result.dataset.d << '\n';
  out << "edge histogram:";
  for (const auto& [m, count] : histogram) out << " m=" << m << ":" << count;
  out << '\n';
  out << "labels: " << args.output << ".labels.json" << '\n';
  return 0;
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  if (args.input.empty()) throw ConfigError("fit: --input is required");
  if (args.estimator != "grb" && args.estimator != "prb" && args.estimator != "full_mle" &&
      args.estimator != "oracle") {
    throw ConfigError("fit: unknown estimator '" + args.estimator + "'");
  }
  Dataset data = read_dataset_jsonl(args.input, args.M);

  FitOptions opts;
  opts.bound = args.bound;
  opts.max_iters = args.max_iters;
  opts.grad_tol = args.grad_tol;
  opts.workers = args.workers;

  FitResult res;
  if (args.estimator == "grb") {
    res = fit_order_M(data, opts);
  } else if (args.estimator == "prb") {
    res = pairwise_rb_inconsistent(data, opts);
  } else if (args.estimator == "full_mle") {
    res = full_mle_small(data, opts);
  } else {
    const std::string orders_path = args.orders_path.empty() ? args.input + ".orders.jsonl" : args.orders_path;
    TopBlockOrders orders = read_orders_jsonl(orders_path);
    res = oracle_mle(data, orders, opts);
  }

  if (!res.comparison_graph_connected) {
    err << "warning: comparison graph is disconnected; the box constraint pins unidentified items\n";
  }
  if (!res.converged) {
    err << "warning: not converged after " << res.iterations << " iterations (grad_norm=" << res.grad_norm << ")\n";
  }
  const std::string text = fit_result_json(args.estimator, args.M, args.bound, res).dump() + "\n";
  if (args.output.empty()) {
    out << text;
  } else {
    write_text_file(args.output, text);
    out << "wrote " << args.output << '\n';
  }
  return 0;
}

int cmd_diagnose(const DiagnoseArgs& args, std::ostream& out, std::ostream& err) {
  if (args.input.empty()) throw ConfigError("diagnose: --input is required");
  Dataset data = read_dataset_jsonl(args.input, args.M);
  if (data.retained_edge_count() == 0) {
    err << "warning: no edges retained at order M=" << args.M << "; shape constants are undefined\n";
  }
  DiagnosticsReport rep = diagnose(data, args.bound);

  json j;
  j["laplacian_trace"] = rep.laplacian_trace;
  j["alpha"] = rep.alpha;
  j["beta"] = rep.beta;
  j["gamma1"] = rep.gamma1;
  j["gamma2"] = rep.gamma2;
  j["gamma3"] = rep.gamma3;
  j["nu"] = rep.nu;
  j["effective_sample_size"] = rep.effective_sample_size;
  j["cramer_rao_bound"] = rep.cramer_rao_bound;
  j["eta_values"] = rep.eta_values;
  j["mu"] = rep.mu;
  j["error_upper_bound"] = rep.error_upper_bound_rhs;
  j["sample_condition_met"] = rep.sample_condition_met;

  const std::string text = j.dump() + "\n";
  if (args.output.empty()) {
    out << text;
  } else {
    write_text_file(args.output, text);
    out << "wrote " << args.output << '\n';
  }
  return 0;
}

namespace {

struct ExperimentRow {
  std::string estimator;
  int M = 0;
  int n = 0;
  int trial = 0;
  double mse = 0.0;
  double mse_per_d2 = 0.0;
  double seconds = 0.0;
  std::uint64_t permutation_terms = 0;

  bool operator<(const ExperimentRow& other) const {
    return std::tie(estimator, M, n, trial) < std::tie(other.estimator, other.M, other.n, other.trial);
  }
};

void validate_spec(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw ConfigError("experiment: trials must be >= 1");
  if (spec.n_values.empty()) throw ConfigError("experiment: need at least one n value");
  if (spec.M_values.empty()) throw ConfigError("experiment: need at least one M value");
  if (spec.estimators.empty()) throw ConfigError("experiment: need at least one estimator");
  if (spec.workers < 1) throw ConfigError("experiment: workers must be >= 1");
  if (spec.timing != "wall" && spec.timing != "none") throw ConfigError("experiment: timing must be wall|none");
  for (int n : spec.n_values) {
    if (n < 1) throw ConfigError("experiment: n values must be >= 1");
  }
  for (int M : spec.M_values) {
    if (M < 1 || M > kMaxTopSetSize) throw ConfigError("experiment: M values must be in [1, 8]");
  }
  for (const auto& est : spec.estimators) {
    if (est != "grb" && est != "prb" && est != "oracle" && est != "full_mle") {
      throw ConfigError("experiment: unknown estimator '" + est + "'");
    }
  }
  auto dedup = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
  };
  if (dedup(spec.n_values)) throw ConfigError("experiment: duplicate n values");
  if (dedup(spec.M_values)) throw ConfigError("experiment: duplicate M values");
}

json spec_json(const ExperimentSpec& spec) {
  json j;
  j["scenario"] = spec.scenario;
  j["d"] = spec.d;
  j["kappa"] = spec.kappa;
  j["blocks"] = spec.block_sizes;
  j["c"] = spec.c;
  j["n_values"] = spec.n_values;
  j["M_values"] = spec.M_values;
  j["trials"] = spec.trials;
  j["estimators"] = spec.estimators;
  j["b"] = spec.bound;
  j["seed"] = spec.seed;
  j["workers"] = spec.workers;
  j["timing"] = spec.timing;
  j["max_iters"] = spec.max_iters;
  j["grad_tol"] = spec.grad_tol;
  return j;
}

}  // namespace

int cmd_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  validate_spec(spec);
  if (spec.output.empty()) throw ConfigError("experiment: --output is required");

  const bool needs_orders =
      std::find(spec.estimators.begin(), spec.estimators.end(), "oracle") != spec.estimators.end();
  const RngStream base(spec.seed);
  const int jobs = static_cast<int>(spec.n_values.size()) * spec.trials;

  std::vector<std::vector<ExperimentRow>> per_job(jobs);
  std::atomic<int> next_job{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto run_job = [&](int job) {
    const int n_index = job / spec.trials;
    const int trial = job % spec.trials;
    const int n = spec.n_values[n_index];
    const std::uint64_t dataset_seed = base.derive(static_cast<std::uint64_t>(job));

    SynthResult synth = generate_for(spec.scenario, spec.d, n, spec.kappa, spec.block_sizes,
                                     spec.c, spec.bound, dataset_seed, needs_orders);
    FitOptions opts;
    opts.bound = spec.bound;
    opts.max_iters = spec.max_iters;
    opts.grad_tol = spec.grad_tol;
    opts.workers = 1;

    auto push_row = [&](const std::string& estimator, int M, const FitResult& res) {
      const double mse = (res.theta_hat.values - synth.theta_star.values).squaredNorm();
      if (!std::isfinite(mse)) throw NumericError("experiment: non-finite squared error");
      ExperimentRow row;
      row.estimator = estimator;
      row.M = M;
      row.n = n;
      row.trial = trial;
      row.mse = mse;
      row.mse_per_d2 = mse / (static_cast<double>(spec.d) * spec.d);
      row.seconds = spec.timing == "wall" ? res.seconds : 0.0;
      row.permutation_terms = res.permutation_terms_evaluated;
      per_job[job].push_back(std::move(row));
    };

    for (const auto& estimator : spec.estimators) {
      if (estimator == "grb") {
        for (int M : spec.M_values) {
          Dataset data = synth.dataset;
          data.M = M;
          push_row("grb", M, fit_order_M(data, opts));
        }
      } else if (estimator == "prb") {
        push_row("prb", 0, pairwise_rb_inconsistent(synth.dataset, opts));
      } else if (estimator == "oracle") {
        push_row("oracle", 0, oracle_mle(synth.dataset, synth.orders, opts));
      } else {
        push_row("full_mle", 0, full_mle_small(synth.dataset, opts));
      }
    }
  };

  auto worker_loop = [&]() {
    while (!failed.load()) {
      const int job = next_job.fetch_add(1);
      if (job >= jobs) return;
      try {
        run_job(job);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty()) failure = e.what();
        return;
      }
    }
  };

  const int workers = std::min(spec.workers, jobs);
  if (workers <= 1) {
    for (int job = 0; job < jobs && !failed.load(); ++job) {
      try {
        run_job(job);
      } catch (const std::exception& e) {
        failed.store(true);
        failure = e.what();
      }
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker_loop);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw NumericError("experiment failed: " + failure);

  std::vector<ExperimentRow> rows;
  for (auto& job_rows : per_job) {
    for (auto& row : job_rows) rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());

  std::string csv;
  csv += "# schema: rb-experiment-v1\n";
  csv += "# config: " + spec_json(spec).dump() + "\n";
  csv += "estimator,M,n,trial,mse,mse_per_d2,seconds,permutation_terms\n";
  for (const auto& row : rows) {
    csv += row.estimator;
    csv += ',' + std::to_string(row.M);
    csv += ',' + std::to_string(row.n);
    csv += ',' + std::to_string(row.trial);
    csv += ',' + fmt("%.12e", row.mse);
    csv += ',' + fmt("%.12e", row.mse_per_d2);
    csv += ',' + fmt("%.9f", row.seconds);
    csv += ',' + std::to_string(row.permutation_terms);
    csv += '\n';
  }
  write_text_file(spec.output, csv);
  out << "wrote " << spec.output << ": " << rows.size() << " rows\n";
  (void)err;
  return 0;
}

int run_guarded(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rankbreak
