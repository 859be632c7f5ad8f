#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpe/environments.hpp"
#include "mpe/ground_truth.hpp"
#include "mpe/mlp.hpp"

namespace mpe {

// ---------------------------------------------------------------------------
// Monte Carlo experiment harness: per configuration and estimator, empirical
// bias, RMSE, and 95% Wald coverage against the environment's ground truth.
// ---------------------------------------------------------------------------

struct MCSummary {
  std::string environment;
  std::int64_t n = 0;
  int p = 0;
  int T = 0;
  std::string estimator;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double mean_se = 0.0;
  double theta_true = 0.0;
  int replications = 0;  // successful replications backing the row
  int failed = 0;        // aborted replications, excluded and counted
};

struct BenchGridPoint {
  std::int64_t n = 5000;
  int p = 5;
  int T = 2;
};

struct BenchConfig {
  std::string environment = "benchmark";  // benchmark | pricing | tiny

  // Benchmark environment: one case per grid point over (n, p, T).
  std::vector<BenchGridPoint> grid = {{5000, 5, 2}};
  BenchmarkConfig benchmark_base;

  // Pricing environment: a single case.
  PricingConfig pricing;

  // Tiny MDP: a single case with oracle (closed-form) nuisances.
  TinyMDPSpec tiny;
  std::int64_t tiny_n = 5000;

  int replications = 20;
  // Any of: direct, srw, asrw, asrw_oracle.
  std::vector<std::string> estimators = {"direct", "srw", "asrw", "asrw_oracle"};
  int folds = 5;
  std::uint64_t seed = 1;
  TruthSpec truth;

  TrainConfig q_net;
  TrainConfig h_net;
  // Resolved per environment: cap = h_cap_multiplier / sigma_policy and
  // riesz step = riesz_step_multiplier * sigma_policy.
  double h_cap_multiplier = 10.0;
  double riesz_step_multiplier = 0.05;

  std::string outdir = "out";
  int workers = 0;  // 0 = MPE_LAB_WORKERS or hardware concurrency
};

void validate(const BenchConfig& cfg);

// Runs every case x replication, cross-fitting nuisances and computing the
// requested estimators; aborted replications are excluded and counted.
// Deterministic in the config (including under parallel execution).
std::vector<MCSummary> run_benchmark(const BenchConfig& cfg);

// bias / RMSE / coverage / mean se for one (config, estimator) cell.
MCSummary summarize(std::span<const double> estimates,
                    std::span<const double> ses, double theta_true);

// Writes summary.csv (columns env,n,p,T,estimator,bias,rmse,coverage,
// theta_true,R) and rmse_scatter.svg (comparator RMSE against ASRW RMSE with
// a 45-degree line) into outdir.
void emit_report(const std::vector<MCSummary>& summaries,
                 const std::string& outdir);

std::vector<MCSummary> read_summary_csv(const std::string& path);

}  // namespace mpe
