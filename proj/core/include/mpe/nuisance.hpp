#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mpe/environments.hpp"
#include "mpe/mlp.hpp"
#include "mpe/trajectory.hpp"

namespace mpe {

// ---------------------------------------------------------------------------
// Cross-fitting folds and per-stage nuisance estimation: q-hat_t by regression
// of the discounted return on (stage features, action) and H-hat_t by the
// Riesz variational learner (or the closed-form oracle score).
// ---------------------------------------------------------------------------

struct FoldAssignment {
  int folds = 0;
  std::vector<int> fold;  // fold index per unit, sizes balanced to +-1

  std::vector<int> training_units(int k) const;
  std::vector<int> scoring_units(int k) const;
};

// Uniformly random balanced partition, deterministic in seed. Requires
// K >= 2 and n >= K.
FoldAssignment make_folds(std::int64_t n, int K, std::uint64_t seed);

// Stage evaluator over the joint input [features..., action] (action last).
using StageFn = std::function<double(std::span<const double>)>;

struct NuisanceSet {
  int folds = 0;
  int horizon = 0;
  FeatureSchema schema = FeatureSchema::Benchmark;
  bool oracle_score = false;
  // Indexed [fold][t-1]; an empty outer vector means "not fitted".
  std::vector<std::vector<StageFn>> q;
  std::vector<std::vector<StageFn>> h;

  bool has_q() const { return !q.empty(); }
  bool has_h() const { return !h.empty(); }
};

struct NuisanceConfig {
  TrainConfig q_net;
  TrainConfig h_net;
  bool oracle_score = false;
  // Learned scores are clipped to [-h_cap, h_cap]; <= 0 disables. Oracle
  // scores are never clipped.
  double h_cap = 10.0;
  std::uint64_t seed = 1;
  int workers = 1;
};

// Defaults resolved against the environment: h_cap = 10 / sigma_policy and
// riesz step = 0.05 * sigma_policy.
NuisanceConfig make_default_nuisance_config(const EnvironmentModel& env);

// Regression of Gamma_t on (features(S_t), A_t) over the given training units.
// Predictions are clipped to [-Gamma_max, Gamma_max] with
// Gamma_max = R_max * sum_{k=0}^{T-1} gamma^k.
StageFn fit_q_stage(const Dataset& ds, std::span<const int> train_units, int t,
                    const EnvironmentModel& env, const TrainConfig& cfg,
                    std::uint64_t seed);

// Riesz learner on (features(S_t), A_t); valid only for the location-shift
// direction (the loss uses the integration-by-parts form E_n[d_a h]).
// Requesting learned mode for another direction throws.
StageFn fit_h_stage(const Dataset& ds, std::span<const int> train_units, int t,
                    const EnvironmentModel& env, const TrainConfig& cfg,
                    double h_cap, std::uint64_t seed);

// Closed-form oracle score from the environment's baseline policy/direction.
StageFn oracle_score_fn(const EnvironmentModel& env);

// Full cross-fitted nuisance set: for each fold k, evaluators trained on the
// units outside fold k. Fold-by-stage jobs run on cfg.workers threads.
NuisanceSet fit_nuisances(const Dataset& ds, const FoldAssignment& folds,
                          const EnvironmentModel& env,
                          const NuisanceConfig& cfg);

// Discount cap used for q-hat clipping.
double gamma_max_bound(double reward_bound, double gamma, int horizon);

}  // namespace mpe
