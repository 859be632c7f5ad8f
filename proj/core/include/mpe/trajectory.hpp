#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mpe {

// ---------------------------------------------------------------------------
// Trajectory / Dataset — one unit's observed path and a homogeneous panel of
// them. Stage indices are 1-based throughout the public API (t = 1..T), so
// covariates[t-1] is X_t, actions[t-1] is A_t, rewards[t-1] is R_t. The
// terminal covariate X_{T+1} is stored for fidelity but nothing consumes it.
// Both types are immutable after construction by convention; validation is
// explicit.
// ---------------------------------------------------------------------------

struct Trajectory {
  std::int64_t unit_id = 0;
  std::vector<std::vector<double>> covariates;  // X_1 .. X_{T+1}
  std::vector<double> actions;                  // A_1 .. A_T
  std::vector<double> rewards;                  // R_1 .. R_T

  int horizon() const { return static_cast<int>(actions.size()); }
  int covariate_dim() const {
    return covariates.empty() ? 0 : static_cast<int>(covariates.front().size());
  }
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  int horizon = 0;         // T >= 1
  int covariate_dim = 0;   // p >= 1
  double gamma = 1.0;      // discount, in (0, 1]

  std::int64_t size() const {
    return static_cast<std::int64_t>(trajectories.size());
  }
};

// Throws std::invalid_argument on shape violations or non-finite entries.
void validate_trajectory(const Trajectory& traj);
void validate_dataset(const Dataset& ds);

// Builds a dataset from trajectories, inferring (T, p) and validating that
// every trajectory matches. An empty trajectory list requires explicit
// horizon/dim via the second overload.
Dataset make_dataset(std::vector<Trajectory> trajectories, double gamma);
Dataset make_dataset(std::vector<Trajectory> trajectories, double gamma,
                     int horizon, int covariate_dim);

// Discounted cumulative reward from stage t onward:
//   sum_{k=t}^{T} gamma^{k-t} R_k.
// Throws std::out_of_range unless 1 <= t <= T.
double discounted_return(const Trajectory& traj, double gamma, int t);

// All stage returns at once via the backward recursion G_t = R_t + gamma*G_{t+1}.
std::vector<double> discounted_returns(const Trajectory& traj, double gamma);

// ---------------------------------------------------------------------------
// Stage featurization. Learners see a fixed-width summary of the history S_t,
// a deterministic function of (X_1..X_t, A_1..A_{t-1}, R_1..R_{t-1}) only.
// ---------------------------------------------------------------------------

enum class FeatureSchema {
  // (X_t, A_{t-1}, R_{t-1}, t/T) with A_0 = R_0 = 0; dimension p + 3.
  Benchmark,
  // X_t verbatim (the pricing covariate is already a history summary).
  Pricing,
  // X_t verbatim (scalar tabular state).
  Tiny,
};

FeatureSchema feature_schema_from_string(const std::string& name);
std::string to_string(FeatureSchema schema);

int stage_feature_dim(FeatureSchema schema, int covariate_dim);

std::vector<double> stage_features(const Trajectory& traj, int t,
                                   FeatureSchema schema);

}  // namespace mpe
