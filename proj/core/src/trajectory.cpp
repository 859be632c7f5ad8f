#include "mpe/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace mpe {

namespace {

bool all_finite(const std::vector<double>& xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void validate_trajectory(const Trajectory& traj) {
  const std::size_t T = traj.actions.size();
  if (T == 0) {
    throw std::invalid_argument("trajectory has no actions (T must be >= 1)");
  }
  if (traj.rewards.size() != T) {
    throw std::invalid_argument("trajectory rewards/actions length mismatch");
  }
  if (traj.covariates.size() != T + 1) {
    throw std::invalid_argument(
        "trajectory must carry exactly T+1 covariate vectors");
  }
  const std::size_t p = traj.covariates.front().size();
  if (p == 0) {
    throw std::invalid_argument("covariate dimension must be >= 1");
  }
  for (const auto& x : traj.covariates) {
    if (x.size() != p) {
      throw std::invalid_argument("ragged covariate vectors in trajectory");
    }
    if (!all_finite(x)) {
      throw std::invalid_argument("non-finite covariate entry");
    }
  }
  if (!all_finite(traj.actions) || !all_finite(traj.rewards)) {
    throw std::invalid_argument("non-finite action or reward entry");
  }
}

void validate_dataset(const Dataset& ds) {
  if (ds.horizon < 1) throw std::invalid_argument("dataset horizon must be >= 1");
  if (ds.covariate_dim < 1) {
    throw std::invalid_argument("dataset covariate_dim must be >= 1");
  }
  if (!(ds.gamma > 0.0) || ds.gamma > 1.0) {
    throw std::invalid_argument("discount gamma must lie in (0, 1]");
  }
  for (const auto& traj : ds.trajectories) {
    validate_trajectory(traj);
    if (traj.horizon() != ds.horizon || traj.covariate_dim() != ds.covariate_dim) {
      throw std::invalid_argument(
          "trajectory does not match dataset horizon/covariate_dim");
    }
  }
}

Dataset make_dataset(std::vector<Trajectory> trajectories, double gamma) {
  if (trajectories.empty()) {
    throw std::invalid_argument(
        "cannot infer horizon from an empty trajectory list; "
        "pass horizon and covariate_dim explicitly");
  }
  const int T = trajectories.front().horizon();
  const int p = trajectories.front().covariate_dim();
  return make_dataset(std::move(trajectories), gamma, T, p);
}

Dataset make_dataset(std::vector<Trajectory> trajectories, double gamma,
                     int horizon, int covariate_dim) {
  Dataset ds;
  ds.trajectories = std::move(trajectories);
  ds.horizon = horizon;
  ds.covariate_dim = covariate_dim;
  ds.gamma = gamma;
  validate_dataset(ds);
  return ds;
}

double discounted_return(const Trajectory& traj, double gamma, int t) {
  const int T = traj.horizon();
  if (t < 1 || t > T) {
    throw std::out_of_range("discounted_return: stage index out of [1, T]");
  }
  double acc = 0.0;
  for (int k = T; k >= t; --k) {
    acc = traj.rewards[static_cast<std::size_t>(k - 1)] + gamma * acc;
  }
  return acc;
}

std::vector<double> discounted_returns(const Trajectory& traj, double gamma) {
  const int T = traj.horizon();
  std::vector<double> out(static_cast<std::size_t>(T), 0.0);
  double acc = 0.0;
  for (int t = T; t >= 1; --t) {
    acc = traj.rewards[static_cast<std::size_t>(t - 1)] + gamma * acc;
    out[static_cast<std::size_t>(t - 1)] = acc;
  }
  return out;
}

FeatureSchema feature_schema_from_string(const std::string& name) {
  if (name == "benchmark") return FeatureSchema::Benchmark;
  if (name == "pricing") return FeatureSchema::Pricing;
  if (name == "tiny") return FeatureSchema::Tiny;
  throw std::invalid_argument("unknown feature schema id: " + name);
}

std::string to_string(FeatureSchema schema) {
  switch (schema) {
    case FeatureSchema::Benchmark: return "benchmark";
    case FeatureSchema::Pricing: return "pricing";
    case FeatureSchema::Tiny: return "tiny";
  }
  throw std::invalid_argument("unknown feature schema enum value");
}

int stage_feature_dim(FeatureSchema schema, int covariate_dim) {
  switch (schema) {
    case FeatureSchema::Benchmark: return covariate_dim + 3;
    case FeatureSchema::Pricing: return covariate_dim;
    case FeatureSchema::Tiny: return covariate_dim;
  }
  throw std::invalid_argument("unknown feature schema enum value");
}

std::vector<double> stage_features(const Trajectory& traj, int t,
                                   FeatureSchema schema) {
  const int T = traj.horizon();
  if (t < 1 || t > T) {
    throw std::out_of_range("stage_features: stage index out of [1, T]");
  }
  const auto& x_t = traj.covariates[static_cast<std::size_t>(t - 1)];
  switch (schema) {
    case FeatureSchema::Benchmark: {
      std::vector<double> feat;
      feat.reserve(x_t.size() + 3);
      feat.insert(feat.end(), x_t.begin(), x_t.end());
      // A_0 = R_0 = 0 sentinels at the first stage.
      feat.push_back(t > 1 ? traj.actions[static_cast<std::size_t>(t - 2)] : 0.0);
      feat.push_back(t > 1 ? traj.rewards[static_cast<std::size_t>(t - 2)] : 0.0);
      feat.push_back(static_cast<double>(t) / static_cast<double>(T));
      return feat;
    }
    case FeatureSchema::Pricing:
    case FeatureSchema::Tiny:
      return x_t;
  }
  throw std::invalid_argument("unknown feature schema enum value");
}

}  // namespace mpe
