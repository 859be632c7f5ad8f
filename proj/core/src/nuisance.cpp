#include "mpe/nuisance.hpp"

#include <cmath>
#include <iostream>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "mpe/math_util.hpp"
#include "mpe/parallel.hpp"
#include "mpe/rng.hpp"

namespace mpe {

namespace {

constexpr std::uint64_t kFoldPurpose = 31;
constexpr std::uint64_t kQSeedPurpose = 32;
constexpr std::uint64_t kHSeedPurpose = 33;

// Assembles (features, action) rows and Gamma_t targets for one stage.
void stage_training_data(const Dataset& ds, std::span<const int> units, int t,
                         FeatureSchema schema, Eigen::MatrixXd& X,
                         Eigen::VectorXd& y) {
  const int feat_dim = stage_feature_dim(schema, ds.covariate_dim);
  X.resize(static_cast<int>(units.size()), feat_dim + 1);
  y.resize(static_cast<int>(units.size()));
  for (std::size_t r = 0; r < units.size(); ++r) {
    const auto& traj = ds.trajectories[static_cast<std::size_t>(units[r])];
    const auto feat = stage_features(traj, t, schema);
    for (int j = 0; j < feat_dim; ++j) {
      X(static_cast<int>(r), j) = feat[static_cast<std::size_t>(j)];
    }
    X(static_cast<int>(r), feat_dim) = traj.actions[static_cast<std::size_t>(t - 1)];
    y(static_cast<int>(r)) = discounted_return(traj, ds.gamma, t);
  }
}

bool rows_all_identical(const Eigen::MatrixXd& X) {
  for (int r = 1; r < X.rows(); ++r) {
    if (X.row(r) != X.row(0)) return false;
  }
  return true;
}

}  // namespace

std::vector<int> FoldAssignment::training_units(int k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != k) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldAssignment::scoring_units(int k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == k) out.push_back(static_cast<int>(i));
  }
  return out;
}

FoldAssignment make_folds(std::int64_t n, int K, std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("make_folds: K must be >= 2");
  if (n < K) throw std::invalid_argument("make_folds: need n >= K");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  KeyedStream rng(seed, 0, 0, kFoldPurpose);
  for (std::int64_t i = n - 1; i > 0; --i) {
    const std::int64_t j = static_cast<std::int64_t>(
        rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }
  FoldAssignment fa;
  fa.folds = K;
  fa.fold.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    fa.fold[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % K);
  }
  return fa;
}

double gamma_max_bound(double reward_bound, double gamma, int horizon) {
  double geom = 0.0;
  double g = 1.0;
  for (int k = 0; k < horizon; ++k) {
    geom += g;
    g *= gamma;
  }
  return reward_bound * geom;
}

NuisanceConfig make_default_nuisance_config(const EnvironmentModel& env) {
  NuisanceConfig cfg;
  cfg.h_cap = 10.0 / env.sigma_policy;
  cfg.h_net.fd_step_riesz = 0.05 * env.sigma_policy;
  return cfg;
}

StageFn fit_q_stage(const Dataset& ds, std::span<const int> train_units, int t,
                    const EnvironmentModel& env, const TrainConfig& cfg,
                    std::uint64_t seed) {
  if (train_units.empty()) {
    throw std::invalid_argument("fit_q_stage: empty training set");
  }
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  stage_training_data(ds, train_units, t, env.schema, X, y);
  const double cap = gamma_max_bound(env.reward_bound, ds.gamma, ds.horizon);

  if (rows_all_identical(X)) {
    std::cerr << "fit_q_stage: degenerate training inputs at stage " << t
              << "; falling back to a constant fit\n";
    const double c = clip(y.mean(), -cap, cap);
    return [c](std::span<const double>) { return c; };
  }

  Mlp net(static_cast<int>(X.cols()), cfg.hidden, mix64(seed, kQSeedPurpose));
  net = train_regression(std::move(net), X, y, cfg);
  auto shared = std::make_shared<Mlp>(std::move(net));
  return [shared, cap](std::span<const double> x) {
    return clip(shared->forward(x), -cap, cap);
  };
}

StageFn oracle_score_fn(const EnvironmentModel& env) {
  const DirectionModel dir = env.direction;
  return [dir](std::span<const double> x) {
    const std::span<const double> features = x.first(x.size() - 1);
    return direction_score(dir, features, x.back());
  };
}

StageFn fit_h_stage(const Dataset& ds, std::span<const int> train_units, int t,
                    const EnvironmentModel& env, const TrainConfig& cfg,
                    double h_cap, std::uint64_t seed) {
  if (train_units.empty()) {
    throw std::invalid_argument("fit_h_stage: empty training set");
  }
  if (env.direction.kind != DirectionKind::LocationShift) {
    throw std::invalid_argument(
        "fit_h_stage: learned scores require the location-shift direction "
        "(no integration-by-parts reduction otherwise)");
  }
  Eigen::MatrixXd X;
  Eigen::VectorXd y_unused;
  stage_training_data(ds, train_units, t, env.schema, X, y_unused);
  const int action_index = static_cast<int>(X.cols()) - 1;

  Mlp net(static_cast<int>(X.cols()), cfg.hidden, mix64(seed, kHSeedPurpose));
  net = train_riesz(std::move(net), X, action_index, cfg);
  auto shared = std::make_shared<Mlp>(std::move(net));

  if (h_cap > 0.0) {
    int clipped = 0;
    for (int r = 0; r < X.rows(); ++r) {
      Eigen::VectorXd row = X.row(r);
      const double v =
          shared->forward(std::span<const double>(row.data(),
                                                  static_cast<std::size_t>(row.size())));
      if (std::abs(v) > h_cap) ++clipped;
    }
    if (clipped > 0) {
      std::cerr << "fit_h_stage: score cap " << h_cap << " active on "
                << clipped << "/" << X.rows() << " training points at stage "
                << t << "\n";
    }
    return [shared, h_cap](std::span<const double> x) {
      return clip(shared->forward(x), -h_cap, h_cap);
    };
  }
  return [shared](std::span<const double> x) { return shared->forward(x); };
}

NuisanceSet fit_nuisances(const Dataset& ds, const FoldAssignment& folds,
                          const EnvironmentModel& env,
                          const NuisanceConfig& cfg) {
  if (folds.fold.size() != ds.trajectories.size()) {
    throw std::invalid_argument("fit_nuisances: fold assignment size mismatch");
  }
  NuisanceSet out;
  out.folds = folds.folds;
  out.horizon = ds.horizon;
  out.schema = env.schema;
  out.oracle_score = cfg.oracle_score;
  out.q.assign(static_cast<std::size_t>(folds.folds),
               std::vector<StageFn>(static_cast<std::size_t>(ds.horizon)));
  out.h.assign(static_cast<std::size_t>(folds.folds),
               std::vector<StageFn>(static_cast<std::size_t>(ds.horizon)));

  std::vector<std::vector<int>> train_sets(
      static_cast<std::size_t>(folds.folds));
  for (int k = 0; k < folds.folds; ++k) {
    train_sets[static_cast<std::size_t>(k)] = folds.training_units(k);
  }

  const StageFn oracle =
      cfg.oracle_score ? oracle_score_fn(env) : StageFn{};

  const std::int64_t jobs =
      static_cast<std::int64_t>(folds.folds) * ds.horizon;
  parallel_for(jobs, cfg.workers, [&](std::int64_t job) {
    const int k = static_cast<int>(job / ds.horizon);
    const int t = static_cast<int>(job % ds.horizon) + 1;
    const auto& train = train_sets[static_cast<std::size_t>(k)];
    const std::uint64_t job_seed =
        mix64(mix64(cfg.seed, static_cast<std::uint64_t>(k)),
              static_cast<std::uint64_t>(t));
    out.q[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 1)] =
        fit_q_stage(ds, train, t, env, cfg.q_net, job_seed);
    out.h[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 1)] =
        cfg.oracle_score
            ? oracle
            : fit_h_stage(ds, train, t, env, cfg.h_net, cfg.h_cap,
                          mix64(job_seed, 1));
  });
  return out;
}

}  // namespace mpe
