#include "mpe/ground_truth.hpp"

#include <cmath>
#include <stdexcept>

#include "mpe/trajectory.hpp"

namespace mpe {

namespace {

// d/deps of the tilted propensity factor for action a at state x, at eps = 0.
double propensity_factor_derivative(const TinyMDPSpec& spec, int x, int a) {
  const double p = spec.pi1[static_cast<std::size_t>(x)];
  const double d = spec.direction == TinyTilt::OddsTilt ? p * (1.0 - p) : 1.0;
  return a == 1 ? d : -d;
}

double direction_weight(const TinyMDPSpec& spec, int x) {
  const double p = spec.pi1[static_cast<std::size_t>(x)];
  return spec.direction == TinyTilt::OddsTilt ? p * (1.0 - p) : 1.0;
}

double tiny_score(const TinyMDPSpec& spec, int x, int a) {
  const double p = spec.pi1[static_cast<std::size_t>(x)];
  if (spec.direction == TinyTilt::OddsTilt) {
    return a == 1 ? 1.0 - p : -p;
  }
  return a == 1 ? 1.0 / p : -1.0 / (1.0 - p);
}

template <typename ConfigVisitor>
EnvConfig with_mc_settings(const EnvConfig& env, std::int64_t n,
                           std::uint64_t seed, ConfigVisitor&&) {
  EnvConfig out = env;
  std::visit(
      [n, seed](auto& cfg) {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, BenchmarkConfig> ||
                      std::is_same_v<T, PricingConfig>) {
          cfg.n = n;
          cfg.seed = seed;
        } else {
          cfg.n = n;
          cfg.seed = seed;
        }
      },
      out);
  return out;
}

}  // namespace

void validate(const TruthSpec& spec) {
  if (!(spec.epsilon_fd > 0.0)) {
    throw std::invalid_argument("truth spec: epsilon_fd must be positive");
  }
  if (spec.mc_trajectories < 10000) {
    throw std::invalid_argument("truth spec: need at least 1e4 trajectories");
  }
}

TruthEstimate crn_truth(const EnvConfig& env, const TruthSpec& spec) {
  validate(spec);
  const EnvConfig cfg =
      with_mc_settings(env, spec.mc_trajectories, spec.seed, 0);
  const Dataset plus = simulate(cfg, EpsilonShift{spec.epsilon_fd});
  const Dataset minus = simulate(cfg, EpsilonShift{-spec.epsilon_fd});

  const std::int64_t n = plus.size();
  double mean = 0.0;
  std::vector<double> diffs(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double gp =
        discounted_return(plus.trajectories[static_cast<std::size_t>(i)],
                          plus.gamma, 1);
    const double gm =
        discounted_return(minus.trajectories[static_cast<std::size_t>(i)],
                          minus.gamma, 1);
    diffs[static_cast<std::size_t>(i)] = (gp - gm) / (2.0 * spec.epsilon_fd);
    mean += diffs[static_cast<std::size_t>(i)];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double se =
      std::sqrt(ss / (static_cast<double>(n) - 1.0)) /
      std::sqrt(static_cast<double>(n));

  TruthEstimate out;
  out.theta = mean;
  out.mc_se = se;
  out.epsilon = spec.epsilon_fd;
  out.trajectories = n;
  return out;
}

double exact_theta_tiny(const TinyMDPSpec& spec) {
  validate(spec);
  double theta = 0.0;
  for (int x1 = 0; x1 < 2; ++x1) {
    const double px1 = x1 == 1 ? spec.p_x1 : 1.0 - spec.p_x1;
    const double p1 = spec.pi1[static_cast<std::size_t>(x1)];
    for (int a1 = 0; a1 < 2; ++a1) {
      const double f1 = a1 == 1 ? p1 : 1.0 - p1;
      const double df1 = propensity_factor_derivative(spec, x1, a1);
      const double trans1 = spec.trans[static_cast<std::size_t>(x1)]
                                      [static_cast<std::size_t>(a1)];
      for (int x2 = 0; x2 < 2; ++x2) {
        const double px2 = x2 == 1 ? trans1 : 1.0 - trans1;
        const double p2 = spec.pi1[static_cast<std::size_t>(x2)];
        for (int a2 = 0; a2 < 2; ++a2) {
          const double f2 = a2 == 1 ? p2 : 1.0 - p2;
          const double df2 = propensity_factor_derivative(spec, x2, a2);
          const double payoff =
              spec.reward1[static_cast<std::size_t>(x1)]
                          [static_cast<std::size_t>(a1)] +
              spec.gamma * spec.reward2[static_cast<std::size_t>(x2)]
                                       [static_cast<std::size_t>(a2)];
          const double dprob = px1 * px2 * (df1 * f2 + f1 * df2);
          theta += dprob * payoff;
        }
      }
    }
  }
  return theta;
}

TinyTables tiny_tables(const TinyMDPSpec& spec) {
  validate(spec);
  TinyTables tab{};
  for (int x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) {
      tab.q2[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)] =
          spec.reward2[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
    }
    const double p = spec.pi1[static_cast<std::size_t>(x)];
    tab.v2[static_cast<std::size_t>(x)] =
        p * tab.q2[static_cast<std::size_t>(x)][1] +
        (1.0 - p) * tab.q2[static_cast<std::size_t>(x)][0];
  }
  for (int x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) {
      const double pr_up =
          spec.trans[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
      tab.q1[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)] =
          spec.reward1[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)] +
          spec.gamma * (pr_up * tab.v2[1] + (1.0 - pr_up) * tab.v2[0]);
    }
  }
  tab.marginal1 = {1.0 - spec.p_x1, spec.p_x1};
  tab.marginal2 = {0.0, 0.0};
  for (int x1 = 0; x1 < 2; ++x1) {
    const double p = spec.pi1[static_cast<std::size_t>(x1)];
    for (int a1 = 0; a1 < 2; ++a1) {
      const double pa = a1 == 1 ? p : 1.0 - p;
      const double pr_up =
          spec.trans[static_cast<std::size_t>(x1)][static_cast<std::size_t>(a1)];
      tab.marginal2[1] +=
          tab.marginal1[static_cast<std::size_t>(x1)] * pa * pr_up;
      tab.marginal2[0] +=
          tab.marginal1[static_cast<std::size_t>(x1)] * pa * (1.0 - pr_up);
    }
  }
  return tab;
}

double gpgt_theta_tiny(const TinyMDPSpec& spec) {
  const TinyTables tab = tiny_tables(spec);
  double theta = 0.0;
  for (int x = 0; x < 2; ++x) {
    theta += tab.marginal1[static_cast<std::size_t>(x)] *
             direction_weight(spec, x) *
             (tab.q1[static_cast<std::size_t>(x)][1] -
              tab.q1[static_cast<std::size_t>(x)][0]);
  }
  for (int x = 0; x < 2; ++x) {
    theta += spec.gamma * tab.marginal2[static_cast<std::size_t>(x)] *
             direction_weight(spec, x) *
             (tab.q2[static_cast<std::size_t>(x)][1] -
              tab.q2[static_cast<std::size_t>(x)][0]);
  }
  return theta;
}

double score_form_theta_tiny(const TinyMDPSpec& spec) {
  const TinyTables tab = tiny_tables(spec);
  double theta = 0.0;
  const std::array<const std::array<std::array<double, 2>, 2>*, 2> q = {
      &tab.q1, &tab.q2};
  const std::array<const std::array<double, 2>*, 2> marginals = {
      &tab.marginal1, &tab.marginal2};
  double discount = 1.0;
  for (int t = 0; t < 2; ++t) {
    for (int x = 0; x < 2; ++x) {
      const double p = spec.pi1[static_cast<std::size_t>(x)];
      for (int a = 0; a < 2; ++a) {
        const double pa = a == 1 ? p : 1.0 - p;
        theta += discount * (*marginals[static_cast<std::size_t>(t)])
                     [static_cast<std::size_t>(x)] *
                 pa * tiny_score(spec, x, a) *
                 (*q[static_cast<std::size_t>(t)])[static_cast<std::size_t>(x)]
                                                  [static_cast<std::size_t>(a)];
      }
    }
    discount *= spec.gamma;
  }
  return theta;
}

NuisanceSet make_tiny_oracle_nuisances(const TinyMDPSpec& spec, int folds) {
  if (folds < 1) {
    throw std::invalid_argument("make_tiny_oracle_nuisances: folds must be >= 1");
  }
  const TinyTables tab = tiny_tables(spec);

  auto q_stage = [](const std::array<std::array<double, 2>, 2> table) {
    return StageFn([table](std::span<const double> x) {
      const int state = x[0] > 0.5 ? 1 : 0;
      const int action = x[x.size() - 1] > 0.5 ? 1 : 0;
      return table[static_cast<std::size_t>(state)]
                  [static_cast<std::size_t>(action)];
    });
  };
  StageFn h_fn = [spec](std::span<const double> x) {
    const int state = x[0] > 0.5 ? 1 : 0;
    const int action = x[x.size() - 1] > 0.5 ? 1 : 0;
    return tiny_score(spec, state, action);
  };

  NuisanceSet out;
  out.folds = folds;
  out.horizon = 2;
  out.schema = FeatureSchema::Tiny;
  out.oracle_score = true;
  out.q.assign(static_cast<std::size_t>(folds), {q_stage(tab.q1), q_stage(tab.q2)});
  out.h.assign(static_cast<std::size_t>(folds), {h_fn, h_fn});
  return out;
}

}  // namespace mpe
