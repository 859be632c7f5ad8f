#include "mpe/environments.hpp"

#include <cmath>
#include <stdexcept>

#include "mpe/math_util.hpp"
#include "mpe/rng.hpp"

namespace mpe {

namespace {

// Noise purposes. Streams are keyed (seed, unit, stage, purpose); stage 0 is
// reserved for initialization draws.
enum Purpose : std::uint64_t {
  kLatentInit = 1,
  kCovInit = 2,
  kAction = 3,
  kReward = 4,
  kLatentTrans = 5,
  kCovNoise = 6,
  kWDraw = 7,
  kAlphaDraw = 8,
  kRefInit = 9,
  kTasteInit = 10,
  kDemand = 11,
  kRefTrans = 12,
  kTasteTrans = 13,
  kState = 14,
};

std::uint64_t salted(std::uint64_t seed, std::uint64_t salt) {
  return salt == 0 ? seed : mix64(seed, salt);
}

}  // namespace

// ---- benchmark --------------------------------------------------------------

void validate(const BenchmarkConfig& cfg) {
  if (cfg.n < 1 || cfg.p < 1 || cfg.T < 1) {
    throw std::invalid_argument("benchmark config requires n, p, T >= 1");
  }
  if (!(cfg.sigma_a > 0.0)) {
    throw std::invalid_argument("benchmark config requires sigma_a > 0");
  }
  if (!(cfg.gamma > 0.0) || cfg.gamma > 1.0) {
    throw std::invalid_argument("benchmark config requires gamma in (0,1]");
  }
}

std::vector<double> benchmark_loading_vector(int p) {
  if (p < 1) throw std::invalid_argument("loading vector requires p >= 1");
  double norm = 0.0;
  for (int k = 1; k <= p; ++k) norm += 1.0 / static_cast<double>(k);
  norm = std::sqrt(norm);
  std::vector<double> l(static_cast<std::size_t>(p));
  for (int j = 1; j <= p; ++j) {
    l[static_cast<std::size_t>(j - 1)] =
        1.0 / (std::sqrt(static_cast<double>(j)) * norm);
  }
  return l;
}

double benchmark_action_mean(double xbar, double a_prev) {
  return 0.10 + 0.35 * xbar + 0.15 * a_prev;
}

double benchmark_policy_mean_from_features(std::span<const double> features,
                                           int p) {
  double xbar = 0.0;
  for (int j = 0; j < p; ++j) xbar += features[static_cast<std::size_t>(j)];
  xbar /= static_cast<double>(p);
  return benchmark_action_mean(xbar, features[static_cast<std::size_t>(p)]);
}

Dataset simulate_benchmark(const BenchmarkConfig& cfg, EpsilonShift shift) {
  return simulate_benchmark_debug(cfg, shift, nullptr, 0);
}

Dataset simulate_benchmark_debug(const BenchmarkConfig& cfg, EpsilonShift shift,
                                 BenchmarkDebug* debug,
                                 std::uint64_t latent_salt) {
  validate(cfg);
  const std::uint64_t latent_seed = salted(cfg.seed, latent_salt);
  const auto l = benchmark_loading_vector(cfg.p);
  const std::size_t p = static_cast<std::size_t>(cfg.p);

  if (debug) {
    debug->latent_regime.assign(static_cast<std::size_t>(cfg.n), {});
    debug->action_noise.assign(static_cast<std::size_t>(cfg.n), {});
  }

  std::vector<Trajectory> trajs(static_cast<std::size_t>(cfg.n));
  for (std::int64_t i = 0; i < cfg.n; ++i) {
    Trajectory traj;
    traj.unit_id = i;
    traj.covariates.resize(static_cast<std::size_t>(cfg.T + 1));
    traj.actions.resize(static_cast<std::size_t>(cfg.T));
    traj.rewards.resize(static_cast<std::size_t>(cfg.T));

    const std::uint64_t u = static_cast<std::uint64_t>(i);
    double regime = KeyedStream(latent_seed, u, 0, kLatentInit).pm1();

    KeyedStream init(cfg.seed, u, 0, kCovInit);
    auto& x1 = traj.covariates[0];
    x1.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      x1[j] = 0.75 * regime * l[j] + 0.60 * init.normal();
    }

    double a_prev = 0.0;  // A_0 = 0
    for (int t = 1; t <= cfg.T; ++t) {
      const std::size_t ti = static_cast<std::size_t>(t - 1);
      const auto& x_t = traj.covariates[ti];
      double xbar = 0.0;
      for (double v : x_t) xbar += v;
      xbar /= static_cast<double>(cfg.p);

      const double z =
          KeyedStream(cfg.seed, u, static_cast<std::uint64_t>(t), kAction)
              .normal();
      const double a = benchmark_action_mean(xbar, a_prev) + shift.epsilon +
                       cfg.sigma_a * z;
      traj.actions[ti] = a;
      if (debug) {
        debug->latent_regime[static_cast<std::size_t>(i)].push_back(regime);
        debug->action_noise[static_cast<std::size_t>(i)].push_back(z);
      }

      const double xi =
          KeyedStream(cfg.seed, u, static_cast<std::uint64_t>(t), kReward)
              .normal();
      traj.rewards[ti] = clip(
          1.0 + xbar + 1.25 * a + 0.75 * regime + 0.50 * a * regime + xi,
          -10.0, 10.0);

      // Observed covariates advance using the current regime; the regime
      // itself then transitions.
      auto& x_next = traj.covariates[ti + 1];
      x_next.resize(p);
      KeyedStream cov(cfg.seed, u, static_cast<std::uint64_t>(t), kCovNoise);
      for (std::size_t j = 0; j < p; ++j) {
        x_next[j] = 0.65 * x_t[j] + 0.20 * a + 0.85 * regime * l[j] +
                    cov.normal();
      }

      if (t < cfg.T) {
        const double pr_up = sigmoid(regime + 0.80 * xbar);
        regime = KeyedStream(latent_seed, u, static_cast<std::uint64_t>(t),
                             kLatentTrans)
                         .bernoulli(pr_up)
                     ? 1.0
                     : -1.0;
      }
      a_prev = a;
    }
    trajs[static_cast<std::size_t>(i)] = std::move(traj);
  }
  return make_dataset(std::move(trajs), cfg.gamma, cfg.T, cfg.p);
}

// ---- pricing -----------------------------------------------------------------

void validate(const PricingConfig& cfg) {
  if (cfg.n < 1 || cfg.T < 1) {
    throw std::invalid_argument("pricing config requires n, T >= 1");
  }
  if (!(cfg.p_min < cfg.p_max)) {
    throw std::invalid_argument("pricing config requires p_min < p_max");
  }
  if (!(cfg.alpha_min < cfg.alpha_max)) {
    throw std::invalid_argument("pricing config requires alpha_min < alpha_max");
  }
  if (!(cfg.sigma_price > 0.0)) {
    throw std::invalid_argument("pricing config requires sigma_price > 0");
  }
  if (!(cfg.margin < 0.5 * (cfg.p_max - cfg.p_min))) {
    throw std::invalid_argument(
        "pricing config requires margin < (p_max - p_min) / 2");
  }
  if (!(cfg.gamma > 0.0) || cfg.gamma > 1.0) {
    throw std::invalid_argument("pricing config requires gamma in (0,1]");
  }
}

double pricing_policy_mean(const PricingConfig& cfg,
                           std::span<const double> features) {
  const double p_last = features[0];
  const double p_bar = features[1];
  const double r_last = features[2];
  const double r_bar = features[3];
  const double sin_t = features[4];
  const double cos_t = features[5];

  const double rt_last = std::tanh((r_last - cfg.mu_r) / cfg.s_r);
  const double rt_bar = std::tanh((r_bar - cfg.mu_r) / cfg.s_r);
  const double gap = std::tanh((p_last - p_bar) / 2.0);

  const double mu = cfg.c[0] + cfg.c[1] * p_last + cfg.c[2] * p_bar +
                    cfg.c[3] * rt_last + cfg.c[4] * rt_bar + cfg.c[5] * gap +
                    cfg.c[6] * sin_t + cfg.c[7] * cos_t;
  return clip(mu, cfg.p_min + cfg.margin, cfg.p_max - cfg.margin);
}

double pricing_demand_index(const PricingConfig& cfg, double angle,
                            double action, double w, double alpha,
                            double r_star, double u) {
  const double taste = cfg.beta_0 + w + u;
  const double season =
      cfg.beta_season * (0.9 * std::sin(angle) - 0.5 * std::cos(angle));
  const double beta_p_i = cfg.beta_p * std::exp(-0.22 * w);
  const double direct = beta_p_i * action;
  const double alpha_bar = 0.5 * (cfg.alpha_min + cfg.alpha_max);
  const double beta_r_i =
      cfg.beta_r *
      (1.0 + 1.6 * (alpha - alpha_bar) / (cfg.alpha_max - cfg.alpha_min));
  const double gap = r_star - action;
  const double ref = beta_r_i * gap - cfg.beta_gap2 * gap * gap +
                     cfg.beta_nl * std::sin(action - r_star);
  return taste + season + direct + ref;
}

Dataset simulate_pricing(const PricingConfig& cfg, EpsilonShift shift) {
  return simulate_pricing_debug(cfg, shift, nullptr, 0);
}

Dataset simulate_pricing_debug(const PricingConfig& cfg, EpsilonShift shift,
                               PricingDebug* debug, std::uint64_t latent_salt) {
  validate(cfg);
  const std::uint64_t latent_seed = salted(cfg.seed, latent_salt);

  if (debug) {
    debug->w.assign(static_cast<std::size_t>(cfg.n), 0.0);
    debug->alpha.assign(static_cast<std::size_t>(cfg.n), 0.0);
    debug->r_star.assign(static_cast<std::size_t>(cfg.n), {});
    debug->action_noise.assign(static_cast<std::size_t>(cfg.n), {});
  }

  std::vector<Trajectory> trajs(static_cast<std::size_t>(cfg.n));
  for (std::int64_t i = 0; i < cfg.n; ++i) {
    Trajectory traj;
    traj.unit_id = i;
    traj.covariates.resize(static_cast<std::size_t>(cfg.T + 1));
    traj.actions.resize(static_cast<std::size_t>(cfg.T));
    traj.rewards.resize(static_cast<std::size_t>(cfg.T));

    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const double w =
        cfg.sigma_w * KeyedStream(latent_seed, u, 0, kWDraw).normal();
    const double alpha =
        cfg.alpha_min +
        (cfg.alpha_max - cfg.alpha_min) *
            sigmoid(cfg.c_alpha *
                    KeyedStream(latent_seed, u, 0, kAlphaDraw).normal());

    KeyedStream ref_init(latent_seed, u, 0, kRefInit);
    const double xi0 = ref_init.normal();
    const double zeta0 = ref_init.normal();
    double r_star = clip(
        cfg.r0 + cfg.sigma_r0 * xi0 + cfg.rho_w * w + cfg.sigma_init * zeta0,
        cfg.p_min, cfg.p_max);
    double taste =
        0.35 * w + 0.25 * KeyedStream(latent_seed, u, 0, kTasteInit).normal();

    double p_last = cfg.r0;
    double p_bar = cfg.r0;
    double r_last = 0.0;
    double r_bar = 0.0;

    if (debug) {
      debug->w[static_cast<std::size_t>(i)] = w;
      debug->alpha[static_cast<std::size_t>(i)] = alpha;
    }

    for (int t = 1; t <= cfg.T; ++t) {
      const std::size_t ti = static_cast<std::size_t>(t - 1);
      const double angle = 2.0 * kPi * static_cast<double>(t) /
                           static_cast<double>(cfg.T);
      traj.covariates[ti] = {p_last,  p_bar,          r_last,
                             r_bar,   std::sin(angle), std::cos(angle)};

      const double mu = pricing_policy_mean(cfg, traj.covariates[ti]);
      const double z =
          KeyedStream(cfg.seed, u, static_cast<std::uint64_t>(t), kAction)
              .normal();
      const double a =
          clip(mu + shift.epsilon + cfg.sigma_price * z, cfg.p_min, cfg.p_max);
      traj.actions[ti] = a;

      const double index =
          pricing_demand_index(cfg, angle, a, w, alpha, r_star, taste);
      const bool buy =
          KeyedStream(cfg.seed, u, static_cast<std::uint64_t>(t), kDemand)
              .bernoulli(sigmoid(index));
      const double r = buy ? a : 0.0;
      traj.rewards[ti] = r;

      if (debug) {
        debug->r_star[static_cast<std::size_t>(i)].push_back(r_star);
        debug->action_noise[static_cast<std::size_t>(i)].push_back(z);
      }

      if (t < cfg.T) {
        const double eta =
            KeyedStream(latent_seed, u, static_cast<std::uint64_t>(t),
                        kRefTrans)
                .normal();
        r_star = clip(alpha * r_star + (1.0 - alpha) * a + cfg.sigma_r * eta,
                      cfg.p_min, cfg.p_max);
        const double te =
            KeyedStream(latent_seed, u, static_cast<std::uint64_t>(t),
                        kTasteTrans)
                .normal();
        taste = cfg.rho_u * taste + cfg.lambda_u * (buy ? 1.0 : 0.0) +
                cfg.sigma_u * te;
      }

      p_bar = (static_cast<double>(t) * p_bar + a) / (static_cast<double>(t) + 1.0);
      r_bar = (static_cast<double>(t) * r_bar + r) / (static_cast<double>(t) + 1.0);
      p_last = a;
      r_last = r;
    }

    const double angle_end = 2.0 * kPi * static_cast<double>(cfg.T + 1) /
                             static_cast<double>(cfg.T);
    traj.covariates[static_cast<std::size_t>(cfg.T)] = {
        p_last, p_bar, r_last, r_bar, std::sin(angle_end), std::cos(angle_end)};

    trajs[static_cast<std::size_t>(i)] = std::move(traj);
  }
  return make_dataset(std::move(trajs), cfg.gamma, cfg.T, 6);
}

// ---- tiny MDP ----------------------------------------------------------------

void validate(const TinyMDPSpec& spec) {
  auto prob_ok = [](double q) { return q > 0.0 && q < 1.0; };
  if (!prob_ok(spec.p_x1)) {
    throw std::invalid_argument("tiny spec: Pr(X_1=1) must lie in (0,1)");
  }
  for (int x = 0; x < 2; ++x) {
    if (!prob_ok(spec.pi1[static_cast<std::size_t>(x)])) {
      throw std::invalid_argument("tiny spec: propensities must lie in (0,1)");
    }
    for (int a = 0; a < 2; ++a) {
      if (!prob_ok(spec.trans[static_cast<std::size_t>(x)]
                            [static_cast<std::size_t>(a)])) {
        throw std::invalid_argument(
            "tiny spec: transition probabilities must lie in (0,1)");
      }
    }
  }
  if (!(spec.gamma > 0.0) || spec.gamma > 1.0) {
    throw std::invalid_argument("tiny spec: gamma must lie in (0,1]");
  }
}

double tiny_tilted_propensity(const TinyMDPSpec& spec, int x, double epsilon) {
  const double base = spec.pi1[static_cast<std::size_t>(x)];
  switch (spec.direction) {
    case TinyTilt::OddsTilt:
      return sigmoid(logit(base) + epsilon);
    case TinyTilt::ProbShift: {
      const double p = base + epsilon;
      if (!(p > 0.0) || !(p < 1.0)) {
        throw std::domain_error(
            "tiny prob-shift: tilted propensity left (0,1)");
      }
      return p;
    }
  }
  throw std::invalid_argument("tiny spec: unknown tilt kind");
}

Dataset simulate_tiny(const TinyMDPSpec& spec, std::int64_t n,
                      EpsilonShift shift, std::uint64_t seed) {
  validate(spec);
  if (n < 1) throw std::invalid_argument("simulate_tiny requires n >= 1");

  std::vector<Trajectory> trajs(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const int x1 =
        KeyedStream(seed, u, 0, kCovInit).bernoulli(spec.p_x1) ? 1 : 0;
    const int a1 = KeyedStream(seed, u, 1, kAction)
                           .bernoulli(tiny_tilted_propensity(spec, x1,
                                                             shift.epsilon))
                       ? 1
                       : 0;
    const int x2 =
        KeyedStream(seed, u, 1, kState)
                .bernoulli(spec.trans[static_cast<std::size_t>(x1)]
                                     [static_cast<std::size_t>(a1)])
            ? 1
            : 0;
    const int a2 = KeyedStream(seed, u, 2, kAction)
                           .bernoulli(tiny_tilted_propensity(spec, x2,
                                                             shift.epsilon))
                       ? 1
                       : 0;
    const int x3 =
        KeyedStream(seed, u, 2, kState)
                .bernoulli(spec.trans[static_cast<std::size_t>(x2)]
                                     [static_cast<std::size_t>(a2)])
            ? 1
            : 0;

    Trajectory traj;
    traj.unit_id = i;
    traj.covariates = {{static_cast<double>(x1)},
                       {static_cast<double>(x2)},
                       {static_cast<double>(x3)}};
    traj.actions = {static_cast<double>(a1), static_cast<double>(a2)};
    traj.rewards = {spec.reward1[static_cast<std::size_t>(x1)]
                                [static_cast<std::size_t>(a1)],
                    spec.reward2[static_cast<std::size_t>(x2)]
                                [static_cast<std::size_t>(a2)]};
    trajs[static_cast<std::size_t>(i)] = std::move(traj);
  }
  return make_dataset(std::move(trajs), spec.gamma, 2, 1);
}

double enumerate_tiny_value(const TinyMDPSpec& spec, double epsilon) {
  validate(spec);
  double value = 0.0;
  for (int x1 = 0; x1 < 2; ++x1) {
    const double px1 = x1 == 1 ? spec.p_x1 : 1.0 - spec.p_x1;
    const double tilt1 = tiny_tilted_propensity(spec, x1, epsilon);
    for (int a1 = 0; a1 < 2; ++a1) {
      const double pa1 = a1 == 1 ? tilt1 : 1.0 - tilt1;
      const double trans1 = spec.trans[static_cast<std::size_t>(x1)]
                                      [static_cast<std::size_t>(a1)];
      for (int x2 = 0; x2 < 2; ++x2) {
        const double px2 = x2 == 1 ? trans1 : 1.0 - trans1;
        const double tilt2 = tiny_tilted_propensity(spec, x2, epsilon);
        for (int a2 = 0; a2 < 2; ++a2) {
          const double pa2 = a2 == 1 ? tilt2 : 1.0 - tilt2;
          const double payoff =
              spec.reward1[static_cast<std::size_t>(x1)]
                          [static_cast<std::size_t>(a1)] +
              spec.gamma * spec.reward2[static_cast<std::size_t>(x2)]
                                       [static_cast<std::size_t>(a2)];
          value += px1 * pa1 * px2 * pa2 * payoff;
        }
      }
    }
  }
  return value;
}

// ---- environment model --------------------------------------------------------

EnvironmentModel make_benchmark_model(const BenchmarkConfig& cfg) {
  validate(cfg);
  EnvironmentModel model;
  model.schema = FeatureSchema::Benchmark;
  model.gamma = cfg.gamma;
  model.sigma_policy = cfg.sigma_a;
  model.reward_bound = 10.0;

  GaussianPolicySpec policy;
  const int p = cfg.p;
  policy.mean = [p](std::span<const double> f) {
    return benchmark_policy_mean_from_features(f, p);
  };
  policy.variance = cfg.sigma_a * cfg.sigma_a;

  model.direction.kind = DirectionKind::LocationShift;
  model.direction.policy = std::move(policy);
  model.direction.fd_step = 1e-3 * cfg.sigma_a;
  return model;
}

EnvironmentModel make_pricing_model(const PricingConfig& cfg) {
  validate(cfg);
  EnvironmentModel model;
  model.schema = FeatureSchema::Pricing;
  model.gamma = cfg.gamma;
  model.sigma_policy = cfg.sigma_price;
  model.reward_bound = cfg.p_max;

  GaussianPolicySpec policy;
  policy.mean = [cfg](std::span<const double> f) {
    return pricing_policy_mean(cfg, f);
  };
  policy.variance = cfg.sigma_price * cfg.sigma_price;
  policy.clip = ActionBounds{cfg.p_min, cfg.p_max};

  model.direction.kind = DirectionKind::LocationShift;
  model.direction.policy = std::move(policy);
  model.direction.fd_step = 1e-3 * cfg.sigma_price;
  model.direction.action_bounds = ActionBounds{cfg.p_min, cfg.p_max};
  return model;
}

EnvironmentModel make_tiny_model(const TinyMDPSpec& spec) {
  validate(spec);
  EnvironmentModel model;
  model.schema = FeatureSchema::Tiny;
  model.gamma = spec.gamma;
  model.sigma_policy = 1.0;
  double r_max = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) {
      r_max = std::max(r_max, std::abs(spec.reward1[static_cast<std::size_t>(x)]
                                                   [static_cast<std::size_t>(a)]));
      r_max = std::max(r_max, std::abs(spec.reward2[static_cast<std::size_t>(x)]
                                                   [static_cast<std::size_t>(a)]));
    }
  }
  model.reward_bound = r_max;

  model.direction.kind = spec.direction == TinyTilt::OddsTilt
                             ? DirectionKind::OddsTilt
                             : DirectionKind::ProbShift;
  model.direction.propensity = [spec](std::span<const double> f) {
    return spec.pi1[f[0] > 0.5 ? 1 : 0];
  };
  return model;
}

EnvironmentModel make_environment_model(const EnvConfig& env) {
  return std::visit(
      [](const auto& cfg) -> EnvironmentModel {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, BenchmarkConfig>) {
          return make_benchmark_model(cfg);
        } else if constexpr (std::is_same_v<T, PricingConfig>) {
          return make_pricing_model(cfg);
        } else {
          return make_tiny_model(cfg.spec);
        }
      },
      env);
}

Dataset simulate(const EnvConfig& env, EpsilonShift shift) {
  return std::visit(
      [shift](const auto& cfg) -> Dataset {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, BenchmarkConfig>) {
          return simulate_benchmark(cfg, shift);
        } else if constexpr (std::is_same_v<T, PricingConfig>) {
          return simulate_pricing(cfg, shift);
        } else {
          return simulate_tiny(cfg.spec, cfg.n, shift, cfg.seed);
        }
      },
      env);
}

}  // namespace mpe
