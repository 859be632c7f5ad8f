#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mpe/policy_paths.hpp"
#include "mpe/trajectory.hpp"

namespace mpe {

// ---------------------------------------------------------------------------
// Data-generating processes. All three environments draw every noise source
// from a keyed substream (seed, unit, stage, purpose), so identical seeds give
// bitwise-identical datasets and the +eps/-eps runs share noise streams (the
// shift moves only the policy mean or logit).
// ---------------------------------------------------------------------------

struct EpsilonShift {
  double epsilon = 0.0;
};

// ---- Latent-regime benchmark -----------------------------------------------

struct BenchmarkConfig {
  std::int64_t n = 5000;
  int p = 5;
  int T = 2;
  double gamma = 0.99;
  double sigma_a = 1.0;
  std::uint64_t seed = 1;
};

void validate(const BenchmarkConfig& cfg);

// Loading vector l_j = j^{-1/2} / sqrt(sum_{k<=p} 1/k).
std::vector<double> benchmark_loading_vector(int p);

// Behavior policy mean: 0.10 + 0.35 * xbar + 0.15 * a_prev.
double benchmark_action_mean(double xbar, double a_prev);

// Policy mean from Benchmark-schema stage features (X_t, A_{t-1}, R_{t-1}, t/T).
double benchmark_policy_mean_from_features(std::span<const double> features,
                                           int p);

Dataset simulate_benchmark(const BenchmarkConfig& cfg, EpsilonShift shift);

// Debug side channel: latent regime path and the raw policy-noise draws.
// Never serialized into the Dataset. latent_salt re-keys only the latent
// streams (regime init and transition), leaving every observable-noise stream
// untouched; tests use it to check that action draws are insulated from the
// latent randomness.
struct BenchmarkDebug {
  std::vector<std::vector<double>> latent_regime;  // U_1..U_T per unit
  std::vector<std::vector<double>> action_noise;   // z_1..z_T per unit
};

Dataset simulate_benchmark_debug(const BenchmarkConfig& cfg, EpsilonShift shift,
                                 BenchmarkDebug* debug,
                                 std::uint64_t latent_salt = 0);

// ---- Dynamic pricing with reference effects ---------------------------------

struct PricingConfig {
  std::int64_t n = 5000;
  int T = 8;
  double gamma = 0.99;
  double p_min = 1.0;
  double p_max = 10.0;
  double sigma_price = 0.70;

  // Latent heterogeneity and hidden reference process.
  double sigma_w = 1.00;
  double alpha_min = 0.72;
  double alpha_max = 0.97;
  double c_alpha = 1.10;
  double r0 = 5.20;
  double sigma_r0 = 0.85;
  double rho_w = 0.60;
  double sigma_init = 0.35;
  double sigma_r = 0.12;

  // Policy-mean components.
  std::array<double, 8> c = {2.90, 0.25, 0.18, 0.28, 0.18, 0.15, 0.18, -0.10};
  double mu_r = 2.70;
  double s_r = 2.20;
  double margin = 0.55;  // m: policy mean clipped to [p_min+m, p_max-m]

  // Demand index.
  double beta_0 = 2.00;
  double beta_p = -0.72;
  double beta_r = 0.78;
  double beta_gap2 = 0.18;
  double beta_season = 0.20;
  double beta_nl = 0.14;

  // Latent taste process.
  double rho_u = 0.88;
  double sigma_u = 0.22;
  double lambda_u = 0.40;

  std::uint64_t seed = 1;
};

void validate(const PricingConfig& cfg);

// Policy mean mu_t(X_t) from the pricing covariate
// (P_last, Pbar, R_last, Rbar, sin(2 pi t / T), cos(2 pi t / T)).
double pricing_policy_mean(const PricingConfig& cfg,
                           std::span<const double> features);

// Demand index for one step given the latent state; exposed for tests.
double pricing_demand_index(const PricingConfig& cfg, double t_over_T_angle,
                            double action, double w, double alpha,
                            double r_star, double u);

Dataset simulate_pricing(const PricingConfig& cfg, EpsilonShift shift);

struct PricingDebug {
  std::vector<double> w;                        // W_i
  std::vector<double> alpha;                    // alpha_i
  std::vector<std::vector<double>> r_star;      // r*_1..r*_T per unit
  std::vector<std::vector<double>> action_noise;
};

Dataset simulate_pricing_debug(const PricingConfig& cfg, EpsilonShift shift,
                               PricingDebug* debug, std::uint64_t latent_salt = 0);

// ---- Tiny exactly-enumerable MDP (T = 2, binary states and actions) --------

enum class TinyTilt { OddsTilt, ProbShift };

struct TinyMDPSpec {
  double p_x1 = 0.5;                       // Pr(X_1 = 1)
  std::array<double, 2> pi1 = {0.3, 0.7};  // pi(1|x), both stages
  // reward1[x][a] = r(1, x, a); defaults r(1,x,a) = x + a.
  std::array<std::array<double, 2>, 2> reward1 = {{{0.0, 1.0}, {1.0, 2.0}}};
  // reward2[x][a] = r(2, x, a); defaults r(2,x,a) = 2a - x.
  std::array<std::array<double, 2>, 2> reward2 = {{{0.0, 2.0}, {-1.0, 1.0}}};
  // trans[x1][a1] = Pr(X_2 = 1 | x1, a1); defaults 0.2 + 0.5 a + 0.2 x.
  std::array<std::array<double, 2>, 2> trans = {{{0.2, 0.7}, {0.4, 0.9}}};
  double gamma = 0.9;
  TinyTilt direction = TinyTilt::OddsTilt;
};

void validate(const TinyMDPSpec& spec);

// Tilted propensity pi_eps(1|x).
double tiny_tilted_propensity(const TinyMDPSpec& spec, int x, double epsilon);

Dataset simulate_tiny(const TinyMDPSpec& spec, std::int64_t n, EpsilonShift shift,
                      std::uint64_t seed);

// Exact J(eps) = E_eps[R_1 + gamma R_2] by summation over all 16 paths.
double enumerate_tiny_value(const TinyMDPSpec& spec, double epsilon);

// ---- Shared environment model ----------------------------------------------

// Tiny-MDP simulation case (the spec itself carries no sample size or seed).
struct TinyCase {
  TinyMDPSpec spec;
  std::int64_t n = 5000;
  std::uint64_t seed = 1;
};

using EnvConfig = std::variant<BenchmarkConfig, PricingConfig, TinyCase>;

// Everything nuisance fitting and the estimators need to know about an
// environment: featurization, perturbation direction, known baseline policy
// (for oracle scores), and the reward bound used to cap fitted q-hat.
struct EnvironmentModel {
  FeatureSchema schema = FeatureSchema::Benchmark;
  DirectionModel direction;
  double gamma = 0.99;
  double sigma_policy = 1.0;  // action scale: sigma_a / sigma_price / 1
  double reward_bound = 10.0;  // R_max
};

EnvironmentModel make_benchmark_model(const BenchmarkConfig& cfg);
EnvironmentModel make_pricing_model(const PricingConfig& cfg);
EnvironmentModel make_tiny_model(const TinyMDPSpec& spec);
EnvironmentModel make_environment_model(const EnvConfig& env);

Dataset simulate(const EnvConfig& env, EpsilonShift shift);

}  // namespace mpe
