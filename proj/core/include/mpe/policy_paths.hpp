#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>

namespace mpe {

// ---------------------------------------------------------------------------
// Perturbation directions for the policy path {pi_eps}. A direction supplies
// the direction score H_t = pi_t' / pi_t on the baseline support and, for the
// estimators, the per-sample form of the linear functional G_t(q).
// ---------------------------------------------------------------------------

enum class DirectionKind {
  LocationShift,  // pi_eps(a|s) = pi(a - eps | s), continuous scalar actions
  OddsTilt,       // logit pi_eps(1|s) = logit pi(1|s) + eps, binary actions
  ProbShift,      // pi_eps(1|s) = pi(1|s) + eps, binary actions
  GenericScore,   // user-supplied H_t evaluator
};

struct ActionBounds {
  double lo;
  double hi;
};

// Gaussian-type baseline policy: A | S ~ N(mean(s), variance), optionally
// clipped to [clip.lo, clip.hi]. The mean evaluator consumes stage features.
struct GaussianPolicySpec {
  std::function<double(std::span<const double>)> mean;
  double variance = 1.0;
  std::optional<ActionBounds> clip;
};

// Score of the unclipped Gaussian baseline under a location shift:
//   H(s, a) = (a - m(s)) / v.
double gaussian_score(const GaussianPolicySpec& spec,
                      std::span<const double> features, double action);

// Score of the clipped Gaussian under a location shift. Clipping puts atoms
// at the bounds; observed actions equal to a bound are the atom cases (the
// simulator writes bound values bit-exactly, so exact comparison is the data
// contract). With z_L = (lo - mu)/sigma and z_U = (hi - mu)/sigma:
//   interior:  (a - mu) / sigma^2
//   a == lo:  -phi(z_L) / (sigma * Phi(z_L))
//   a == hi:   phi(z_U) / (sigma * (1 - Phi(z_U)))
// Throws std::domain_error when a lies outside [lo, hi].
double clipped_gaussian_score(const GaussianPolicySpec& spec,
                              std::span<const double> features, double action);

// Odds-tilt direction for a binary action with propensity pi1 = pi(1|s):
// returns (pi'(1|s), pi'(0|s)) = (pi1(1-pi1), -pi1(1-pi1)).
// Throws std::domain_error at the boundary (positivity violated).
std::pair<double, double> odds_tilt_direction(double pi1);

// ---------------------------------------------------------------------------
// Dispatching direction model used by nuisance fitting and the estimators.
// ---------------------------------------------------------------------------

struct DirectionModel {
  DirectionKind kind = DirectionKind::LocationShift;

  // Continuous directions: the baseline Gaussian policy (for oracle scores).
  std::optional<GaussianPolicySpec> policy;

  // Binary directions: known propensity pi(1|s) as a function of features.
  std::function<double(std::span<const double>)> propensity;

  // GenericScore: user-supplied H(s, a).
  std::function<double(std::span<const double>, double)> generic_score;

  // Step for finite-difference action derivatives of q-hat (raw action units).
  double fd_step = 1e-3;

  // Declared action bounds; derivative evaluation stays one-sided inside them.
  std::optional<ActionBounds> action_bounds;
};

// H(s, a) for the configured direction. For OddsTilt, H(s,1) = 1 - pi1 and
// H(s,0) = -pi1; for ProbShift, H(s,1) = 1/pi1 and H(s,0) = -1/(1-pi1).
double direction_score(const DirectionModel& dir,
                       std::span<const double> features, double action);

}  // namespace mpe
