#include "mpe/policy_paths.hpp"

#include <cmath>
#include <stdexcept>

#include "mpe/math_util.hpp"

namespace mpe {

double gaussian_score(const GaussianPolicySpec& spec,
                      std::span<const double> features, double action) {
  if (!(spec.variance > 0.0)) {
    throw std::domain_error("gaussian_score: variance must be positive");
  }
  return (action - spec.mean(features)) / spec.variance;
}

double clipped_gaussian_score(const GaussianPolicySpec& spec,
                              std::span<const double> features, double action) {
  if (!spec.clip) {
    return gaussian_score(spec, features, action);
  }
  const double lo = spec.clip->lo;
  const double hi = spec.clip->hi;
  if (action < lo || action > hi) {
    throw std::domain_error("clipped_gaussian_score: action outside bounds");
  }
  const double mu = spec.mean(features);
  const double sigma = std::sqrt(spec.variance);
  if (action == lo) {
    const double z = (lo - mu) / sigma;
    return -normal_pdf(z) / (sigma * normal_cdf(z));
  }
  if (action == hi) {
    const double z = (hi - mu) / sigma;
    return normal_pdf(z) / (sigma * (1.0 - normal_cdf(z)));
  }
  return (action - mu) / spec.variance;
}

std::pair<double, double> odds_tilt_direction(double pi1) {
  if (!(pi1 > 0.0) || !(pi1 < 1.0)) {
    throw std::domain_error("odds_tilt_direction: propensity must lie in (0,1)");
  }
  const double d = pi1 * (1.0 - pi1);
  return {d, -d};
}

double direction_score(const DirectionModel& dir,
                       std::span<const double> features, double action) {
  switch (dir.kind) {
    case DirectionKind::LocationShift: {
      if (!dir.policy) {
        throw std::invalid_argument(
            "direction_score: LocationShift requires a Gaussian policy spec");
      }
      return clipped_gaussian_score(*dir.policy, features, action);
    }
    case DirectionKind::OddsTilt: {
      if (!dir.propensity) {
        throw std::invalid_argument(
            "direction_score: OddsTilt requires a propensity evaluator");
      }
      const double pi1 = dir.propensity(features);
      if (!(pi1 > 0.0) || !(pi1 < 1.0)) {
        throw std::domain_error("direction_score: propensity outside (0,1)");
      }
      // H = pi'/pi: pi'(1) = pi1(1-pi1) so H(s,1) = 1-pi1; H(s,0) = -pi1.
      return action > 0.5 ? 1.0 - pi1 : -pi1;
    }
    case DirectionKind::ProbShift: {
      if (!dir.propensity) {
        throw std::invalid_argument(
            "direction_score: ProbShift requires a propensity evaluator");
      }
      const double pi1 = dir.propensity(features);
      if (!(pi1 > 0.0) || !(pi1 < 1.0)) {
        throw std::domain_error("direction_score: propensity outside (0,1)");
      }
      // pi' = (+1, -1), so H(s,1) = 1/pi1 and H(s,0) = -1/(1-pi1).
      return action > 0.5 ? 1.0 / pi1 : -1.0 / (1.0 - pi1);
    }
    case DirectionKind::GenericScore: {
      if (!dir.generic_score) {
        throw std::invalid_argument(
            "direction_score: GenericScore requires an evaluator");
      }
      return dir.generic_score(features, action);
    }
  }
  throw std::invalid_argument("direction_score: unsupported direction kind");
}

}  // namespace mpe
