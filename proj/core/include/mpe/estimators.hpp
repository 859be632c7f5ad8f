#pragma once

#include <span>
#include <string>
#include <vector>

#include "mpe/nuisance.hpp"
#include "mpe/policy_paths.hpp"
#include "mpe/trajectory.hpp"

namespace mpe {

// ---------------------------------------------------------------------------
// Point estimators of the marginal policy effect with per-trajectory
// influence scores and Wald confidence intervals. All nuisances are evaluated
// out-of-fold.
// ---------------------------------------------------------------------------

struct WaldInterval {
  double se;
  double low;
  double high;
};

// se = sample sd (denominator n-1) / sqrt(n); interval mean +- 1.96 se.
// Requires at least two scores.
WaldInterval wald_ci(std::span<const double> psi);

struct EstimateReport {
  std::string method;  // "direct" | "srw" | "asrw"
  double theta_hat = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> psi;  // per-trajectory influence scores
  int n = 0;
  int T = 0;
  double gamma = 1.0;
  bool oracle_score = false;
  int folds = 0;
};

// Plug-in estimator: psi_i = sum_t gamma^{t-1} Lq_t, where Lq_t instantiates
// the linear functional G_t at the observed action (location shift: central
// finite-difference d/da q-hat; odds tilt: pi(1-pi) * (q(s,1) - q(s,0))).
EstimateReport estimate_direct(const Dataset& ds, const NuisanceSet& nuis,
                               const FoldAssignment& folds,
                               const DirectionModel& dir);

// Score-weighted estimator: psi_i = sum_t gamma^{t-1} H-hat_t * Gamma_t.
EstimateReport estimate_srw(const Dataset& ds, const NuisanceSet& nuis,
                            const FoldAssignment& folds,
                            const DirectionModel& dir);

// Augmented estimator: the plug-in term plus the score-weighted residual
// gamma^{t-1} H-hat_t * (Gamma_t - q-hat_t) at every stage.
EstimateReport estimate_asrw(const Dataset& ds, const NuisanceSet& nuis,
                             const FoldAssignment& folds,
                             const DirectionModel& dir);

}  // namespace mpe
