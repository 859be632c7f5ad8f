#include "mpe/estimators.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mpe/mlp.hpp"

namespace mpe {

namespace {

enum class Method { Direct, Srw, Asrw };

// Per-sample value of the linear functional G_t(q) / gamma^{t-1}.
double linear_functional_term(const DirectionModel& dir, const StageFn& q_fn,
                              std::vector<double>& joint, double action) {
  const std::size_t last = joint.size() - 1;
  switch (dir.kind) {
    case DirectionKind::LocationShift:
      joint[last] = action;
      return fd_partial_action(
          [&q_fn](std::span<const double> x) { return q_fn(x); }, joint,
          static_cast<int>(last), dir.fd_step, dir.action_bounds);
    case DirectionKind::OddsTilt:
    case DirectionKind::ProbShift: {
      if (!dir.propensity) {
        throw std::invalid_argument(
            "estimator: binary direction requires a propensity evaluator");
      }
      const std::span<const double> features(joint.data(), last);
      const double pi1 = dir.propensity(features);
      joint[last] = 1.0;
      const double q1 = q_fn(joint);
      joint[last] = 0.0;
      const double q0 = q_fn(joint);
      const double weight =
          dir.kind == DirectionKind::OddsTilt ? pi1 * (1.0 - pi1) : 1.0;
      return weight * (q1 - q0);
    }
    case DirectionKind::GenericScore:
      throw std::invalid_argument(
          "estimator: the plug-in functional is not defined for a generic "
          "score direction");
  }
  throw std::invalid_argument("estimator: unsupported direction kind");
}

std::vector<double> influence_scores(Method method, const Dataset& ds,
                                     const NuisanceSet& nuis,
                                     const FoldAssignment& folds,
                                     const DirectionModel& dir) {
  const bool needs_q = method != Method::Srw;
  const bool needs_h = method != Method::Direct;
  if (needs_q && !nuis.has_q()) {
    throw std::invalid_argument("estimator: q-hat nuisances are missing");
  }
  if (needs_h && !nuis.has_h()) {
    throw std::invalid_argument("estimator: H-hat nuisances are missing");
  }
  if (folds.fold.size() != ds.trajectories.size()) {
    throw std::invalid_argument("estimator: fold assignment size mismatch");
  }
  if (nuis.horizon != ds.horizon) {
    throw std::invalid_argument("estimator: nuisance horizon mismatch");
  }

  const std::size_t n = ds.trajectories.size();
  std::vector<double> psi(n, 0.0);
  std::vector<double> joint;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& traj = ds.trajectories[i];
    const int k = folds.fold[i];
    if (k < 0 || k >= nuis.folds) {
      throw std::invalid_argument("estimator: fold index out of range");
    }
    const auto returns = discounted_returns(traj, ds.gamma);
    double discount = 1.0;
    double acc = 0.0;
    for (int t = 1; t <= ds.horizon; ++t) {
      const auto feat = stage_features(traj, t, nuis.schema);
      joint.assign(feat.begin(), feat.end());
      joint.push_back(0.0);
      const double action = traj.actions[static_cast<std::size_t>(t - 1)];
      const double gamma_t = returns[static_cast<std::size_t>(t - 1)];

      double term = 0.0;
      if (needs_q) {
        const auto& q_fn =
            nuis.q[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 1)];
        term += linear_functional_term(dir, q_fn, joint, action);
        if (method == Method::Asrw) {
          const auto& h_fn =
              nuis.h[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 1)];
          joint[joint.size() - 1] = action;
          const double h_val = h_fn(joint);
          const double q_val = q_fn(joint);
          term += h_val * (gamma_t - q_val);
        }
      } else {
        const auto& h_fn =
            nuis.h[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 1)];
        joint[joint.size() - 1] = action;
        term += h_fn(joint) * gamma_t;
      }
      acc += discount * term;
      discount *= ds.gamma;
    }
    psi[i] = acc;
  }
  return psi;
}

EstimateReport make_report(std::string method, std::vector<double> psi,
                           const Dataset& ds, const NuisanceSet& nuis) {
  const auto wald = wald_ci(psi);
  EstimateReport report;
  report.method = std::move(method);
  report.theta_hat =
      std::accumulate(psi.begin(), psi.end(), 0.0) /
      static_cast<double>(psi.size());
  report.se = wald.se;
  report.ci_low = wald.low;
  report.ci_high = wald.high;
  report.psi = std::move(psi);
  report.n = static_cast<int>(ds.trajectories.size());
  report.T = ds.horizon;
  report.gamma = ds.gamma;
  report.oracle_score = nuis.oracle_score;
  report.folds = nuis.folds;
  return report;
}

}  // namespace

WaldInterval wald_ci(std::span<const double> psi) {
  if (psi.size() < 2) {
    throw std::invalid_argument("wald_ci: need at least two scores");
  }
  const double n = static_cast<double>(psi.size());
  double mean = 0.0;
  for (double v : psi) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : psi) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double se = sd / std::sqrt(n);
  return {se, mean - 1.96 * se, mean + 1.96 * se};
}

EstimateReport estimate_direct(const Dataset& ds, const NuisanceSet& nuis,
                               const FoldAssignment& folds,
                               const DirectionModel& dir) {
  return make_report("direct",
                     influence_scores(Method::Direct, ds, nuis, folds, dir), ds,
                     nuis);
}

EstimateReport estimate_srw(const Dataset& ds, const NuisanceSet& nuis,
                            const FoldAssignment& folds,
                            const DirectionModel& dir) {
  return make_report("srw", influence_scores(Method::Srw, ds, nuis, folds, dir),
                     ds, nuis);
}

EstimateReport estimate_asrw(const Dataset& ds, const NuisanceSet& nuis,
                             const FoldAssignment& folds,
                             const DirectionModel& dir) {
  return make_report("asrw",
                     influence_scores(Method::Asrw, ds, nuis, folds, dir), ds,
                     nuis);
}

}  // namespace mpe
