#pragma once

#include <array>
#include <cstdint>

#include "mpe/environments.hpp"
#include "mpe/nuisance.hpp"

namespace mpe {

// ---------------------------------------------------------------------------
// Ground-truth MPE per environment: exact enumeration for the tiny MDP,
// common-random-numbers symmetric finite differences for the continuous
// environments, and the exact policy-gradient evaluation on the tiny MDP.
// ---------------------------------------------------------------------------

struct TruthSpec {
  double epsilon_fd = 0.05;
  std::int64_t mc_trajectories = 200000;
  std::uint64_t seed = 1;
};

void validate(const TruthSpec& spec);

struct TruthEstimate {
  double theta = 0.0;
  double mc_se = 0.0;
  double epsilon = 0.0;
  std::int64_t trajectories = 0;
};

// (J(+eps) - J(-eps)) / (2 eps) from paired simulations sharing all noise
// streams; the reported standard error is that of the paired differences.
TruthEstimate crn_truth(const EnvConfig& env, const TruthSpec& spec);

// Analytic dJ/deps at 0 by term-by-term differentiation of the 16-path sum.
double exact_theta_tiny(const TinyMDPSpec& spec);

// Policy-gradient form: sum_t gamma^{t-1} E[w(S_t) (q_t(S_t,1) - q_t(S_t,0))]
// with exact q_t by backward induction and exact state marginals.
double gpgt_theta_tiny(const TinyMDPSpec& spec);

// Score form: sum_t gamma^{t-1} E[H_t(S_t,A_t) q_t(S_t,A_t)], exactly.
double score_form_theta_tiny(const TinyMDPSpec& spec);

// Exact stage value functions and state marginals of the tiny MDP.
struct TinyTables {
  std::array<std::array<double, 2>, 2> q1;  // q_1(x, a)
  std::array<std::array<double, 2>, 2> q2;  // q_2(x, a)
  std::array<double, 2> v2;                 // V_2(x)
  std::array<double, 2> marginal1;          // Pr(X_1 = x)
  std::array<double, 2> marginal2;          // Pr(X_2 = x)
};
TinyTables tiny_tables(const TinyMDPSpec& spec);

// Cross-fit-shaped nuisance set holding the exact q_t and H_t of the tiny
// MDP (every fold shares the same closed-form evaluators).
NuisanceSet make_tiny_oracle_nuisances(const TinyMDPSpec& spec, int folds);

}  // namespace mpe
