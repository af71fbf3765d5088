#pragma once

#include <string>
#include <vector>

#include "qmf/encoding.hpp"
#include "qmf/matfun.hpp"

namespace qmf {

// Degree bookkeeping for one approximate-flow run.  total_queries is the
// product (log + rect) x trig of the recorded component degrees, and
// predicted_bound evaluates the closed form
//   round( kappa^2 ln(kappa^2/eps) *
//          (|t| ln kappa + ln(1/eps)/ln(e + ln(1/eps)/(|t| ln kappa))) )
// with unit constants (0 at t = 0).
struct QueryLedger {
  long long log_poly_degree = 0;
  long long rect_poly_degree = 0;
  long long trig_degree = 0;
  long long total_queries = 0;
  long long predicted_bound = 0;
};

// Observed ceiling of total_queries / predicted_bound over the contract
// grid (kappa in [4, 64], epsilon in [1e-3, 1e-1], |t| in [0, 64]); the
// ratio peaks at small kappa and decays toward 1.3 as kappa grows.
inline constexpr double query_bound_constant = 5.0;

struct FlowParameters {
  double kappa_used = 0.0;
  double epsilon = 0.0;
  double t = 0.0;
};

struct FlowResult {
  ComplexMatrix approx_operator;
  ComplexMatrix exact_operator;
  double error_norm = 0.0;  // operator norm of approx - exact
  QueryLedger query_ledger;
  FlowParameters parameters;
  // the a-priori budget 2 e + e^2 with e = eps_trig + |t| eps_mh
  double guarantee = 0.0;
  // 1 unless the input operator norm exceeded 1
  double rescale_factor = 1.0;
  std::vector<std::string> notes;
};

// rho^{-it} O rho^{+it} with the logarithm taken on the support of rho
// and phase 1 on its kernel.  t = 0 returns O itself.
ComplexMatrix exact_flow(const DensityMatrix& rho, const ComplexMatrix& O,
                         double t);

// The polynomial pipeline: H = P^MH(rho) by matrix Clenshaw, then
// U = cos(t_eff H) + i sin(t_eff H) with t_eff = -2 beta t, and
// O(t) = U^dagger O U, measured against exact_flow.  kappa_override = 0
// takes kappa from spectral_floor (snapped up to the 2^(k/4) grid, floor
// 2); a positive override is used as given.  Operators with norm above 1
// are rescaled and the factor recorded.  degree_cap = 0 is unlimited; a
// positive cap raises DegreeCapError before oversized builds run.
FlowResult approx_flow(const DensityMatrix& rho, const ComplexMatrix& O,
                       double t, double epsilon, double kappa_override = 0.0,
                       long long degree_cap = 0);

// Ledger for the stated degree rules at face value: the log factor at the
// geometric degree rule for the full epsilon, the plateau factor at the
// matching epsilon', trig at t_eff = beta |t|.  Requires kappa > 1 and
// epsilon in (0, 1).
QueryLedger query_count(double kappa, double epsilon, double t);

struct PurifiedFlowResult {
  PureState state;
  double bound = 0.0;  // 3 d^(2/3) (|t| eps)^(1/3), <= delta by construction
  double epsilon = 0.0;
  double kappa = 0.0;
  long long log_terms = 0;
  long long rect_degree = 0;
  long long trig_degree = 0;
};

// Applies (rho_A^{it} x I)|psi> approximately on a bipartite state by
// evaluating the flow phases per eigenvalue of the reduced state, with
// eps = (1 - 1e-9) delta^3 / (27 d^2 |t|) and kappa = (d/(|t| eps))^(2/3).
// degree_cap = 0 is unlimited; a positive cap turns oversized builds into
// a resource error naming the offending degree.
PurifiedFlowResult purified_flow(const PureState& psi, double t, double delta,
                                 long long degree_cap = 0);

}  // namespace qmf
