#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qmf/chebyshev.hpp"

namespace qmf {

// A certified polynomial: the series together with the dense-grid sup
// norm (must stay within 1 + 1e-9 so the block-encoded application is
// admissible), the target it approximates, where the guarantee holds,
// and how tight it is.
struct PolySpec {
  ChebyshevSeries series;
  double sup_norm_bound = 0.0;
  std::string target;
  std::vector<std::pair<double, double>> valid_region;
  double guarantee_epsilon = 0.0;
};

struct NormalizationInfo {
  double beta = 0.0;  // ln(2 kappa)
  double kappa = 0.0;
  double epsilon_prime = 0.0;
};

// Max |p| over a Chebyshev-spaced grid of at least max(4*(degree+1),
// min_points) nodes.
double grid_sup_norm(const ChebyshevSeries& series, std::size_t min_points = 0);

// Odd approximation to sign(x), within epsilon for gap/2 <= |x| <= 1,
// exactly zero at the origin.  Requires 0 < gap < 2.
PolySpec sign_poly(double gap, double epsilon);

// Even plateau indicator: within epsilon_prime of 1 for 1/kappa <= |x| <= 1
// and of 0 for |x| <= 1/(2 kappa).
PolySpec rect_poly(double kappa, double epsilon_prime);

// The normalized modular-Hamiltonian polynomial
//   P(x) ~ -ln|x| / (2 ln(2 kappa))  on [1/kappa, 1],
// assembled as the product of the truncated log series and the plateau
// indicator, with |2 beta P(x) + ln|x|| <= epsilon there.
std::pair<PolySpec, NormalizationInfo> modular_hamiltonian_poly(double kappa,
                                                                double epsilon);

// Chebyshev expansions of cos(t_eff x) and sin(t_eff x) via Jacobi-Anger,
// each within epsilon/2 on [-1, 1] after truncation and rescaling.
std::pair<PolySpec, PolySpec> trig_polys(double t_eff, double epsilon);

// J_0..J_nmax at argument z >= 0 by Miller's downward recurrence.
std::vector<double> bessel_j_sequence(double z, long long nmax);

// Factorized modular-Hamiltonian data: the log factor stays virtual (its
// coefficients are generated on the fly), the rect factor is materialized.
// Spectral callers evaluate eval() per eigenvalue instead of applying the
// assembled product to a matrix.
struct MhParts {
  double kappa = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double epsilon_log = 0.0;
  double epsilon_prime = 0.0;
  long long log_terms = 0;  // N; the log factor has polynomial degree 2N
  PolySpec rect;

  double eval(double x) const;                // -f_N(x) rect(x) / (2 beta)
  double eval_unnormalized(double x) const;   // -f_N(x) rect(x) ~ -ln|x|
};

struct MhBuild {
  MhParts parts;
  PolySpec poly;
  NormalizationInfo norm;
};

// Shared, mutex-guarded caches keyed on the exact (kappa, epsilon) pair.
std::shared_ptr<const MhParts> mh_parts_cached(double kappa, double epsilon);
std::shared_ptr<const MhBuild> modular_hamiltonian_poly_cached(double kappa,
                                                               double epsilon);

}  // namespace qmf
