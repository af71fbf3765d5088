#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qmf {

// Raised when a planned polynomial degree exceeds a caller-supplied cap,
// so drivers can separate resource overruns from ordinary failures.
struct DegreeCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Parity { even, odd, none };

// Coefficients of sum_n coefficients[n] * T_n(x).  A declared parity
// promises that the complementary coefficients are exactly zero.
struct ChebyshevSeries {
  std::vector<double> coefficients;
  Parity parity = Parity::none;

  ChebyshevSeries() = default;
  ChebyshevSeries(std::vector<double> coeffs, Parity p);

  // Highest index with a nonzero coefficient; -1 for the zero polynomial.
  long long degree() const;
};

// Evaluate the series at a scalar x in [-1, 1].
double clenshaw_eval(const ChebyshevSeries& series, double x);

// Truncated Chebyshev expansion of ln|x|:
//   f_N(x) = -ln 2 + sum_{n=1..N} (-1)^(n-1)/n * T_{2n}(x).
ChebyshevSeries log_series_coefficients(long long N);

// Scalar f_N(x) without materializing the coefficient array (the even
// series is evaluated as a degree-N series in y = 2x^2 - 1).
double log_series_eval(long long N, double x);

// Degree rule solved from the bound below: smallest N with
// kappa^2 (1 - 2/kappa^2)^(N+1) / 2 <= epsilon, floored at 0.
long long degree_for_log(double kappa, double epsilon);

// The geometric error model kappa^2 (1 - 2/kappa^2)^(N+1) / 2.
double truncation_error_bound(double kappa, long long N);

// Partial-summation tail bound: |f_N(x) - ln x| <= 1/(x (N+1)) pointwise
// on (0, 1], hence kappa/(N+1) uniformly on [1/kappa, 1].
double log_tail_bound(double kappa, long long N);

// Smallest N with log_tail_bound(kappa, N) <= epsilon.
long long log_degree_for_tail(double kappa, double epsilon);

double harmonic_number(long long N);

}  // namespace qmf
