#include "qmf/chebyshev.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qmf {

namespace {

void check_parity_pattern(const std::vector<double>& coeffs, Parity parity) {
  if (parity == Parity::none) return;
  const std::size_t start = (parity == Parity::even) ? 1 : 0;
  for (std::size_t n = start; n < coeffs.size(); n += 2) {
    if (coeffs[n] != 0.0) {
      throw std::invalid_argument(
          "ChebyshevSeries: coefficient " + std::to_string(n) +
          " must be exactly zero for the declared parity");
    }
  }
}

double domain_checked(double x) {
  if (std::abs(x) > 1.0 + 1e-12) {
    throw std::domain_error("clenshaw_eval: |x| must be <= 1, got " +
                            std::to_string(x));
  }
  return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
}

}  // namespace

ChebyshevSeries::ChebyshevSeries(std::vector<double> coeffs, Parity p)
    : coefficients(std::move(coeffs)), parity(p) {
  check_parity_pattern(coefficients, parity);
}

long long ChebyshevSeries::degree() const {
  for (std::size_t n = coefficients.size(); n > 0; --n) {
    if (coefficients[n - 1] != 0.0) return static_cast<long long>(n - 1);
  }
  return -1;
}

double clenshaw_eval(const ChebyshevSeries& series, double x) {
  x = domain_checked(x);
  const auto& c = series.coefficients;
  if (c.empty()) return 0.0;
  // b_k = c_k + 2x b_{k+1} - b_{k+2}, then p(x) = c_0 + x b_1 - b_2.
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    const double b = c[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b;
  }
  return c[0] + x * b1 - b2;
}

ChebyshevSeries log_series_coefficients(long long N) {
  if (N < 0) {
    throw std::invalid_argument("log_series_coefficients: N must be >= 0");
  }
  std::vector<double> coeffs(static_cast<std::size_t>(2 * N + 1), 0.0);
  coeffs[0] = -std::log(2.0);
  double sign = 1.0;
  for (long long n = 1; n <= N; ++n) {
    coeffs[static_cast<std::size_t>(2 * n)] = sign / static_cast<double>(n);
    sign = -sign;
  }
  return ChebyshevSeries(std::move(coeffs), Parity::even);
}

double log_series_eval(long long N, double x) {
  if (N < 0) throw std::invalid_argument("log_series_eval: N must be >= 0");
  x = domain_checked(x);
  // T_{2n}(x) = T_n(2x^2 - 1), so run Clenshaw in y with the generated
  // coefficients a_0 = -ln 2, a_n = (-1)^(n-1)/n.
  const double y = 2.0 * x * x - 1.0;
  double b1 = 0.0, b2 = 0.0;
  for (long long n = N; n >= 1; --n) {
    const double a = (n % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(n);
    const double b = a + 2.0 * y * b1 - b2;
    b2 = b1;
    b1 = b;
  }
  return -std::log(2.0) + y * b1 - b2;
}

long long degree_for_log(double kappa, double epsilon) {
  if (kappa <= 1.0) {
    throw std::domain_error("degree_for_log: kappa must be > 1, got " +
                            std::to_string(kappa));
  }
  if (epsilon <= 0.0) {
    throw std::domain_error("degree_for_log: epsilon must be > 0");
  }
  const double base = 1.0 - 2.0 / (kappa * kappa);
  if (base <= 0.0) return 0;
  const double target = std::log(kappa * kappa / (2.0 * epsilon));
  if (target <= 0.0) return 0;
  const long long n =
      static_cast<long long>(std::ceil(target / (-std::log(base)))) - 1;
  return n < 0 ? 0 : n;
}

double truncation_error_bound(double kappa, long long N) {
  if (kappa <= 1.0) {
    throw std::domain_error("truncation_error_bound: kappa must be > 1");
  }
  if (N < 0) throw std::invalid_argument("truncation_error_bound: N must be >= 0");
  const double base = 1.0 - 2.0 / (kappa * kappa);
  return kappa * kappa * std::pow(base, static_cast<double>(N + 1)) / 2.0;
}

double log_tail_bound(double kappa, long long N) {
  if (kappa < 1.0) {
    throw std::domain_error("log_tail_bound: kappa must be >= 1");
  }
  if (N < 0) throw std::invalid_argument("log_tail_bound: N must be >= 0");
  return kappa / static_cast<double>(N + 1);
}

long long log_degree_for_tail(double kappa, double epsilon) {
  if (kappa < 1.0) {
    throw std::domain_error("log_degree_for_tail: kappa must be >= 1");
  }
  if (epsilon <= 0.0) {
    throw std::domain_error("log_degree_for_tail: epsilon must be > 0");
  }
  long long n = static_cast<long long>(std::ceil(kappa / epsilon - 1.0));
  if (n < 0) n = 0;
  while (log_tail_bound(kappa, n) > epsilon) ++n;
  return n;
}

double harmonic_number(long long N) {
  double h = 0.0;
  for (long long n = 1; n <= N; ++n) h += 1.0 / static_cast<double>(n);
  return h;
}

}  // namespace qmf
