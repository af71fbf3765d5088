#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qmf/matfun.hpp"
#include "qmf/random.hpp"

namespace {

using qmf::ComplexMatrix;
using qmf::cplx;

ComplexMatrix random_hermitian(std::size_t n, qmf::Rng& rng) {
  ComplexMatrix g(n, n);
  for (auto& z : g.entries) z = rng.complex_normal();
  ComplexMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      h(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
    }
  }
  return h;
}

ComplexMatrix random_general(std::size_t r, std::size_t c, qmf::Rng& rng) {
  ComplexMatrix g(r, c);
  for (auto& z : g.entries) z = rng.complex_normal();
  return g;
}

// Power iteration on M^dagger M with a fixed start vector; independent of
// the Jacobi route used by operator_norm.
double power_iteration_norm(const ComplexMatrix& m, int iters = 2000) {
  const ComplexMatrix gram = qmf::matmul(qmf::dagger(m), m);
  const std::size_t n = gram.rows;
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = cplx(1.0 + static_cast<double>(i) * 0.137,
                0.21 - static_cast<double>(i) * 0.05);
  }
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<cplx> w(n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) w[i] += gram(i, j) * v[j];
    }
    double nrm = 0.0;
    for (const auto& z : w) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (auto& z : w) z /= nrm;
    lam = nrm;
    v = std::move(w);
  }
  return std::sqrt(lam);
}

double reconstruction_error(const ComplexMatrix& m, const qmf::SpectralData& s) {
  const std::size_t n = m.rows;
  ComplexMatrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = s.eigenvalues[i];
  const ComplexMatrix rebuilt =
      qmf::matmul(qmf::matmul(s.eigenvectors, d), qmf::dagger(s.eigenvectors));
  return qmf::frobenius_norm(qmf::sub(rebuilt, m));
}

double unitarity_error(const ComplexMatrix& v) {
  const ComplexMatrix g = qmf::matmul(qmf::dagger(v), v);
  return qmf::frobenius_norm(qmf::sub(g, ComplexMatrix::identity(v.rows)));
}

}  // namespace

TEST_CASE("eig_hermitian pinned diagonal case") {
  ComplexMatrix m(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  const auto s = qmf::eig_hermitian(m);
  CHECK(s.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian reconstruction and unitarity on random input") {
  qmf::Rng rng(31);
  for (std::size_t n : {2u, 3u, 8u, 16u, 32u}) {
    const ComplexMatrix m = random_hermitian(n, rng);
    const auto s = qmf::eig_hermitian(m);
    CHECK(reconstruction_error(m, s) <
          1e-10 * std::max(1.0, qmf::frobenius_norm(m)));
    CHECK(unitarity_error(s.eigenvectors) < 1e-10);
    for (std::size_t k = 1; k < n; ++k) {
      CHECK(s.eigenvalues[k - 1] <= s.eigenvalues[k]);
    }
  }
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
  ComplexMatrix m(2, 2);
  m(0, 1) = cplx(1.0, 0.0);
  m(1, 0) = cplx(0.5, 0.0);
  CHECK_THROWS_AS(qmf::eig_hermitian(m), std::invalid_argument);
}

TEST_CASE("operator_norm pinned value and SVD cross-check") {
  ComplexMatrix m(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = -4.0;
  CHECK(qmf::operator_norm(m) == doctest::Approx(4.0));

  qmf::Rng rng(37);
  for (std::size_t n : {2u, 5u, 12u}) {
    const ComplexMatrix g = random_general(n, n, rng);
    CHECK(qmf::operator_norm(g) ==
          doctest::Approx(power_iteration_norm(g)).epsilon(1e-8));
  }
  const ComplexMatrix rect = random_general(3, 7, rng);
  CHECK(qmf::operator_norm(rect) ==
        doctest::Approx(power_iteration_norm(rect)).epsilon(1e-8));
}

TEST_CASE("singular values match eigenvalue magnitudes for Hermitian input") {
  qmf::Rng rng(41);
  const ComplexMatrix m = random_hermitian(6, rng);
  const auto s = qmf::eig_hermitian(m);
  auto sv = qmf::singular_values(m);
  std::vector<double> mags;
  for (double lam : s.eigenvalues) mags.push_back(std::abs(lam));
  std::sort(mags.rbegin(), mags.rend());
  REQUIRE(sv.size() == mags.size());
  for (std::size_t i = 0; i < sv.size(); ++i) {
    CHECK(sv[i] == doctest::Approx(mags[i]).epsilon(1e-9));
  }
}

TEST_CASE("apply_function_spectral computes matrix functions") {
  qmf::Rng rng(43);
  const ComplexMatrix m = random_hermitian(5, rng);
  // exp(m) via the spectral route against its Taylor series.
  const ComplexMatrix ex =
      qmf::apply_function_spectral(m, [](double x) { return std::exp(x); });
  ComplexMatrix taylor = ComplexMatrix::identity(5);
  ComplexMatrix term = ComplexMatrix::identity(5);
  for (int k = 1; k <= 60; ++k) {
    term = qmf::scale(qmf::matmul(term, m), cplx(1.0 / k, 0.0));
    taylor = qmf::add(taylor, term);
  }
  CHECK(qmf::frobenius_norm(qmf::sub(ex, taylor)) < 1e-9);
}

TEST_CASE("apply_function_spectral flags undefined evaluations") {
  ComplexMatrix m(2, 2);  // eigenvalue 0 meets log
  m(0, 0) = 1.0;
  CHECK_THROWS_AS(
      qmf::apply_function_spectral(m, [](double x) { return std::log(x); }),
      std::runtime_error);
}

TEST_CASE("apply_poly_clenshaw agrees with the spectral route") {
  qmf::Rng rng(47);
  ComplexMatrix h = random_hermitian(6, rng);
  const double nrm = qmf::operator_norm(h);
  h = qmf::scale(h, cplx(0.9 / nrm, 0.0));  // spectrum safely inside [-1, 1]

  std::vector<double> coeffs(25);
  for (auto& c : coeffs) c = rng.normal() / 5.0;
  qmf::ChebyshevSeries series(coeffs, qmf::Parity::none);
  const ComplexMatrix direct = qmf::apply_poly_clenshaw(h, series);
  const auto spec = qmf::eig_hermitian(h);
  const ComplexMatrix viaspec = qmf::apply_cfunction_spectral(
      spec, [&series](double x) { return cplx(qmf::clenshaw_eval(series, x), 0.0); });
  CHECK(qmf::frobenius_norm(qmf::sub(direct, viaspec)) < 1e-10);

  SUBCASE("even fast path matches the generic recurrence") {
    std::vector<double> even(31, 0.0);
    for (std::size_t k = 0; k < even.size(); k += 2) even[k] = rng.normal() / 4.0;
    qmf::ChebyshevSeries fast(even, qmf::Parity::even);
    qmf::ChebyshevSeries slow(even, qmf::Parity::none);
    const ComplexMatrix a = qmf::apply_poly_clenshaw(h, fast);
    const ComplexMatrix b = qmf::apply_poly_clenshaw(h, slow);
    CHECK(qmf::frobenius_norm(qmf::sub(a, b)) < 1e-10);
  }
}

TEST_CASE("apply_poly_clenshaw rejects spectrum outside [-1, 1]") {
  ComplexMatrix m(2, 2);
  m(0, 0) = 1.5;
  qmf::ChebyshevSeries s({0.0, 1.0}, qmf::Parity::odd);
  CHECK_THROWS_AS(qmf::apply_poly_clenshaw(m, s), std::domain_error);
}

TEST_CASE("matmul shape errors carry both shapes") {
  ComplexMatrix a(2, 3), b(2, 2);
  CHECK_THROWS_WITH_AS(qmf::matmul(a, b),
                       "matmul: inner dimensions differ (3 vs 2)",
                       std::invalid_argument);
}
