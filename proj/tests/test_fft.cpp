#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qmf/fft.hpp"
#include "qmf/random.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& in, bool inverse) {
  const std::size_t n = in.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = (inverse ? 2.0 : -2.0) * kPi *
                           static_cast<double>(j * k) / static_cast<double>(n);
      acc += in[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

double node(std::size_t j, std::size_t m) {
  return std::cos(kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(m));
}

double naive_series_eval(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  const double theta = std::acos(x);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    acc += coeffs[k] * std::cos(static_cast<double>(k) * theta);
  }
  return acc;
}

}  // namespace

TEST_CASE("radix-2 transform matches the quadratic DFT") {
  qmf::Rng rng(7);
  for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
    std::vector<std::complex<double>> data(n);
    for (auto& z : data) z = rng.complex_normal();
    auto fast = data;
    qmf::fft::transform(fast, false);
    const auto slow = naive_dft(data, false);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(fast[k] - slow[k]) < 1e-9);
    }
    auto back = fast;
    qmf::fft::transform(back, true);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(back[k] / static_cast<double>(n) - data[k]) < 1e-10);
    }
  }
}

TEST_CASE("transform rejects non power-of-two sizes") {
  std::vector<std::complex<double>> data(3);
  CHECK_THROWS_AS(qmf::fft::transform(data, false), std::invalid_argument);
}

TEST_CASE("chebyshev_analysis inverts chebyshev_synthesis") {
  qmf::Rng rng(11);
  for (std::size_t m : {2u, 16u, 128u}) {
    std::vector<double> coeffs(m);
    for (auto& c : coeffs) c = rng.normal();
    const auto values = qmf::fft::chebyshev_synthesis(coeffs, m);
    const auto rec = qmf::fft::chebyshev_analysis(values);
    for (std::size_t k = 0; k < m; ++k) {
      CHECK(std::abs(rec[k] - coeffs[k]) < 1e-10);
    }
  }
}

TEST_CASE("chebyshev_synthesis agrees with direct evaluation at the nodes") {
  qmf::Rng rng(13);
  const std::size_t m = 64;
  std::vector<double> coeffs(20);
  for (auto& c : coeffs) c = rng.normal();
  const auto values = qmf::fft::chebyshev_synthesis(coeffs, m);
  for (std::size_t j = 0; j < m; ++j) {
    CHECK(std::abs(values[j] - naive_series_eval(coeffs, node(j, m))) < 1e-11);
  }
}

TEST_CASE("chebyshev_analysis recovers interpolation coefficients") {
  // Values of T_3 at 8 nodes must come back as the unit coefficient vector.
  const std::size_t m = 8;
  std::vector<double> values(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = node(j, m);
    values[j] = 4.0 * x * x * x - 3.0 * x;
  }
  const auto coeffs = qmf::fft::chebyshev_analysis(values);
  for (std::size_t k = 0; k < m; ++k) {
    CHECK(std::abs(coeffs[k] - (k == 3 ? 1.0 : 0.0)) < 1e-12);
  }
}
