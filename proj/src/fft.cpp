#include "qmf/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace qmf::fft {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void transform(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_pow2(n)) {
    throw std::invalid_argument("fft::transform: size " + std::to_string(n) +
                                " is not a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> chebyshev_analysis(const std::vector<double>& values) {
  const std::size_t m = values.size();
  if (!is_pow2(m)) {
    throw std::invalid_argument("chebyshev_analysis: node count must be a power of two");
  }
  // DCT-II via a same-size FFT after the even/odd node reordering.
  std::vector<std::complex<double>> work(m);
  for (std::size_t j = 0; j < m / 2; ++j) {
    work[j] = values[2 * j];
    work[m - 1 - j] = values[2 * j + 1];
  }
  if (m == 1) work[0] = values[0];
  transform(work, false);
  std::vector<double> coeffs(m);
  const double scale = 2.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double angle = -kPi * static_cast<double>(k) / (2.0 * static_cast<double>(m));
    const std::complex<double> tw(std::cos(angle), std::sin(angle));
    coeffs[k] = scale * (tw * work[k]).real();
  }
  coeffs[0] *= 0.5;
  return coeffs;
}

std::vector<double> chebyshev_synthesis(const std::vector<double>& coeffs,
                                        std::size_t M) {
  if (!is_pow2(M)) {
    throw std::invalid_argument("chebyshev_synthesis: node count must be a power of two");
  }
  if (coeffs.size() > M) {
    throw std::invalid_argument("chebyshev_synthesis: more coefficients than nodes");
  }
  // v_j = Re sum_k c_k exp(i*pi*k*(2j+1)/(2M)): twiddle then a length-2M
  // inverse-direction FFT, reading off the first M outputs.
  std::vector<std::complex<double>> work(2 * M, std::complex<double>(0.0, 0.0));
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double angle = kPi * static_cast<double>(k) / (2.0 * static_cast<double>(M));
    work[k] = coeffs[k] * std::complex<double>(std::cos(angle), std::sin(angle));
  }
  transform(work, true);
  std::vector<double> values(M);
  for (std::size_t j = 0; j < M; ++j) values[j] = work[j].real();
  return values;
}

}  // namespace qmf::fft
