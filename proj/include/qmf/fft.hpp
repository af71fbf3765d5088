#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qmf::fft {

bool is_pow2(std::size_t n);
std::size_t next_pow2(std::size_t n);

// In-place radix-2 transform; data.size() must be a power of two.
// Forward uses exp(-2*pi*i*jk/n); inverse uses exp(+2*pi*i*jk/n) and does
// not apply the 1/n scaling (callers that need it scale themselves).
void transform(std::vector<std::complex<double>>& data, bool inverse);

// Values at the M Chebyshev nodes x_j = cos(pi*(j+1/2)/M), j = 0..M-1,
// mapped to coefficients c_k of sum_k c_k T_k(x), k = 0..M-1.  M must be
// a power of two.
std::vector<double> chebyshev_analysis(const std::vector<double>& values);

// Coefficients (count <= M) evaluated at the M Chebyshev nodes above.
// M must be a power of two.
std::vector<double> chebyshev_synthesis(const std::vector<double>& coeffs,
                                        std::size_t M);

}  // namespace qmf::fft
