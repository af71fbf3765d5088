#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "qmf/chebyshev.hpp"

namespace qmf {

using cplx = std::complex<double>;

struct ComplexMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<cplx> entries;  // row-major

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t r, std::size_t c)
      : rows(r), cols(c), entries(r * c, cplx(0.0, 0.0)) {}

  static ComplexMatrix identity(std::size_t n);

  cplx& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return entries[i * cols + j];
  }
  bool square() const { return rows == cols; }
};

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix dagger(const ComplexMatrix& m);
ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix scale(const ComplexMatrix& m, cplx factor);
double frobenius_norm(const ComplexMatrix& m);
double max_abs(const ComplexMatrix& m);
double hermiticity_defect(const ComplexMatrix& m);  // max |m - m^dagger|

// Eigenvalues ascending; eigenvectors stored as the columns of a unitary.
struct SpectralData {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;
};

// Cyclic Jacobi for Hermitian input (checked to 1e-10).
SpectralData eig_hermitian(const ComplexMatrix& m);

// V f(D) V^dagger.  Throws if f is not finite at an eigenvalue.
ComplexMatrix apply_function_spectral(const SpectralData& s,
                                      const std::function<double(double)>& f);
ComplexMatrix apply_function_spectral(const ComplexMatrix& m,
                                      const std::function<double(double)>& f);
// Complex-valued variant for unitary functions of a Hermitian matrix.
ComplexMatrix apply_cfunction_spectral(const SpectralData& s,
                                       const std::function<cplx(double)>& f);

// Matrix Clenshaw recurrence; the spectrum must lie in [-1-1e-8, 1+1e-8].
// Even series are evaluated through T_{2n}(X) = T_n(2X^2 - 1).
ComplexMatrix apply_poly_clenshaw(const ComplexMatrix& m,
                                  const ChebyshevSeries& series);

std::vector<double> singular_values(const ComplexMatrix& m);  // descending
double operator_norm(const ComplexMatrix& m);

}  // namespace qmf
