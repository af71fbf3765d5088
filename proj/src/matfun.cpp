#include "qmf/matfun.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qmf {

namespace {

void check_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                      const char* who) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch (" +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                " vs " + std::to_string(b.rows) + "x" +
                                std::to_string(b.cols) + ")");
  }
}

void check_square(const ComplexMatrix& m, const char* who) {
  if (!m.square()) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square, got " +
                                std::to_string(m.rows) + "x" + std::to_string(m.cols));
  }
}

// Off-diagonal Frobenius weight, the Jacobi convergence measure.
double off_diag_sq(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (i != j) s += std::norm(a(i, j));
    }
  }
  return s;
}

}  // namespace

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = cplx(1.0, 0.0);
  return m;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols != b.rows) {
    throw std::invalid_argument("matmul: inner dimensions differ (" +
                                std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + ")");
  }
  ComplexMatrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      const cplx* brow = &b.entries[k * b.cols];
      cplx* orow = &out.entries[i * out.cols];
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

ComplexMatrix dagger(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = std::conj(m(i, j));
  }
  return out;
}

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b, "add");
  ComplexMatrix out = a;
  for (std::size_t i = 0; i < out.entries.size(); ++i) out.entries[i] += b.entries[i];
  return out;
}

ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b, "sub");
  ComplexMatrix out = a;
  for (std::size_t i = 0; i < out.entries.size(); ++i) out.entries[i] -= b.entries[i];
  return out;
}

ComplexMatrix scale(const ComplexMatrix& m, cplx factor) {
  ComplexMatrix out = m;
  for (auto& z : out.entries) z *= factor;
  return out;
}

double frobenius_norm(const ComplexMatrix& m) {
  double s = 0.0;
  for (const auto& z : m.entries) s += std::norm(z);
  return std::sqrt(s);
}

double max_abs(const ComplexMatrix& m) {
  double s = 0.0;
  for (const auto& z : m.entries) s = std::max(s, std::abs(z));
  return s;
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (!m.square()) return 1e300;
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = i; j < m.cols; ++j) {
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  return worst;
}

SpectralData eig_hermitian(const ComplexMatrix& m) {
  check_square(m, "eig_hermitian");
  const double defect = hermiticity_defect(m);
  if (defect > 1e-10) {
    throw std::invalid_argument("eig_hermitian: matrix is not Hermitian (defect " +
                                std::to_string(defect) + ")");
  }
  const std::size_t n = m.rows;
  // Work on the symmetrized copy so roundoff ghosts cannot bias the sweep.
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    }
  }
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double fro2 = frobenius_norm(a) * frobenius_norm(a);
  const double stop = std::max(fro2 * 1e-26, 1e-300);

  for (int sweep = 0; sweep < 100 && off_diag_sq(a) > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        const cplx phase = apq / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        // Small root of t^2 - 2 tau t - 1 = 0, the numerically stable choice.
        const double t =
            (tau >= 0.0 ? -1.0 : 1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx se_m = s * std::conj(phase);  // s e^{-i phi}
        const cplx se_p = s * phase;             // s e^{+i phi}

        // Right-multiply by the rotation: columns p and q.
        for (std::size_t r = 0; r < n; ++r) {
          const cplx arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp + se_m * arq;
          a(r, q) = -se_p * arp + c * arq;
        }
        // Left-multiply by its adjoint: rows p and q.
        for (std::size_t r = 0; r < n; ++r) {
          const cplx apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr + se_p * aqr;
          a(q, r) = -se_m * apr + c * aqr;
        }
        // Accumulate eigenvectors.
        for (std::size_t r = 0; r < n; ++r) {
          const cplx vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp + se_m * vrq;
          v(r, q) = -se_p * vrp + c * vrq;
        }
        a(p, q) = cplx(0.0, 0.0);
        a(q, p) = cplx(0.0, 0.0);
      }
    }
  }
  if (n > 1 && off_diag_sq(a) > std::max(fro2, 1.0) * 1e-18) {
    throw std::runtime_error("eig_hermitian: Jacobi sweeps failed to converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&diag](std::size_t l, std::size_t r) { return diag[l] < diag[r]; });

  SpectralData out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = diag[src];
    // Fix the free phase: largest-magnitude entry made real positive.
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double mag = std::abs(v(r, src));
      if (mag > best + 1e-15) {
        best = mag;
        pivot = r;
      }
    }
    cplx rot(1.0, 0.0);
    if (best > 1e-300) rot = std::conj(v(pivot, src)) / std::abs(v(pivot, src));
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, src) * rot;
  }
  return out;
}

ComplexMatrix apply_cfunction_spectral(const SpectralData& s,
                                       const std::function<cplx(double)>& f) {
  const std::size_t n = s.eigenvalues.size();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx fk = f(s.eigenvalues[k]);
    if (!std::isfinite(fk.real()) || !std::isfinite(fk.imag())) {
      throw std::runtime_error(
          "apply_function_spectral: function undefined at eigenvalue " +
          std::to_string(s.eigenvalues[k]));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = s.eigenvectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) {
        out(i, j) += vik * std::conj(s.eigenvectors(j, k));
      }
    }
  }
  return out;
}

ComplexMatrix apply_function_spectral(const SpectralData& s,
                                      const std::function<double(double)>& f) {
  return apply_cfunction_spectral(s, [&f](double x) { return cplx(f(x), 0.0); });
}

ComplexMatrix apply_function_spectral(const ComplexMatrix& m,
                                      const std::function<double(double)>& f) {
  return apply_function_spectral(eig_hermitian(m), f);
}

ComplexMatrix apply_poly_clenshaw(const ComplexMatrix& m,
                                  const ChebyshevSeries& series) {
  check_square(m, "apply_poly_clenshaw");
  if (hermiticity_defect(m) > 1e-8) {
    throw std::invalid_argument("apply_poly_clenshaw: matrix must be Hermitian");
  }
  const std::size_t n = m.rows;
  {
    const auto spec = eig_hermitian(m);
    for (double lam : spec.eigenvalues) {
      if (std::abs(lam) > 1.0 + 1e-8) {
        throw std::domain_error(
            "apply_poly_clenshaw: eigenvalue " + std::to_string(lam) +
            " lies outside [-1, 1]");
      }
    }
  }
  if (series.coefficients.empty()) return ComplexMatrix(n, n);

  // For an even series, T_{2k}(X) = T_k(2X^2 - 1) halves the iteration count.
  ComplexMatrix x = m;
  std::vector<double> coeffs;
  if (series.parity == Parity::even) {
    ComplexMatrix x2 = matmul(m, m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        x(i, j) = 2.0 * x2(i, j) - (i == j ? cplx(1.0, 0.0) : cplx(0.0, 0.0));
      }
    }
    coeffs.reserve((series.coefficients.size() + 1) / 2);
    for (std::size_t k = 0; k < series.coefficients.size(); k += 2) {
      coeffs.push_back(series.coefficients[k]);
    }
  } else {
    coeffs = series.coefficients;
  }

  ComplexMatrix b1(n, n), b2(n, n), tmp(n, n);
  for (std::size_t k = coeffs.size(); k-- > 1;) {
    // tmp = c_k I + 2 X b1 - b2
    tmp = matmul(x, b1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        tmp(i, j) = (i == j ? cplx(coeffs[k], 0.0) : cplx(0.0, 0.0)) +
                    2.0 * tmp(i, j) - b2(i, j);
      }
    }
    b2 = b1;
    b1 = tmp;
  }
  ComplexMatrix out = matmul(x, b1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) += (i == j ? cplx(coeffs[0], 0.0) : cplx(0.0, 0.0)) - b2(i, j);
    }
  }
  return out;
}

std::vector<double> singular_values(const ComplexMatrix& m) {
  const ComplexMatrix gram = matmul(dagger(m), m);
  auto spec = eig_hermitian(gram);
  std::vector<double> out;
  out.reserve(spec.eigenvalues.size());
  for (auto it = spec.eigenvalues.rbegin(); it != spec.eigenvalues.rend(); ++it) {
    out.push_back(std::sqrt(std::max(*it, 0.0)));
  }
  return out;
}

double operator_norm(const ComplexMatrix& m) {
  if (m.entries.empty()) return 0.0;
  const auto sv = singular_values(m);
  return sv.front();
}

}  // namespace qmf
