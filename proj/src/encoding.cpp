#include "qmf/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qmf {

namespace {

// Full-matrix index offsets contributed by one group of subsystem digits.
// slots[i] is the position of digit i inside the full dims list.
std::vector<std::size_t> index_offsets(const std::vector<std::size_t>& dims,
                                       const std::vector<std::size_t>& slots) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t s = dims.size(); s-- > 1;) {
    strides[s - 1] = strides[s] * dims[s];
  }
  std::size_t count = 1;
  for (std::size_t slot : slots) count *= dims[slot];
  std::vector<std::size_t> offsets(count, 0);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = slots.size(); i-- > 0;) {
      const std::size_t d = dims[slots[i]];
      offsets[idx] += (rest % d) * strides[slots[i]];
      rest /= d;
    }
  }
  return offsets;
}

void check_keep(const std::vector<std::size_t>& dims,
                const std::vector<std::size_t>& keep) {
  if (keep.empty()) {
    throw std::invalid_argument("reduced_density: keep set must be nonempty");
  }
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= dims.size()) {
      std::ostringstream msg;
      msg << "reduced_density: subsystem index " << keep[i] << " out of range for "
          << dims.size() << " subsystems";
      throw std::invalid_argument(msg.str());
    }
    if (i > 0 && keep[i] <= keep[i - 1]) {
      throw std::invalid_argument(
          "reduced_density: keep indices must be strictly increasing");
    }
  }
}

std::vector<std::size_t> complement_of(const std::vector<std::size_t>& dims,
                                       const std::vector<std::size_t>& keep) {
  std::vector<std::size_t> traced;
  std::size_t next = 0;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (next < keep.size() && keep[next] == s) {
      ++next;
    } else {
      traced.push_back(s);
    }
  }
  return traced;
}

}  // namespace

PureState::PureState(std::vector<cplx> amps, std::vector<std::size_t> dims)
    : amplitudes(std::move(amps)), subsystem_dims(std::move(dims)) {
  if (subsystem_dims.empty()) {
    throw std::invalid_argument("PureState: subsystem dims must be nonempty");
  }
  std::size_t product = 1;
  for (std::size_t d : subsystem_dims) {
    if (d == 0) throw std::invalid_argument("PureState: zero subsystem dim");
    product *= d;
  }
  if (product != amplitudes.size()) {
    std::ostringstream msg;
    msg << "PureState: dims multiply to " << product << " but the vector has "
        << amplitudes.size() << " amplitudes";
    throw std::invalid_argument(msg.str());
  }
  double norm2 = 0.0;
  for (const cplx& a : amplitudes) norm2 += std::norm(a);
  if (std::fabs(std::sqrt(norm2) - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "PureState: 2-norm is " << std::sqrt(norm2) << ", must be 1";
    throw std::invalid_argument(msg.str());
  }
}

DensityMatrix validate_density(const ComplexMatrix& m, double zero_tol) {
  if (!m.square() || m.rows == 0) {
    std::ostringstream msg;
    msg << "validate_density: matrix must be square and nonempty, got "
        << m.rows << "x" << m.cols;
    throw std::invalid_argument(msg.str());
  }
  if (!(zero_tol >= 0.0)) {
    throw std::invalid_argument("validate_density: zero_tol must be >= 0");
  }
  const double defect = hermiticity_defect(m);
  if (defect > 1e-10) {
    std::ostringstream msg;
    msg << "validate_density: matrix is not Hermitian (defect " << defect << ")";
    throw std::invalid_argument(msg.str());
  }
  cplx tr(0.0, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) tr += m(i, i);
  if (std::fabs(tr.real() - 1.0) > 1e-9 || std::fabs(tr.imag()) > 1e-9) {
    std::ostringstream msg;
    msg << "validate_density: trace must be 1, got (" << tr.real() << ", "
        << tr.imag() << ")";
    throw std::invalid_argument(msg.str());
  }
  DensityMatrix rho;
  rho.matrix = m;
  rho.spectral = eig_hermitian(m);
  rho.zero_tol = zero_tol;
  if (rho.spectral.eigenvalues.front() < -1e-10) {
    std::ostringstream msg;
    msg << "validate_density: negative eigenvalue "
        << rho.spectral.eigenvalues.front();
    throw std::invalid_argument(msg.str());
  }
  return rho;
}

double spectral_floor(const DensityMatrix& rho) {
  for (double lambda : rho.spectral.eigenvalues) {
    if (lambda > rho.zero_tol) return 1.0 / lambda;
  }
  throw std::runtime_error(
      "spectral_floor: no eigenvalue above zero_tol, state is degenerate");
}

PureState purify(const DensityMatrix& rho) {
  const std::size_t d = rho.dim();
  std::vector<cplx> amps(d * d, cplx(0.0, 0.0));
  for (std::size_t b = 0; b < d; ++b) {
    const double root = std::sqrt(std::max(rho.spectral.eigenvalues[b], 0.0));
    if (root == 0.0) continue;
    for (std::size_t a = 0; a < d; ++a) {
      amps[a * d + b] = root * rho.spectral.eigenvectors(a, b);
    }
  }
  double norm2 = 0.0;
  for (const cplx& a : amps) norm2 += std::norm(a);
  const double inv = 1.0 / std::sqrt(norm2);
  for (cplx& a : amps) a *= inv;
  return PureState(std::move(amps), {d, d});
}

DensityMatrix reduced_density(const PureState& state,
                              const std::vector<std::size_t>& keep) {
  const std::vector<std::size_t>& dims = state.subsystem_dims;
  check_keep(dims, keep);
  const std::vector<std::size_t> traced = complement_of(dims, keep);
  const std::vector<std::size_t> kept_offsets = index_offsets(dims, keep);
  const std::vector<std::size_t> traced_offsets = index_offsets(dims, traced);
  const std::size_t dk = kept_offsets.size();
  ComplexMatrix out(dk, dk);
  for (std::size_t i = 0; i < dk; ++i) {
    for (std::size_t j = 0; j < dk; ++j) {
      cplx acc(0.0, 0.0);
      for (std::size_t toff : traced_offsets) {
        acc += state.amplitudes[kept_offsets[i] + toff] *
               std::conj(state.amplitudes[kept_offsets[j] + toff]);
      }
      out(i, j) = acc;
    }
  }
  return validate_density(out);
}

DensityMatrix reduced_density(const DensityMatrix& rho,
                              const std::vector<std::size_t>& dims,
                              const std::vector<std::size_t>& keep) {
  std::size_t product = 1;
  for (std::size_t d : dims) product *= d;
  if (dims.empty() || product != rho.dim()) {
    std::ostringstream msg;
    msg << "reduced_density: dims multiply to " << product
        << " but the state has dimension " << rho.dim();
    throw std::invalid_argument(msg.str());
  }
  check_keep(dims, keep);
  const std::vector<std::size_t> traced = complement_of(dims, keep);
  const std::vector<std::size_t> kept_offsets = index_offsets(dims, keep);
  const std::vector<std::size_t> traced_offsets = index_offsets(dims, traced);
  const std::size_t dk = kept_offsets.size();
  ComplexMatrix out(dk, dk);
  for (std::size_t i = 0; i < dk; ++i) {
    for (std::size_t j = 0; j < dk; ++j) {
      cplx acc(0.0, 0.0);
      for (std::size_t toff : traced_offsets) {
        acc += rho.matrix.entries[(kept_offsets[i] + toff) * rho.dim() +
                                  kept_offsets[j] + toff];
      }
      out(i, j) = acc;
    }
  }
  return validate_density(out, rho.zero_tol);
}

BlockEncoding block_encode(const DensityMatrix& rho) {
  const std::size_t d = rho.dim();
  const ComplexMatrix comp = apply_function_spectral(
      rho.spectral,
      [](double lambda) { return std::sqrt(std::max(0.0, 1.0 - lambda * lambda)); });
  ComplexMatrix u(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      u(i, j) = rho.matrix(i, j);
      u(i, d + j) = comp(i, j);
      u(d + i, j) = comp(i, j);
      u(d + i, d + j) = -rho.matrix(i, j);
    }
  }
  BlockEncoding enc;
  enc.unitary = std::move(u);
  enc.encoded_dim = d;
  return enc;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double lambda : rho.spectral.eigenvalues) {
    if (lambda > rho.zero_tol) s -= lambda * std::log(lambda);
  }
  return s;
}

ComplexMatrix random_ginibre(Rng& rng, std::size_t d) {
  ComplexMatrix g(d, d);
  for (cplx& e : g.entries) e = rng.complex_normal();
  return g;
}

DensityMatrix random_density(Rng& rng, std::size_t d) {
  const ComplexMatrix g = random_ginibre(rng, d);
  ComplexMatrix m = matmul(g, dagger(g));
  double tr = 0.0;
  for (std::size_t i = 0; i < d; ++i) tr += m(i, i).real();
  for (cplx& e : m.entries) e /= tr;
  return validate_density(m);
}

DensityMatrix mix_with_identity(const DensityMatrix& rho, double weight) {
  if (!(weight >= 0.0) || !(weight <= 1.0)) {
    throw std::invalid_argument("mix_with_identity: weight must lie in [0,1]");
  }
  const std::size_t d = rho.dim();
  ComplexMatrix m = rho.matrix;
  for (cplx& e : m.entries) e *= (1.0 - weight);
  for (std::size_t i = 0; i < d; ++i) {
    m(i, i) += weight / static_cast<double>(d);
  }
  return validate_density(m, rho.zero_tol);
}

ComplexMatrix random_hermitian_unit(Rng& rng, std::size_t d) {
  const ComplexMatrix g = random_ginibre(rng, d);
  ComplexMatrix h = add(g, dagger(g));
  for (cplx& e : h.entries) e *= 0.5;
  const double norm = operator_norm(h);
  for (cplx& e : h.entries) e /= norm;
  return h;
}

PureState random_pure(Rng& rng, std::vector<std::size_t> dims) {
  std::size_t product = 1;
  for (std::size_t d : dims) product *= d;
  std::vector<cplx> amps(product);
  for (cplx& a : amps) a = rng.complex_normal();
  double norm2 = 0.0;
  for (const cplx& a : amps) norm2 += std::norm(a);
  const double inv = 1.0 / std::sqrt(norm2);
  for (cplx& a : amps) a *= inv;
  return PureState(std::move(amps), std::move(dims));
}

}  // namespace qmf
