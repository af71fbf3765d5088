#pragma once

#include <cstddef>
#include <vector>

#include "qmf/matfun.hpp"
#include "qmf/random.hpp"

namespace qmf {

// A validated state: the matrix together with its eigensystem (computed
// once at validation) and the tolerance below which eigenvalues count as
// exact zeros.
struct DensityMatrix {
  ComplexMatrix matrix;
  SpectralData spectral;
  double zero_tol = 1e-12;

  std::size_t dim() const { return matrix.rows; }
};

struct PureState {
  std::vector<cplx> amplitudes;
  std::vector<std::size_t> subsystem_dims;

  PureState() = default;
  // Validates that the dims multiply out to the vector length and that
  // the 2-norm is 1 within 1e-10.
  PureState(std::vector<cplx> amps, std::vector<std::size_t> dims);

  std::size_t dim() const { return amplitudes.size(); }
};

struct BlockEncoding {
  ComplexMatrix unitary;  // 2d x 2d
  std::size_t encoded_dim = 0;
};

// Checks square shape, Hermiticity (1e-10), unit trace (1e-9) and
// positivity (eigenvalues >= -1e-10), caching the eigensystem.
DensityMatrix validate_density(const ComplexMatrix& m, double zero_tol = 1e-12);

// kappa = 1 / (smallest eigenvalue above zero_tol).
double spectral_floor(const DensityMatrix& rho);

// |psi> = sum_i sqrt(lambda_i) |v_i>_A |i>_B on d x d.
PureState purify(const DensityMatrix& rho);

// Partial trace over the complement of `keep` (strictly increasing
// subsystem indices).
DensityMatrix reduced_density(const PureState& state,
                              const std::vector<std::size_t>& keep);
DensityMatrix reduced_density(const DensityMatrix& rho,
                              const std::vector<std::size_t>& dims,
                              const std::vector<std::size_t>& keep);

// Direct dilation U = [[rho, S], [S, -rho]] with S = sqrt(I - rho^2).
BlockEncoding block_encode(const DensityMatrix& rho);

// -sum lambda ln lambda over eigenvalues above zero_tol, in nats.
double von_neumann_entropy(const DensityMatrix& rho);

// Reproducible ensembles for tests and drivers.
ComplexMatrix random_ginibre(Rng& rng, std::size_t d);
DensityMatrix random_density(Rng& rng, std::size_t d);
// (1 - weight) rho + weight I/d, revalidated.
DensityMatrix mix_with_identity(const DensityMatrix& rho, double weight);
// Random Hermitian rescaled to unit operator norm.
ComplexMatrix random_hermitian_unit(Rng& rng, std::size_t d);
PureState random_pure(Rng& rng, std::vector<std::size_t> dims);

}  // namespace qmf
