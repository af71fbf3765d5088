#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmf/encoding.hpp"
#include "qmf/matfun.hpp"

namespace qmf {

enum class EntropyMethod { qpe_sampled, deterministic_functional };

struct EntropyEstimate {
  double value = 0.0;  // nats
  double epsilon = 0.0;
  double delta = 0.0;
  long long shots = 0;
  EntropyMethod method = EntropyMethod::qpe_sampled;
  double kappa_used = 0.0;
  std::string note;  // degenerate-case remark, empty otherwise
};

struct CorrelatorPoint {
  double s = 0.0;  // modular time
  double t = 0.0;  // coordinate time
  cplx value{0.0, 0.0};
};

enum class CorrelatorMode { exact, polynomial };

// Idealized phase estimation on a mixed state: each shot independently
// returns phases[k] with probability eigenvalue_k, reproducibly for a
// given seed.  phases[k] is attached to the k-th entry of the state's
// spectral data, i.e. ascending eigenvalue order.  bits = 0 reads the
// phase exactly; a positive value rounds every sample to the nearest
// multiple of 2 pi / 2^bits.
std::vector<double> qpe_sample(const DensityMatrix& rho,
                               const std::vector<double>& phases,
                               long long shots, std::uint64_t seed,
                               long long bits = 0);

// ceil((ln kappa)^2 / (delta epsilon^2)).
long long shots_required(double kappa, double epsilon, double delta);

// Samples theta_k = -pi ln(lambda_k)/ln(kappa) and rescales the sample
// mean by ln(kappa)/pi.  A state with kappa <= 1 (pure) is degenerate:
// the entropy is 0 without sampling and the note says so.
EntropyEstimate entropy_qpe(const DensityMatrix& rho, double epsilon,
                            double delta, std::uint64_t seed);

// Deterministic estimate -sum_i lambda_i f_N(lambda_i) rect(lambda_i)
// from the factorized log approximation at an internal kappa well above
// the ceil(n ln n / epsilon) + 1 floor, within epsilon of the entropy
// even when eigenvalues fall below the plateau.  degree_cap = 0 is
// unlimited; a positive cap raises DegreeCapError before the build.
double entropy_functional(const DensityMatrix& rho, double epsilon,
                          long long degree_cap = 0);

// entropy_functional wrapped in the common report shape (no sampling, so
// delta and shots stay 0 and kappa_used records the internal kappa).
EntropyEstimate entropy_functional_estimate(const DensityMatrix& rho,
                                            double epsilon,
                                            long long degree_cap = 0);

// W(s,t) = Tr(rho {rho^{-is} psi_r rho^{is}, psi_l(t)}).  When h_l is
// given, psi_l(t) = e^{i h_l t} psi_l e^{-i h_l t}; otherwise psi_l is
// taken as already evolved.  Polynomial mode routes the modular factor
// through approx_flow at epsilon/2 so the correlator lands within
// epsilon of the exact mode.
CorrelatorPoint correlator(const DensityMatrix& rho,
                           const ComplexMatrix& psi_r,
                           const ComplexMatrix& psi_l, double s, double t,
                           const ComplexMatrix* h_l = nullptr,
                           CorrelatorMode mode = CorrelatorMode::exact,
                           double epsilon = 1e-2);

// S(Tr_A sigma(t)) with sigma(t) = (rho_AB^{-it} x I_C) sigma
// (rho_AB^{+it} x I_C) and rho_AB = Tr_C sigma.
double entropy_under_flow(const DensityMatrix& sigma,
                          const std::vector<std::size_t>& dims, double t);

// 3 (S(t2) - S(t1)) / (pi (t2 - t1)) from two entropy_under_flow calls.
double chiral_slope(const DensityMatrix& sigma,
                    const std::vector<std::size_t>& dims, double t1,
                    double t2);

}  // namespace qmf
