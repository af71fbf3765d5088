#include "qmf/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qmf/chebyshev.hpp"
#include "qmf/flow.hpp"
#include "qmf/mh_poly.hpp"
#include "qmf/random.hpp"

namespace qmf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Margin applied to the floor ceil(n ln n / epsilon) + 1: the
// floor alone leaves the transition band of the plateau wide enough to
// eat the whole budget, so the builder runs at six times the floor and
// a fifth of epsilon, keeping the plateau error plus the small-eigenvalue
// leakage below epsilon.
constexpr double kFunctionalKappaMargin = 6.0;
constexpr double kFunctionalEpsSplit = 5.0;

void check_probability(double value, const char* who, const char* name) {
  if (!(value > 0.0) || !(value < 1.0)) {
    std::ostringstream msg;
    msg << who << ": " << name << " must lie in (0, 1), got " << value;
    throw std::invalid_argument(msg.str());
  }
}

ComplexMatrix kron_with_identity(const ComplexMatrix& a, std::size_t d_c) {
  ComplexMatrix out(a.rows * d_c, a.cols * d_c);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      for (std::size_t c = 0; c < d_c; ++c) {
        out(i * d_c + c, j * d_c + c) = a(i, j);
      }
    }
  }
  return out;
}

cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      acc += a(i, k) * b(k, i);
    }
  }
  return acc;
}

}  // namespace

std::vector<double> qpe_sample(const DensityMatrix& rho,
                               const std::vector<double>& phases,
                               long long shots, std::uint64_t seed,
                               long long bits) {
  if (shots < 1) {
    throw std::invalid_argument("qpe_sample: shots must be at least 1, got " +
                                std::to_string(shots));
  }
  if (phases.size() != rho.dim()) {
    std::ostringstream msg;
    msg << "qpe_sample: " << phases.size() << " phases for dimension "
        << rho.dim();
    throw std::invalid_argument(msg.str());
  }
  if (bits < 0 || bits > 62) {
    throw std::invalid_argument("qpe_sample: bits must lie in [0, 62]");
  }

  std::vector<double> weights(rho.dim());
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    weights[i] = std::max(0.0, rho.spectral.eigenvalues[i]);
  }

  const double step = bits > 0 ? 2.0 * kPi / std::exp2(bits) : 0.0;
  Rng rng(seed);
  std::vector<double> samples(static_cast<std::size_t>(shots));
  for (auto& s : samples) {
    s = phases[rng.categorical(weights)];
    if (bits > 0) s = std::round(s / step) * step;
  }
  return samples;
}

long long shots_required(double kappa, double epsilon, double delta) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("shots_required: kappa must be positive");
  }
  check_probability(epsilon, "shots_required", "epsilon");
  check_probability(delta, "shots_required", "delta");
  const double lk = std::log(kappa);
  return static_cast<long long>(
      std::ceil(lk * lk / (delta * epsilon * epsilon)));
}

EntropyEstimate entropy_qpe(const DensityMatrix& rho, double epsilon,
                            double delta, std::uint64_t seed) {
  check_probability(epsilon, "entropy_qpe", "epsilon");
  check_probability(delta, "entropy_qpe", "delta");

  EntropyEstimate est;
  est.epsilon = epsilon;
  est.delta = delta;
  est.method = EntropyMethod::qpe_sampled;
  est.kappa_used = spectral_floor(rho);

  if (est.kappa_used <= 1.0) {
    est.value = 0.0;
    est.note = "pure state: every phase is 0, entropy 0 without sampling";
    return est;
  }

  const double log_kappa = std::log(est.kappa_used);
  std::vector<double> phases(rho.dim(), 0.0);
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    const double lam = rho.spectral.eigenvalues[i];
    if (lam <= rho.zero_tol) continue;  // weight ~0, phase pinned at 0
    phases[i] = std::clamp(-kPi * std::log(lam) / log_kappa, 0.0, kPi);
  }

  est.shots = shots_required(est.kappa_used, epsilon, delta);
  const std::vector<double> samples =
      qpe_sample(rho, phases, est.shots, seed);
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  est.value = log_kappa / kPi * mean;
  return est;
}

double entropy_functional(const DensityMatrix& rho, double epsilon,
                          long long degree_cap) {
  return entropy_functional_estimate(rho, epsilon, degree_cap).value;
}

EntropyEstimate entropy_functional_estimate(const DensityMatrix& rho,
                                            double epsilon,
                                            long long degree_cap) {
  check_probability(epsilon, "entropy_functional", "epsilon");
  const double n = static_cast<double>(rho.dim());
  const double floor_kappa = std::ceil(n * std::log(n) / epsilon) + 1.0;
  const double kappa = kFunctionalKappaMargin * floor_kappa;
  if (degree_cap > 0) {
    // mh_parts_cached halves its epsilon for the log factor.
    const long long planned = 2 * log_degree_for_tail(
        kappa, epsilon / (2.0 * kFunctionalEpsSplit));
    if (planned > degree_cap) {
      std::ostringstream msg;
      msg << "entropy_functional: log polynomial degree " << planned
          << " exceeds the cap " << degree_cap;
      throw DegreeCapError(msg.str());
    }
  }
  const auto parts = mh_parts_cached(kappa, epsilon / kFunctionalEpsSplit);

  EntropyEstimate est;
  est.method = EntropyMethod::deterministic_functional;
  est.epsilon = epsilon;
  est.kappa_used = kappa;
  for (double lam : rho.spectral.eigenvalues) {
    if (lam <= 0.0) continue;
    est.value += lam * parts->eval_unnormalized(std::min(lam, 1.0));
  }
  return est;
}

CorrelatorPoint correlator(const DensityMatrix& rho,
                           const ComplexMatrix& psi_r,
                           const ComplexMatrix& psi_l, double s, double t,
                           const ComplexMatrix* h_l, CorrelatorMode mode,
                           double epsilon) {
  const std::size_t d = rho.dim();
  auto check_dim = [d](const ComplexMatrix& m, const char* name) {
    if (!m.square() || m.rows != d) {
      std::ostringstream msg;
      msg << "correlator: " << name << " shape " << m.rows << "x" << m.cols
          << " does not match state dimension " << d;
      throw std::invalid_argument(msg.str());
    }
  };
  check_dim(psi_r, "psi_r");
  check_dim(psi_l, "psi_l");

  ComplexMatrix flowed_r;
  if (mode == CorrelatorMode::exact) {
    flowed_r = exact_flow(rho, psi_r, s);
  } else {
    flowed_r = approx_flow(rho, psi_r, s, epsilon / 2.0).approx_operator;
  }

  ComplexMatrix evolved_l = psi_l;
  if (h_l != nullptr) {
    check_dim(*h_l, "h_l");
    if (hermiticity_defect(*h_l) > 1e-8) {
      throw std::invalid_argument("correlator: h_l must be Hermitian");
    }
    const ComplexMatrix u = apply_cfunction_spectral(
        eig_hermitian(*h_l),
        [t](double e) { return std::exp(cplx(0.0, e * t)); });
    evolved_l = matmul(u, matmul(psi_l, dagger(u)));
  }

  const ComplexMatrix anti = add(matmul(flowed_r, evolved_l),
                                 matmul(evolved_l, flowed_r));
  CorrelatorPoint point;
  point.s = s;
  point.t = t;
  point.value = trace_product(rho.matrix, anti);
  return point;
}

double entropy_under_flow(const DensityMatrix& sigma,
                          const std::vector<std::size_t>& dims, double t) {
  if (dims.size() != 3) {
    throw std::invalid_argument(
        "entropy_under_flow: expected three subsystem dimensions, got " +
        std::to_string(dims.size()));
  }
  std::size_t product = 1;
  for (std::size_t d : dims) product *= d;
  if (product != sigma.dim()) {
    std::ostringstream msg;
    msg << "entropy_under_flow: dimensions multiply to " << product
        << " but the state has dimension " << sigma.dim();
    throw std::invalid_argument(msg.str());
  }

  if (t == 0.0) {
    return von_neumann_entropy(reduced_density(sigma, dims, {1, 2}));
  }

  const DensityMatrix rho_ab = reduced_density(sigma, dims, {0, 1});
  const double tol = rho_ab.zero_tol;
  const ComplexMatrix u_ab = apply_cfunction_spectral(
      rho_ab.spectral, [t, tol](double lam) -> cplx {
        if (lam <= tol) return cplx(1.0, 0.0);
        return std::exp(cplx(0.0, -t * std::log(lam)));
      });
  const ComplexMatrix u = kron_with_identity(u_ab, dims[2]);
  const ComplexMatrix flowed = matmul(u, matmul(sigma.matrix, dagger(u)));
  const DensityMatrix sigma_t = validate_density(flowed, sigma.zero_tol);
  return von_neumann_entropy(reduced_density(sigma_t, dims, {1, 2}));
}

double chiral_slope(const DensityMatrix& sigma,
                    const std::vector<std::size_t>& dims, double t1,
                    double t2) {
  if (t1 == t2) {
    throw std::invalid_argument(
        "chiral_slope: the two flow times must differ");
  }
  const double s1 = entropy_under_flow(sigma, dims, t1);
  const double s2 = entropy_under_flow(sigma, dims, t2);
  return 3.0 * (s2 - s1) / (kPi * (t2 - t1));
}

}  // namespace qmf
