#include "qmf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qmf/chebyshev.hpp"
#include "qmf/mh_poly.hpp"

namespace qmf {

namespace {

// Largest power of two <= v (v > 0).
double quantize_down_pow2(double v) {
  int e = 0;
  const double m = std::frexp(v, &e);
  return (m == 0.5) ? v : std::ldexp(0.5, e);
}

// Smallest power of two >= v (v > 0).
double quantize_up_pow2(double v) {
  int e = 0;
  const double m = std::frexp(v, &e);
  return (m == 0.5) ? v : std::ldexp(1.0, e);
}

// Smallest quarter-octave grid point 2^(k/4) covering the spectral floor,
// never below 2 so the plateau [1/kappa, 1] stays nondegenerate.  The
// 1e-9 slack keeps an exact grid value (kappa = 4, 8, ...) on its own
// point instead of the next one up.
double snap_kappa(double floor_kappa) {
  const double target = std::max(2.0, floor_kappa) * (1.0 - 1e-9);
  const double k = std::ceil(4.0 * std::log2(target));
  return std::exp2(k / 4.0);
}

long long predicted_queries(double kappa, double epsilon, double t) {
  const double at = std::fabs(t);
  if (at == 0.0) return 0;
  const double log_kappa = std::log(kappa);
  const double log_inv_eps = std::log(1.0 / epsilon);
  const double lead = kappa * kappa * std::log(kappa * kappa / epsilon);
  const double modular_term = at * log_kappa;
  const double denom =
      std::log(std::exp(1.0) + log_inv_eps / modular_term);
  return std::llround(lead * (modular_term + log_inv_eps / denom));
}

std::mutex rect_cache_mutex;
std::map<std::pair<double, double>, std::shared_ptr<const PolySpec>>
    rect_cache;

std::shared_ptr<const PolySpec> rect_cached(double kappa, double eps_prime) {
  const std::pair<double, double> key{kappa, eps_prime};
  {
    std::lock_guard<std::mutex> lock(rect_cache_mutex);
    auto it = rect_cache.find(key);
    if (it != rect_cache.end()) return it->second;
  }
  auto built = std::make_shared<const PolySpec>(rect_poly(kappa, eps_prime));
  std::lock_guard<std::mutex> lock(rect_cache_mutex);
  auto [it, inserted] = rect_cache.emplace(key, std::move(built));
  return it->second;
}

void check_operator(const DensityMatrix& rho, const ComplexMatrix& O,
                    const char* who) {
  if (!O.square() || O.rows != rho.dim()) {
    std::ostringstream msg;
    msg << who << ": operator shape " << O.rows << "x" << O.cols
        << " does not match state dimension " << rho.dim();
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ComplexMatrix exact_flow(const DensityMatrix& rho, const ComplexMatrix& O,
                         double t) {
  check_operator(rho, O, "exact_flow");
  if (t == 0.0) return O;
  const double tol = rho.zero_tol;
  const ComplexMatrix left = apply_cfunction_spectral(
      rho.spectral, [t, tol](double lam) -> cplx {
        if (lam <= tol) return cplx(1.0, 0.0);
        return std::exp(cplx(0.0, -t * std::log(lam)));
      });
  return matmul(left, matmul(O, dagger(left)));
}

FlowResult approx_flow(const DensityMatrix& rho, const ComplexMatrix& O,
                       double t, double epsilon, double kappa_override,
                       long long degree_cap) {
  check_operator(rho, O, "approx_flow");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument("approx_flow: epsilon must lie in (0, 1)");
  }

  FlowResult out;
  out.parameters.epsilon = epsilon;
  out.parameters.t = t;

  ComplexMatrix op = O;
  const double norm_o = operator_norm(O);
  if (norm_o > 1.0 + 1e-12) {
    out.rescale_factor = norm_o;
    op = scale(O, cplx(1.0 / norm_o, 0.0));
    std::ostringstream msg;
    msg << "operator norm " << norm_o << " exceeds 1; rescaled";
    out.notes.push_back(msg.str());
  }

  double kappa = 0.0;
  if (kappa_override > 0.0) {
    if (!(kappa_override > 1.0)) {
      throw std::invalid_argument("approx_flow: kappa override must exceed 1");
    }
    kappa = kappa_override;
  } else {
    kappa = snap_kappa(spectral_floor(rho));
  }
  out.parameters.kappa_used = kappa;
  for (double lam : rho.spectral.eigenvalues) {
    if (lam > rho.zero_tol && lam * kappa < 1.0 - 1e-9) {
      out.notes.push_back(
          "spectrum dips below 1/kappa on the support; the plateau "
          "guarantee does not cover those eigenvalues");
      break;
    }
  }

  const double eps_mh =
      quantize_down_pow2(epsilon / (6.0 * std::max(1.0, std::fabs(t))));
  const double eps_trig = quantize_down_pow2(epsilon / 6.0);

  if (degree_cap > 0) {
    const long long planned = 2 * log_degree_for_tail(kappa, eps_mh / 2.0);
    if (planned > degree_cap) {
      std::ostringstream msg;
      msg << "approx_flow: log polynomial degree " << planned
          << " exceeds the cap " << degree_cap;
      throw DegreeCapError(msg.str());
    }
  }
  const auto build = modular_hamiltonian_poly_cached(kappa, eps_mh);
  if (degree_cap > 0 && build->poly.series.degree() > degree_cap) {
    std::ostringstream msg;
    msg << "approx_flow: assembled polynomial degree "
        << build->poly.series.degree() << " exceeds the cap " << degree_cap;
    throw DegreeCapError(msg.str());
  }
  const ComplexMatrix h = apply_poly_clenshaw(rho.matrix, build->poly.series);

  const double t_eff = -2.0 * build->norm.beta * t;
  const auto [cos_part, sin_part] = trig_polys(t_eff, eps_trig);
  ComplexMatrix u = apply_poly_clenshaw(h, cos_part.series);
  if (sin_part.series.degree() >= 0) {
    u = add(u, scale(apply_poly_clenshaw(h, sin_part.series), cplx(0.0, 1.0)));
  }

  out.approx_operator = matmul(dagger(u), matmul(op, u));
  out.exact_operator = exact_flow(rho, op, t);
  out.error_norm = operator_norm(sub(out.approx_operator, out.exact_operator));

  out.query_ledger.log_poly_degree = 2 * build->parts.log_terms;
  out.query_ledger.rect_poly_degree = build->parts.rect.series.degree();
  out.query_ledger.trig_degree =
      std::max(cos_part.series.degree(), sin_part.series.degree());
  out.query_ledger.total_queries =
      (out.query_ledger.log_poly_degree + out.query_ledger.rect_poly_degree) *
      out.query_ledger.trig_degree;
  out.query_ledger.predicted_bound = predicted_queries(kappa, epsilon, t);

  const double first_order = eps_trig + std::fabs(t) * eps_mh;
  out.guarantee = 2.0 * first_order + first_order * first_order;
  return out;
}

QueryLedger query_count(double kappa, double epsilon, double t) {
  if (!(kappa > 1.0)) {
    throw std::invalid_argument("query_count: kappa must exceed 1");
  }
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument("query_count: epsilon must lie in (0, 1)");
  }

  QueryLedger ledger;
  const long long terms = degree_for_log(kappa, epsilon);
  ledger.log_poly_degree = 2 * terms;

  const double beta = std::log(2.0 * kappa);
  const double leak = 2.0 * epsilon / (5.0 * std::log(kappa));
  const double per_term =
      (terms >= 1) ? beta / static_cast<double>(terms) : leak;
  const double eps_prime = std::clamp(std::min(leak, per_term), 1e-12, 0.5);
  ledger.rect_poly_degree = rect_cached(kappa, eps_prime)->series.degree();

  const auto [cos_part, sin_part] = trig_polys(beta * std::fabs(t), epsilon);
  ledger.trig_degree =
      std::max(cos_part.series.degree(), sin_part.series.degree());
  ledger.total_queries =
      (ledger.log_poly_degree + ledger.rect_poly_degree) * ledger.trig_degree;
  ledger.predicted_bound = predicted_queries(kappa, epsilon, t);
  return ledger;
}

PurifiedFlowResult purified_flow(const PureState& psi, double t, double delta,
                                 long long degree_cap) {
  if (psi.subsystem_dims.size() != 2) {
    throw std::invalid_argument(
        "purified_flow: state must be bipartite, got " +
        std::to_string(psi.subsystem_dims.size()) + " subsystems");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("purified_flow: delta must lie in (0, 1)");
  }

  PurifiedFlowResult out;
  out.state = psi;
  if (t == 0.0) return out;

  const std::size_t dim_a = psi.subsystem_dims[0];
  const std::size_t dim_b = psi.subsystem_dims[1];
  const double d = static_cast<double>(dim_a);
  const double at = std::fabs(t);
  out.epsilon = (1.0 - 1e-9) * delta * delta * delta / (27.0 * d * d * at);
  out.kappa = std::pow(d / (at * out.epsilon), 2.0 / 3.0);
  out.bound = 3.0 * std::pow(d, 2.0 / 3.0) * std::cbrt(at * out.epsilon);

  const double beta = std::log(2.0 * out.kappa);
  const long long log_terms =
      log_degree_for_tail(out.kappa, delta / (32.0 * at));
  if (degree_cap > 0 && 2 * log_terms > degree_cap) {
    std::ostringstream msg;
    msg << "purified_flow: log polynomial degree " << 2 * log_terms
        << " exceeds the cap " << degree_cap;
    throw DegreeCapError(msg.str());
  }

  const double t_snapped = quantize_up_pow2(at);
  const double eps_rect = std::clamp(
      delta / (32.0 * t_snapped * (std::log(out.kappa) + 1.0)), 1e-12, 0.5);
  const auto rect = rect_cached(out.kappa, eps_rect);
  if (degree_cap > 0 && rect->series.degree() > degree_cap) {
    std::ostringstream msg;
    msg << "purified_flow: plateau polynomial degree "
        << rect->series.degree() << " exceeds the cap " << degree_cap;
    throw DegreeCapError(msg.str());
  }

  const auto [cos_part, sin_part] =
      trig_polys(-2.0 * beta * t, delta / 16.0);

  out.log_terms = log_terms;
  out.rect_degree = rect->series.degree();
  out.trig_degree =
      std::max(cos_part.series.degree(), sin_part.series.degree());

  const DensityMatrix rho_a = reduced_density(psi, {0});
  std::vector<cplx> phases(dim_a);
  for (std::size_t i = 0; i < dim_a; ++i) {
    const double lam =
        std::clamp(rho_a.spectral.eigenvalues[i], 0.0, 1.0);
    const double h = -log_series_eval(log_terms, lam) *
                     clenshaw_eval(rect->series, lam) / (2.0 * beta);
    if (std::fabs(h) > 1.0 + 1e-9) {
      throw std::runtime_error(
          "purified_flow: normalized Hamiltonian value " + std::to_string(h) +
          " left the unit interval");
    }
    const double x = std::clamp(h, -1.0, 1.0);
    cplx u(clenshaw_eval(cos_part.series, x),
           clenshaw_eval(sin_part.series, x));
    // The truncated trig pair lands within delta/16 of the unit circle;
    // projecting onto it keeps the output state exactly normalized.
    phases[i] = u / std::abs(u);
  }

  const ComplexMatrix& vecs = rho_a.spectral.eigenvectors;
  ComplexMatrix u_a(dim_a, dim_a);
  for (std::size_t a = 0; a < dim_a; ++a) {
    for (std::size_t b = 0; b < dim_a; ++b) {
      cplx acc(0.0, 0.0);
      for (std::size_t i = 0; i < dim_a; ++i) {
        acc += vecs(a, i) * phases[i] * std::conj(vecs(b, i));
      }
      u_a(a, b) = acc;
    }
  }

  std::vector<cplx> flowed(psi.amplitudes.size(), cplx(0.0, 0.0));
  for (std::size_t a = 0; a < dim_a; ++a) {
    for (std::size_t ap = 0; ap < dim_a; ++ap) {
      const cplx w = u_a(a, ap);
      if (w == cplx(0.0, 0.0)) continue;
      for (std::size_t b = 0; b < dim_b; ++b) {
        flowed[a * dim_b + b] += w * psi.amplitudes[ap * dim_b + b];
      }
    }
  }
  out.state = PureState(std::move(flowed), psi.subsystem_dims);
  return out;
}

}  // namespace qmf
