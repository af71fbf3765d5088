#include "qmf/mh_poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qmf/fft.hpp"

namespace qmf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Interpolate a function of definite parity on [-1,1].  The callable
// receives |x|; the sampled values are reflected per the parity so the
// value table is symmetric to the last bit and the complementary
// coefficients come out at roundoff level.  The grid doubles until the
// top eighth of the coefficient envelope drops under alias_tol, then the
// series is truncated so the discarded coefficient mass stays below
// trunc_tol.
template <typename F>
std::vector<double> adaptive_parity_interp(const F& f, Parity parity,
                                           double alias_tol, double trunc_tol,
                                           const char* who) {
  for (std::size_t nodes = 256; nodes <= (std::size_t{1} << 23); nodes *= 2) {
    std::vector<double> values(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
      const double x = std::cos(kPi * (static_cast<double>(j) + 0.5) /
                                static_cast<double>(nodes));
      const double v = f(std::fabs(x));
      values[j] = (parity == Parity::odd && x < 0.0) ? -v : v;
    }
    std::vector<double> coeffs = fft::chebyshev_analysis(values);
    double top = 0.0;
    for (std::size_t m = nodes - nodes / 8; m < nodes; ++m) {
      top = std::max(top, std::fabs(coeffs[m]));
    }
    if (top > alias_tol) continue;

    const std::size_t first_bad = (parity == Parity::even) ? 1 : 0;
    for (std::size_t m = first_bad; m < coeffs.size(); m += 2) {
      if (std::fabs(coeffs[m]) > 1e-9) {
        std::ostringstream msg;
        msg << who << ": parity residue " << coeffs[m] << " at index " << m;
        throw std::runtime_error(msg.str());
      }
      coeffs[m] = 0.0;
    }

    double acc = 0.0;
    std::size_t keep = 0;
    for (std::size_t m = coeffs.size(); m-- > 1;) {
      acc += std::fabs(coeffs[m]);
      if (acc > trunc_tol) {
        keep = m;
        break;
      }
    }
    coeffs.resize(keep + 1);
    return coeffs;
  }
  std::ostringstream msg;
  msg << who << ": coefficients did not decay on the largest grid";
  throw std::runtime_error(msg.str());
}

// Shared tail of every builder: wrap coefficients, rescale into the unit
// sup-norm ball if the interpolant pokes above it, and certify.
PolySpec certify(std::vector<double> coeffs, Parity parity, std::string target,
                 std::vector<std::pair<double, double>> valid_region,
                 double guarantee, const char* who) {
  ChebyshevSeries series(std::move(coeffs), parity);
  double sup = grid_sup_norm(series);
  // Truncation and aliasing can push the interpolant a hair above the
  // unit ball; that excess is bounded by the approximation budget, so a
  // rescale stays within the guarantee.  Anything macroscopic is a bug.
  if (sup > 1.5) {
    std::ostringstream msg;
    msg << who << ": sup norm " << sup << " is far outside the unit ball";
    throw std::runtime_error(msg.str());
  }
  if (sup > 1.0) {
    for (double& c : series.coefficients) c /= sup;
    sup = grid_sup_norm(series);
  }
  PolySpec spec;
  spec.series = std::move(series);
  spec.sup_norm_bound = sup;
  spec.target = std::move(target);
  spec.valid_region = std::move(valid_region);
  spec.guarantee_epsilon = guarantee;
  return spec;
}

void check_epsilon(double epsilon, const char* who) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    std::ostringstream msg;
    msg << who << ": epsilon must lie in (0,1), got " << epsilon;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

double grid_sup_norm(const ChebyshevSeries& series, std::size_t min_points) {
  const long long deg = series.degree();
  if (deg < 0) return 0.0;
  std::size_t points = 4 * static_cast<std::size_t>(deg + 1);
  points = std::max({points, min_points, std::size_t{64}});
  const std::size_t nodes = fft::next_pow2(points);
  const std::vector<double> values =
      fft::chebyshev_synthesis(series.coefficients, nodes);
  double sup = 0.0;
  for (double v : values) sup = std::max(sup, std::fabs(v));
  sup = std::max(sup, std::fabs(clenshaw_eval(series, 1.0)));
  sup = std::max(sup, std::fabs(clenshaw_eval(series, -1.0)));
  return sup;
}

PolySpec sign_poly(double gap, double epsilon) {
  if (!(gap > 0.0) || gap >= 2.0) {
    std::ostringstream msg;
    msg << "sign_poly: gap must lie in (0,2), got " << gap;
    throw std::domain_error(msg.str());
  }
  check_epsilon(epsilon, "sign_poly");
  // erf(Kx) with K gap/2 = sqrt(ln(4/eps)) keeps the model error under
  // eps/4 outside the gap; interpolation and truncation each get eps/16
  // and the rescale eats no more than the aliasing excess.
  const double sharp = std::sqrt(std::log(4.0 / epsilon));
  const double scale_k = 2.0 * sharp / gap;
  const double alias_tol = std::max(epsilon / 16.0 * 1e-2, 1e-12);
  const double trunc_tol = epsilon / 16.0;
  std::vector<double> coeffs = adaptive_parity_interp(
      [scale_k](double ax) { return std::erf(scale_k * ax); }, Parity::odd,
      alias_tol, trunc_tol, "sign_poly");
  std::ostringstream target;
  target << "sign(x) resolved to half-width " << gap / 2.0;
  return certify(std::move(coeffs), Parity::odd, target.str(),
                 {{-1.0, -gap / 2.0}, {gap / 2.0, 1.0}}, epsilon, "sign_poly");
}

PolySpec rect_poly(double kappa, double epsilon_prime) {
  if (!(kappa > 1.0)) {
    std::ostringstream msg;
    msg << "rect_poly: kappa must exceed 1, got " << kappa;
    throw std::domain_error(msg.str());
  }
  check_epsilon(epsilon_prime, "rect_poly");
  // Two opposed error functions centered at 3/(4 kappa) with transition
  // half-width 1/(4 kappa): the plateau covers |x| >= 1/kappa, the well
  // |x| <= 1/(2 kappa).  The combination never exceeds 1, so the rescale
  // only has to absorb aliasing crumbs.
  const double center = 3.0 / (4.0 * kappa);
  const double eps_model = epsilon_prime / 2.0;
  const double sharp = std::sqrt(std::log(4.0 / eps_model));
  const double scale_k = 4.0 * kappa * sharp;
  const double alias_tol = std::max(eps_model / 16.0 * 1e-1, 1e-12);
  const double trunc_tol = eps_model / 16.0;
  std::vector<double> coeffs = adaptive_parity_interp(
      [scale_k, center](double ax) {
        return 1.0 -
               0.5 * (std::erf(scale_k * (ax + center)) -
                      std::erf(scale_k * (ax - center)));
      },
      Parity::even, alias_tol, trunc_tol, "rect_poly");
  std::ostringstream target;
  target << "plateau indicator: 1 for |x| >= " << 1.0 / kappa << ", 0 for |x| <= "
         << 1.0 / (2.0 * kappa);
  return certify(std::move(coeffs), Parity::even, target.str(),
                 {{-1.0, -1.0 / kappa},
                  {-1.0 / (2.0 * kappa), 1.0 / (2.0 * kappa)},
                  {1.0 / kappa, 1.0}},
                 epsilon_prime, "rect_poly");
}

std::vector<double> bessel_j_sequence(double z, long long nmax) {
  if (z < 0.0 || !std::isfinite(z)) {
    throw std::domain_error("bessel_j_sequence: argument must be finite and >= 0");
  }
  if (nmax < 0) throw std::domain_error("bessel_j_sequence: nmax must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  out[0] = 1.0;
  if (z == 0.0) return out;
  if (z < 1e-12) {
    // Leading-order power series; anything beyond the first few orders
    // underflows harmlessly.
    for (long long n = 1; n <= nmax; ++n) {
      const double lt = static_cast<double>(n) * std::log(z / 2.0) -
                        std::lgamma(static_cast<double>(n) + 1.0);
      out[static_cast<std::size_t>(n)] = std::exp(lt);
    }
    return out;
  }
  const long long base = std::max(nmax, static_cast<long long>(std::ceil(z)));
  const long long start =
      base + 32 +
      static_cast<long long>(2.0 * std::sqrt(static_cast<double>(base) + 1.0));
  std::vector<double> work(static_cast<std::size_t>(start) + 2, 0.0);
  work[static_cast<std::size_t>(start)] = 1e-280;
  for (long long n = start; n >= 1; --n) {
    const std::size_t un = static_cast<std::size_t>(n);
    work[un - 1] = (2.0 * static_cast<double>(n) / z) * work[un] - work[un + 1];
    if (std::fabs(work[un - 1]) > 1e280) {
      for (std::size_t m = un - 1; m < work.size(); ++m) work[m] *= 1e-280;
    }
  }
  double norm = work[0];
  for (std::size_t m = 2; m + 1 < work.size(); m += 2) norm += 2.0 * work[m];
  for (long long n = 0; n <= nmax; ++n) {
    out[static_cast<std::size_t>(n)] = work[static_cast<std::size_t>(n)] / norm;
  }
  return out;
}

std::pair<PolySpec, PolySpec> trig_polys(double t_eff, double epsilon) {
  check_epsilon(epsilon, "trig_polys");
  const double z = std::fabs(t_eff);
  const double sign_t = (t_eff < 0.0) ? -1.0 : 1.0;
  std::ostringstream cos_target, sin_target;
  cos_target << "cos(" << t_eff << " x)";
  sin_target << "sin(" << t_eff << " x)";
  if (z < 1e-14) {
    PolySpec cos_part;
    cos_part.series = ChebyshevSeries({1.0}, Parity::even);
    cos_part.sup_norm_bound = 1.0;
    cos_part.target = cos_target.str();
    cos_part.valid_region = {{-1.0, 1.0}};
    cos_part.guarantee_epsilon = epsilon / 2.0;
    PolySpec sin_part;
    sin_part.series = ChebyshevSeries({}, Parity::odd);
    sin_part.sup_norm_bound = 0.0;
    sin_part.target = sin_target.str();
    sin_part.valid_region = {{-1.0, 1.0}};
    sin_part.guarantee_epsilon = epsilon / 2.0;
    return {std::move(cos_part), std::move(sin_part)};
  }

  // Truncation order: the Bessel tail past R is dominated by the
  // factorial series 2 (z/2)^(R+1)/(R+1)! geometrically damped by
  // q = (z/2)/(R+2); hold it under epsilon/4 so the unit-ball rescale
  // keeps each component within epsilon/2.
  const double log_budget = std::log(epsilon / 4.0);
  long long order = std::max<long long>(2, static_cast<long long>(std::ceil(z)));
  for (;; ++order) {
    if (order > 50000000) {
      throw std::runtime_error("trig_polys: truncation order exceeds 5e7");
    }
    const double q = (z / 2.0) / (static_cast<double>(order) + 2.0);
    if (q >= 0.97) continue;
    const double log_tail = std::log(2.0) +
                            (static_cast<double>(order) + 1.0) * std::log(z / 2.0) -
                            std::lgamma(static_cast<double>(order) + 2.0) -
                            std::log1p(-q);
    if (log_tail <= log_budget) break;
  }

  const std::vector<double> bessel = bessel_j_sequence(z, order);
  std::vector<double> cos_coeffs(static_cast<std::size_t>(order / 2) * 2 + 1, 0.0);
  cos_coeffs[0] = bessel[0];
  double alt = -1.0;
  for (long long k = 1; 2 * k <= order; ++k) {
    cos_coeffs[static_cast<std::size_t>(2 * k)] =
        2.0 * alt * bessel[static_cast<std::size_t>(2 * k)];
    alt = -alt;
  }
  std::vector<double> sin_coeffs;
  if (order >= 1) {
    const long long last_odd = (order % 2 == 1) ? order : order - 1;
    sin_coeffs.assign(static_cast<std::size_t>(last_odd) + 1, 0.0);
    alt = 1.0;
    for (long long k = 0; 2 * k + 1 <= order; ++k) {
      sin_coeffs[static_cast<std::size_t>(2 * k + 1)] =
          2.0 * alt * sign_t * bessel[static_cast<std::size_t>(2 * k + 1)];
      alt = -alt;
    }
  }
  PolySpec cos_part =
      certify(std::move(cos_coeffs), Parity::even, cos_target.str(),
              {{-1.0, 1.0}}, epsilon / 2.0, "trig_polys");
  PolySpec sin_part =
      certify(std::move(sin_coeffs), Parity::odd, sin_target.str(),
              {{-1.0, 1.0}}, epsilon / 2.0, "trig_polys");
  return {std::move(cos_part), std::move(sin_part)};
}

double MhParts::eval(double x) const {
  return eval_unnormalized(x) / (2.0 * beta);
}

double MhParts::eval_unnormalized(double x) const {
  return -log_series_eval(log_terms, x) * clenshaw_eval(rect.series, x);
}

namespace {

MhParts build_parts(double kappa, double epsilon) {
  if (!(kappa > 1.0)) {
    std::ostringstream msg;
    msg << "modular_hamiltonian_poly: kappa must exceed 1, got " << kappa;
    throw std::domain_error(msg.str());
  }
  check_epsilon(epsilon, "modular_hamiltonian_poly");
  MhParts parts;
  parts.kappa = kappa;
  parts.beta = std::log(2.0 * kappa);
  parts.epsilon = epsilon;
  parts.epsilon_log = epsilon / 2.0;
  parts.log_terms = log_degree_for_tail(kappa, parts.epsilon_log);
  const double leak = 2.0 * epsilon / (5.0 * std::log(kappa));
  const double per_term =
      (parts.log_terms >= 1)
          ? parts.beta / static_cast<double>(parts.log_terms)
          : leak;
  parts.epsilon_prime =
      std::clamp(std::min(leak, per_term), 1e-12, 0.5);
  parts.rect = rect_poly(kappa, parts.epsilon_prime);
  return parts;
}

MhBuild assemble_build(const MhParts& parts) {
  const ChebyshevSeries log_series = log_series_coefficients(parts.log_terms);
  const long long total_degree = log_series.degree() + parts.rect.series.degree();
  const std::size_t nodes =
      fft::next_pow2(static_cast<std::size_t>(total_degree) + 1);
  std::vector<double> values =
      fft::chebyshev_synthesis(log_series.coefficients, nodes);
  {
    const std::vector<double> rect_values =
        fft::chebyshev_synthesis(parts.rect.series.coefficients, nodes);
    for (std::size_t j = 0; j < nodes; ++j) values[j] *= rect_values[j];
  }
  std::vector<double> coeffs = fft::chebyshev_analysis(values);
  coeffs.resize(static_cast<std::size_t>(total_degree) + 1);
  const double scale = -1.0 / (2.0 * parts.beta);
  for (double& c : coeffs) c *= scale;
  for (std::size_t m = 1; m < coeffs.size(); m += 2) {
    if (std::fabs(coeffs[m]) > 1e-8) {
      std::ostringstream msg;
      msg << "modular_hamiltonian_poly: odd residue " << coeffs[m]
          << " at index " << m;
      throw std::runtime_error(msg.str());
    }
    coeffs[m] = 0.0;
  }
  std::ostringstream target;
  target << "-ln|x| / (2 ln(2 kappa)) on [1/kappa, 1], kappa=" << parts.kappa;
  MhBuild build;
  build.parts = parts;
  build.poly = certify(std::move(coeffs), Parity::even, target.str(),
                       {{-1.0, -1.0 / parts.kappa}, {1.0 / parts.kappa, 1.0}},
                       parts.epsilon / (2.0 * parts.beta),
                       "modular_hamiltonian_poly");
  build.norm.beta = parts.beta;
  build.norm.kappa = parts.kappa;
  build.norm.epsilon_prime = parts.epsilon_prime;
  return build;
}

std::mutex parts_mutex;
std::map<std::pair<double, double>, std::shared_ptr<const MhParts>> parts_cache;
std::mutex build_mutex;
std::map<std::pair<double, double>, std::shared_ptr<const MhBuild>> build_cache;

}  // namespace

std::shared_ptr<const MhParts> mh_parts_cached(double kappa, double epsilon) {
  const std::pair<double, double> key{kappa, epsilon};
  {
    std::lock_guard<std::mutex> lock(parts_mutex);
    auto it = parts_cache.find(key);
    if (it != parts_cache.end()) return it->second;
  }
  auto built = std::make_shared<const MhParts>(build_parts(kappa, epsilon));
  std::lock_guard<std::mutex> lock(parts_mutex);
  auto [it, inserted] = parts_cache.emplace(key, std::move(built));
  return it->second;
}

std::shared_ptr<const MhBuild> modular_hamiltonian_poly_cached(double kappa,
                                                               double epsilon) {
  const std::pair<double, double> key{kappa, epsilon};
  {
    std::lock_guard<std::mutex> lock(build_mutex);
    auto it = build_cache.find(key);
    if (it != build_cache.end()) return it->second;
  }
  const std::shared_ptr<const MhParts> parts = mh_parts_cached(kappa, epsilon);
  auto built = std::make_shared<const MhBuild>(assemble_build(*parts));
  std::lock_guard<std::mutex> lock(build_mutex);
  auto [it, inserted] = build_cache.emplace(key, std::move(built));
  return it->second;
}

std::pair<PolySpec, NormalizationInfo> modular_hamiltonian_poly(double kappa,
                                                                double epsilon) {
  const std::shared_ptr<const MhBuild> build =
      modular_hamiltonian_poly_cached(kappa, epsilon);
  return {build->poly, build->norm};
}

}  // namespace qmf
