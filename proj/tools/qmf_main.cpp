#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qmf/chebyshev.hpp"
#include "qmf/encoding.hpp"
#include "qmf/estimators.hpp"
#include "qmf/flow.hpp"
#include "qmf/io.hpp"
#include "qmf/matfun.hpp"
#include "qmf/mh_poly.hpp"

namespace {

using namespace qmf;
using nlohmann::ordered_json;

struct Common {
  std::string out = "report";
  std::uint64_t seed = 0;
  long long degree_cap = 1000000;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out,
                  "Report base path; writes <out>.csv and <out>.json")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed recorded in every report")
      ->capture_default_str();
  sub->add_option("--degree-cap", c.degree_cap,
                  "Abort when a planned polynomial degree exceeds this "
                  "(0 lifts the cap)")
      ->capture_default_str();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void check_cap(long long planned, long long cap, const char* what) {
  if (cap > 0 && planned > cap) {
    std::ostringstream msg;
    msg << what << " degree " << planned << " exceeds --degree-cap " << cap;
    throw DegreeCapError(msg.str());
  }
}

const char* flag(bool ok) { return ok ? "pass" : "fail"; }

// Rolling FNV over the effective parameter values and input file bytes,
// separator-delimited so field boundaries cannot alias.
struct Digest {
  std::uint64_t h = 14695981039346656037ull;
  Digest& add(const std::string& s) {
    h = fnv1a(s.data(), s.size(), h);
    h = fnv1a("\x1f", 1, h);
    return *this;
  }
  Digest& add(double v) { return add(format_float(v)); }
  Digest& add(long long v) { return add(std::to_string(v)); }
  Digest& add_file(const std::string& path) { return add(read_file(path)); }
  std::string hex() const { return digest_hex(h); }
};

// One report in flight: rows accumulate in the CSV, headline numbers in
// the JSON summary, and finish() writes both and prints the verdict.
class Runner {
 public:
  Runner(const std::string& command, const Common& common,
         std::vector<std::string> header)
      : base_(common.out),
        csv_(std::move(header)),
        start_(std::chrono::steady_clock::now()) {
    summary_["schema_version"] = 1;
    summary_["command"] = command;
    summary_["seed"] = common.seed;
    summary_["degree_cap"] = common.degree_cap;
  }

  CsvReport& csv() { return csv_; }
  ordered_json& summary() { return summary_; }
  bool row_status(bool ok) {
    if (!ok) ++failures_;
    return ok;
  }

  int finish() {
    const double duration =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    summary_["rows"] = csv_.rows();
    summary_["failures"] = failures_;
    summary_["pass"] = failures_ == 0;
    summary_["duration_seconds"] = duration;
    csv_.write(base_ + ".csv");
    write_file(base_ + ".json", summary_.dump(2) + "\n");
    std::cout << "wrote " << base_ << ".csv (" << csv_.rows()
              << " rows) and " << base_ << ".json\n";
    if (failures_ == 0) {
      std::cout << "PASS\n";
      return 0;
    }
    std::cout << "FAIL (" << failures_ << " of " << csv_.rows() << " rows)\n";
    return 1;
  }

 private:
  std::string base_;
  CsvReport csv_;
  ordered_json summary_;
  std::chrono::steady_clock::time_point start_;
  long long failures_ = 0;
};

std::vector<double> parse_grid_list(const std::string& text,
                                    const char* option) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const char* begin = item.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end != nullptr && *end == ' ') ++end;
    if (end == begin || end == nullptr || *end != '\0') {
      throw std::invalid_argument(std::string(option) +
                                  ": expected a comma-separated number list, "
                                  "got \"" +
                                  text + "\"");
    }
    out.push_back(v);
  }
  require(!out.empty(), std::string(option) + ": the list is empty");
  return out;
}

double least_squares_slope(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, i);
  return acc;
}

// rho^{-is} with phase 1 on the kernel.
ComplexMatrix modular_power(const DensityMatrix& rho, double s) {
  return apply_cfunction_spectral(rho.spectral, [&](double lam) {
    return lam > rho.zero_tol ? std::exp(cplx(0.0, -s * std::log(lam)))
                              : cplx(1.0, 0.0);
  });
}

ComplexMatrix evolve_exact(const ComplexMatrix& h, const ComplexMatrix& op,
                           double t) {
  const ComplexMatrix u = apply_cfunction_spectral(
      eig_hermitian(h),
      [t](double lam) { return std::exp(cplx(0.0, lam * t)); });
  return matmul(u, matmul(op, dagger(u)));
}

// ---------------------------------------------------------------------
// approx-log

struct ApproxLogArgs {
  Common common;
  double kappa = 0.0;
  double epsilon = 0.0;
  long long grid = 1000;
};

int run_approx_log(const ApproxLogArgs& a) {
  require(a.kappa > 1.0, "--kappa must exceed 1");
  require(a.epsilon > 0.0 && a.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  require(a.grid >= 2, "--grid needs at least 2 points");
  const long long n = degree_for_log(a.kappa, a.epsilon);
  check_cap(2 * n, a.common.degree_cap, "approx-log: log polynomial");

  std::cout << "approx-log: kappa=" << a.kappa << " epsilon=" << a.epsilon
            << " -> N=" << n << " terms over a " << a.grid
            << "-point grid of [1/kappa, 1]\n";

  Runner r("approx-log", a.common,
           {"experiment", "input_digest", "kappa", "epsilon", "n_terms", "x",
            "f_n", "ln_x", "error", "bound", "status"});
  const std::string digest = Digest()
                                 .add("approx-log")
                                 .add(a.kappa)
                                 .add(a.epsilon)
                                 .add(a.grid)
                                 .hex();
  r.summary()["parameters"] = {{"kappa", a.kappa},
                               {"epsilon", a.epsilon},
                               {"grid", a.grid}};
  r.summary()["input_digest"] = digest;
  r.summary()["n_terms"] = n;

  const double lo = 1.0 / a.kappa;
  double worst = 0.0;
  for (long long i = 0; i < a.grid; ++i) {
    const double x =
        lo + (1.0 - lo) * static_cast<double>(i) /
                 static_cast<double>(a.grid - 1);
    const double fn = log_series_eval(n, x);
    const double truth = std::log(x);
    const double error = std::fabs(fn - truth);
    worst = std::max(worst, error);
    const bool ok = r.row_status(error <= a.epsilon);
    r.csv()
        .cell("approx-log")
        .cell(digest)
        .cell(a.kappa)
        .cell(a.epsilon)
        .cell(n)
        .cell(x)
        .cell(fn)
        .cell(truth)
        .cell(error)
        .cell(a.epsilon)
        .cell(flag(ok));
    r.csv().end_row();
  }
  r.summary()["max_error"] = worst;
  std::cout << "  max |f_N(x) - ln x| = " << worst << " against bound "
            << a.epsilon << "\n";
  return r.finish();
}

// ---------------------------------------------------------------------
// mh-poly

struct MhPolyArgs {
  Common common;
  double kappa = 0.0;
  double epsilon = 0.0;
  long long grid = 1000;
};

int run_mh_poly(const MhPolyArgs& a) {
  require(a.kappa > 1.0, "--kappa must exceed 1");
  require(a.epsilon > 0.0 && a.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  require(a.grid >= 2, "--grid needs at least 2 points");
  check_cap(2 * log_degree_for_tail(a.kappa, a.epsilon / 2.0),
            a.common.degree_cap, "mh-poly: log polynomial");

  const auto build = modular_hamiltonian_poly_cached(a.kappa, a.epsilon);
  const double beta = build->norm.beta;
  std::cout << "mh-poly: kappa=" << a.kappa << " epsilon=" << a.epsilon
            << " beta=" << beta << "\n"
            << "  log factor N=" << build->parts.log_terms
            << " (degree " << 2 * build->parts.log_terms
            << "), plateau degree " << build->parts.rect.series.degree()
            << ", assembled degree " << build->poly.series.degree() << "\n";

  const double sup = grid_sup_norm(build->poly.series, 4097);
  bool parity_ok = build->poly.series.parity == Parity::even;
  for (std::size_t i = 1; i < build->poly.series.coefficients.size(); i += 2) {
    if (build->poly.series.coefficients[i] != 0.0) parity_ok = false;
  }
  double contract = 0.0;
  const double lo = 1.0 / a.kappa;
  for (long long i = 0; i < a.grid; ++i) {
    const double x =
        lo + (1.0 - lo) * static_cast<double>(i) /
                 static_cast<double>(a.grid - 1);
    const double p = clenshaw_eval(build->poly.series, x);
    contract = std::max(contract, std::fabs(2.0 * beta * p + std::log(x)));
  }
  const double sup_bound = 1.0 + 1e-9;

  Runner r("mh-poly", a.common,
           {"experiment", "input_digest", "kappa", "epsilon", "beta",
            "epsilon_prime", "log_degree", "rect_degree", "poly_degree",
            "sup_norm", "sup_bound", "parity", "contract_error",
            "contract_bound", "status"});
  const std::string digest = Digest()
                                 .add("mh-poly")
                                 .add(a.kappa)
                                 .add(a.epsilon)
                                 .add(a.grid)
                                 .hex();
  r.summary()["parameters"] = {{"kappa", a.kappa},
                               {"epsilon", a.epsilon},
                               {"grid", a.grid}};
  r.summary()["input_digest"] = digest;

  const bool ok = r.row_status(sup <= sup_bound && parity_ok &&
                               contract <= a.epsilon);
  r.csv()
      .cell("mh-poly")
      .cell(digest)
      .cell(a.kappa)
      .cell(a.epsilon)
      .cell(beta)
      .cell(build->parts.epsilon_prime)
      .cell(2 * build->parts.log_terms)
      .cell(build->parts.rect.series.degree())
      .cell(build->poly.series.degree())
      .cell(sup)
      .cell(sup_bound)
      .cell(parity_ok ? "even" : "violated")
      .cell(contract)
      .cell(a.epsilon)
      .cell(flag(ok));
  r.csv().end_row();

  std::cout << "  sup |P| = " << sup << " (admissible up to 1 + 1e-9), "
            << "contract error " << contract << " against " << a.epsilon
            << "\n";
  return r.finish();
}

// ---------------------------------------------------------------------
// flow

struct FlowArgs {
  Common common;
  std::string state_path;
  std::string operator_path;
  double t = 0.0;
  double epsilon = 1e-2;
  double kappa_override = 0.0;
  std::string mode = "polynomial";
};

int run_flow(const FlowArgs& a) {
  require(a.epsilon > 0.0 && a.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  const LoadedObject sobj = load_object(a.state_path);
  const DensityMatrix rho = sobj.as_density();
  const LoadedObject oobj = load_object(a.operator_path);
  const ComplexMatrix& op = oobj.as_operator();
  if (op.rows != rho.dim()) {
    std::ostringstream msg;
    msg << "--operator has dimension " << op.rows << " but --state has "
        << rho.dim();
    throw std::invalid_argument(msg.str());
  }

  std::cout << "flow: d=" << rho.dim() << " t=" << a.t << " mode=" << a.mode
            << "\n";

  Runner r("flow", a.common,
           {"experiment", "input_digest", "mode", "d", "t", "epsilon",
            "kappa_used", "error_norm", "guarantee", "log_degree",
            "rect_degree", "trig_degree", "total_queries", "predicted_bound",
            "rescale_factor", "status"});
  const std::string digest = Digest()
                                 .add("flow")
                                 .add(a.mode)
                                 .add(a.t)
                                 .add(a.epsilon)
                                 .add(a.kappa_override)
                                 .add_file(a.state_path)
                                 .add_file(a.operator_path)
                                 .hex();
  r.summary()["parameters"] = {{"state", a.state_path},
                               {"operator", a.operator_path},
                               {"t", a.t},
                               {"epsilon", a.epsilon},
                               {"mode", a.mode},
                               {"kappa_override", a.kappa_override}};
  r.summary()["input_digest"] = digest;

  ComplexMatrix flowed;
  if (a.mode == "exact") {
    flowed = exact_flow(rho, op, a.t);
    const bool ok = r.row_status(true);
    r.csv()
        .cell("flow")
        .cell(digest)
        .cell(a.mode)
        .cell(static_cast<long long>(rho.dim()))
        .cell(a.t)
        .cell(0.0)
        .cell(0.0)
        .cell(0.0)
        .cell(0.0)
        .cell(0ll)
        .cell(0ll)
        .cell(0ll)
        .cell(0ll)
        .cell(0ll)
        .cell(1.0)
        .cell(flag(ok));
    r.csv().end_row();
  } else {
    const FlowResult res = approx_flow(rho, op, a.t, a.epsilon,
                                       a.kappa_override, a.common.degree_cap);
    flowed = scale(res.approx_operator, cplx(res.rescale_factor, 0.0));
    const bool ok = r.row_status(res.error_norm <= a.epsilon);
    r.csv()
        .cell("flow")
        .cell(digest)
        .cell(a.mode)
        .cell(static_cast<long long>(rho.dim()))
        .cell(a.t)
        .cell(a.epsilon)
        .cell(res.parameters.kappa_used)
        .cell(res.error_norm)
        .cell(res.guarantee)
        .cell(res.query_ledger.log_poly_degree)
        .cell(res.query_ledger.rect_poly_degree)
        .cell(res.query_ledger.trig_degree)
        .cell(res.query_ledger.total_queries)
        .cell(res.query_ledger.predicted_bound)
        .cell(res.rescale_factor)
        .cell(flag(ok));
    r.csv().end_row();
    r.summary()["notes"] = res.notes;
    std::cout << "  kappa_used=" << res.parameters.kappa_used
              << " error_norm=" << res.error_norm << " (guarantee "
              << res.guarantee << ", budget " << a.epsilon << ")\n"
              << "  queries: (" << res.query_ledger.log_poly_degree << "+"
              << res.query_ledger.rect_poly_degree << ") x "
              << res.query_ledger.trig_degree << " = "
              << res.query_ledger.total_queries << "\n";
  }

  save_operator(a.common.out + "_operator.json", flowed, oobj.dims);
  std::cout << "wrote " << a.common.out << "_operator.json\n";
  return r.finish();
}

// ---------------------------------------------------------------------
// purified-flow

struct PurifiedArgs {
  Common common;
  std::string state_path;
  double t = 0.0;
  double delta = 0.1;
};

int run_purified(const PurifiedArgs& a) {
  const LoadedObject sobj = load_object(a.state_path);
  const PureState psi = sobj.as_pure();
  const PurifiedFlowResult res =
      purified_flow(psi, a.t, a.delta, a.common.degree_cap);

  // Reference state (rho_A^{it} x I)|psi> assembled from the reduced
  // eigensystem, phase 1 on the kernel.
  const DensityMatrix rho_a = reduced_density(psi, {0});
  const ComplexMatrix ua = apply_cfunction_spectral(
      rho_a.spectral, [&](double lam) {
        return lam > rho_a.zero_tol
                   ? std::exp(cplx(0.0, a.t * std::log(lam)))
                   : cplx(1.0, 0.0);
      });
  const std::size_t da = psi.subsystem_dims[0];
  const std::size_t db = psi.subsystem_dims[1];
  double dist2 = 0.0;
  for (std::size_t i = 0; i < da; ++i) {
    for (std::size_t b = 0; b < db; ++b) {
      cplx acc(0.0, 0.0);
      for (std::size_t j = 0; j < da; ++j)
        acc += ua(i, j) * psi.amplitudes[j * db + b];
      dist2 += std::norm(res.state.amplitudes[i * db + b] - acc);
    }
  }
  const double distance = std::sqrt(dist2);

  std::cout << "purified-flow: d=" << da << " t=" << a.t
            << " delta=" << a.delta << "\n"
            << "  internal epsilon=" << res.epsilon
            << " kappa=" << res.kappa << ", distance " << distance
            << " against bound " << res.bound << "\n";

  Runner r("purified-flow", a.common,
           {"experiment", "input_digest", "d", "t", "delta", "epsilon",
            "kappa", "log_degree", "rect_degree", "trig_degree", "distance",
            "bound", "status"});
  const std::string digest = Digest()
                                 .add("purified-flow")
                                 .add(a.t)
                                 .add(a.delta)
                                 .add_file(a.state_path)
                                 .hex();
  r.summary()["parameters"] = {{"state", a.state_path},
                               {"t", a.t},
                               {"delta", a.delta}};
  r.summary()["input_digest"] = digest;

  const bool ok = r.row_status(distance <= res.bound && res.bound <= a.delta);
  r.csv()
      .cell("purified-flow")
      .cell(digest)
      .cell(static_cast<long long>(da))
      .cell(a.t)
      .cell(a.delta)
      .cell(res.epsilon)
      .cell(res.kappa)
      .cell(2 * res.log_terms)
      .cell(res.rect_degree)
      .cell(res.trig_degree)
      .cell(distance)
      .cell(res.bound)
      .cell(flag(ok));
  r.csv().end_row();

  save_pure(a.common.out + "_state.json", res.state.amplitudes,
            res.state.subsystem_dims);
  std::cout << "wrote " << a.common.out << "_state.json\n";
  return r.finish();
}

// ---------------------------------------------------------------------
// entropy

struct EntropyArgs {
  Common common;
  std::string state_path;
  std::string method = "qpe";
  double epsilon = 0.0;
  double delta = 0.1;
};

int run_entropy(const EntropyArgs& a) {
  require(a.epsilon > 0.0 && a.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  require(a.delta > 0.0 && a.delta < 1.0, "--delta must lie in (0, 1)");
  const LoadedObject sobj = load_object(a.state_path);
  const DensityMatrix rho = sobj.as_density();

  EntropyEstimate est;
  if (a.method == "qpe") {
    est = entropy_qpe(rho, a.epsilon, a.delta, a.common.seed);
  } else {
    est = entropy_functional_estimate(rho, a.epsilon, a.common.degree_cap);
  }
  const double exact = von_neumann_entropy(rho);
  const double error = std::fabs(est.value - exact);

  std::cout << "entropy: d=" << rho.dim() << " method=" << a.method
            << " shots=" << est.shots << "\n"
            << "  estimate " << est.value << " vs exact " << exact
            << " (error " << error << ", budget " << a.epsilon << ")\n";
  if (!est.note.empty()) std::cout << "  note: " << est.note << "\n";

  Runner r("entropy", a.common,
           {"experiment", "input_digest", "method", "d", "kappa_used",
            "epsilon", "delta", "shots", "seed", "estimate", "exact", "error",
            "status"});
  const std::string digest = Digest()
                                 .add("entropy")
                                 .add(a.method)
                                 .add(a.epsilon)
                                 .add(a.delta)
                                 .add(static_cast<long long>(a.common.seed))
                                 .add_file(a.state_path)
                                 .hex();
  r.summary()["parameters"] = {{"state", a.state_path},
                               {"method", a.method},
                               {"epsilon", a.epsilon},
                               {"delta", a.delta}};
  r.summary()["input_digest"] = digest;
  if (!est.note.empty()) r.summary()["note"] = est.note;

  const bool ok = r.row_status(error <= a.epsilon);
  r.csv()
      .cell("entropy")
      .cell(digest)
      .cell(a.method)
      .cell(static_cast<long long>(rho.dim()))
      .cell(est.kappa_used)
      .cell(a.epsilon)
      .cell(a.method == "qpe" ? a.delta : 0.0)
      .cell(est.shots)
      .cell(static_cast<long long>(a.common.seed))
      .cell(est.value)
      .cell(exact)
      .cell(error)
      .cell(flag(ok));
  r.csv().end_row();
  return r.finish();
}

// ---------------------------------------------------------------------
// correlator

struct CorrelatorArgs {
  Common common;
  std::string state_path;
  std::string psi_r_path;
  std::string psi_l_path;
  std::string h_l_path;
  std::string s_grid = "0,1,2";
  double t = 0.0;
  std::string mode = "exact";
  double epsilon = 1e-2;
};

int run_correlator(const CorrelatorArgs& a) {
  require(a.epsilon > 0.0 && a.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  const std::vector<double> s_values = parse_grid_list(a.s_grid, "--s-grid");
  const LoadedObject sobj = load_object(a.state_path);
  const DensityMatrix rho = sobj.as_density();
  const LoadedObject robj = load_object(a.psi_r_path);
  const ComplexMatrix& psi_r = robj.as_operator();
  const LoadedObject lobj = load_object(a.psi_l_path);
  const ComplexMatrix& psi_l = lobj.as_operator();
  ComplexMatrix h_l;
  const bool has_h = !a.h_l_path.empty();
  if (has_h) h_l = load_object(a.h_l_path).as_operator();

  const bool hermitian_inputs = hermiticity_defect(psi_r) <= 1e-8 &&
                                hermiticity_defect(psi_l) <= 1e-8;
  const CorrelatorMode mode = a.mode == "polynomial"
                                  ? CorrelatorMode::polynomial
                                  : CorrelatorMode::exact;

  std::cout << "correlator: d=" << rho.dim() << " t=" << a.t
            << " mode=" << a.mode << " over " << s_values.size()
            << " modular times\n";

  Runner r("correlator", a.common,
           {"experiment", "input_digest", "mode", "d", "s", "t", "w_real",
            "w_imag", "reference_real", "reference_imag", "deviation",
            "bound", "status"});
  Digest dg;
  dg.add("correlator")
      .add(a.mode)
      .add(a.s_grid)
      .add(a.t)
      .add(a.epsilon)
      .add_file(a.state_path)
      .add_file(a.psi_r_path)
      .add_file(a.psi_l_path);
  if (has_h) dg.add_file(a.h_l_path);
  const std::string digest = dg.hex();
  r.summary()["parameters"] = {{"state", a.state_path},
                               {"psi_r", a.psi_r_path},
                               {"psi_l", a.psi_l_path},
                               {"h_l", a.h_l_path},
                               {"s_grid", a.s_grid},
                               {"t", a.t},
                               {"mode", a.mode},
                               {"epsilon", a.epsilon}};
  r.summary()["input_digest"] = digest;
  r.summary()["hermitian_inputs"] = hermitian_inputs;

  // The left insertion evolves the same way in every route.
  const ComplexMatrix b = has_h ? evolve_exact(h_l, psi_l, a.t) : psi_l;

  for (double s : s_values) {
    const CorrelatorPoint point =
        correlator(rho, psi_r, psi_l, s, a.t, has_h ? &h_l : nullptr, mode,
                   a.epsilon);
    cplx reference;
    double bound = 0.0;
    if (mode == CorrelatorMode::exact) {
      // Independent dense route: conjugate by explicit modular phases.
      const ComplexMatrix left = modular_power(rho, s);
      const ComplexMatrix a_s = matmul(left, matmul(psi_r, dagger(left)));
      reference = trace_product(
          rho.matrix, add(matmul(a_s, b), matmul(b, a_s)));
      bound = 1e-10;
    } else {
      reference = correlator(rho, psi_r, psi_l, s, a.t,
                             has_h ? &h_l : nullptr, CorrelatorMode::exact)
                      .value;
      bound = a.epsilon;
    }
    const double deviation = std::abs(point.value - reference);
    const bool imag_ok =
        !hermitian_inputs || std::fabs(point.value.imag()) <= 1e-9;
    const bool ok = r.row_status(deviation <= bound && imag_ok);
    r.csv()
        .cell("correlator")
        .cell(digest)
        .cell(a.mode)
        .cell(static_cast<long long>(rho.dim()))
        .cell(s)
        .cell(a.t)
        .cell(point.value.real())
        .cell(point.value.imag())
        .cell(reference.real())
        .cell(reference.imag())
        .cell(deviation)
        .cell(bound)
        .cell(flag(ok));
    r.csv().end_row();
  }
  return r.finish();
}

// ---------------------------------------------------------------------
// ccc

struct CccArgs {
  Common common;
  std::string state_path;
  double t1 = 0.0;
  double t2 = 0.0;
};

int run_ccc(const CccArgs& a) {
  const LoadedObject sobj = load_object(a.state_path);
  if (sobj.dims.size() != 3) {
    std::ostringstream msg;
    msg << a.state_path << ": \"dims\" must name three subsystems, got "
        << sobj.dims.size();
    throw std::invalid_argument(msg.str());
  }
  const DensityMatrix sigma = sobj.as_density();
  const double s_zero = entropy_under_flow(sigma, sobj.dims, 0.0);
  const double s_t1 = entropy_under_flow(sigma, sobj.dims, a.t1);
  const double s_t2 = entropy_under_flow(sigma, sobj.dims, a.t2);
  const double slope = chiral_slope(sigma, sobj.dims, a.t1, a.t2);

  std::cout << "ccc: dims=(" << sobj.dims[0] << "," << sobj.dims[1] << ","
            << sobj.dims[2] << ")\n"
            << "  S(0)=" << s_zero << " S(" << a.t1 << ")=" << s_t1 << " S("
            << a.t2 << ")=" << s_t2 << " slope=" << slope << "\n";

  Runner r("ccc", a.common,
           {"experiment", "input_digest", "d_a", "d_b", "d_c", "t1", "t2",
            "s_zero", "s_t1", "s_t2", "slope", "status"});
  const std::string digest = Digest()
                                 .add("ccc")
                                 .add(a.t1)
                                 .add(a.t2)
                                 .add_file(a.state_path)
                                 .hex();
  r.summary()["parameters"] = {{"state", a.state_path},
                               {"t1", a.t1},
                               {"t2", a.t2}};
  r.summary()["input_digest"] = digest;
  r.summary()["slope"] = slope;

  const bool ok = r.row_status(true);
  r.csv()
      .cell("ccc")
      .cell(digest)
      .cell(static_cast<long long>(sobj.dims[0]))
      .cell(static_cast<long long>(sobj.dims[1]))
      .cell(static_cast<long long>(sobj.dims[2]))
      .cell(a.t1)
      .cell(a.t2)
      .cell(s_zero)
      .cell(s_t1)
      .cell(s_t2)
      .cell(slope)
      .cell(flag(ok));
  r.csv().end_row();
  return r.finish();
}

// ---------------------------------------------------------------------
// sweeps and query-count

void ledger_row(Runner& r, const char* experiment, const std::string& digest,
                double kappa, double epsilon, double t) {
  const QueryLedger led = query_count(kappa, epsilon, t);
  const double ratio =
      led.predicted_bound > 0
          ? static_cast<double>(led.total_queries) /
                static_cast<double>(led.predicted_bound)
          : 0.0;
  const bool ok = r.row_status(ratio <= query_bound_constant);
  r.csv()
      .cell(experiment)
      .cell(digest)
      .cell(kappa)
      .cell(epsilon)
      .cell(t)
      .cell(led.log_poly_degree)
      .cell(led.rect_poly_degree)
      .cell(led.trig_degree)
      .cell(led.total_queries)
      .cell(led.predicted_bound)
      .cell(ratio)
      .cell(flag(ok));
  r.csv().end_row();
}

const std::vector<std::string> kLedgerHeader = {
    "experiment", "input_digest", "kappa",         "epsilon",
    "t",          "log_degree",   "rect_degree",   "trig_degree",
    "total_queries", "predicted_bound", "ratio",   "status"};

struct SweepArgs {
  Common common;
  double epsilon = 1e-2;
  double fixed = 0.0;        // the non-swept parameter
  std::string grid;          // comma list of swept values
};

int run_sweep(const SweepArgs& a, bool sweep_kappa) {
  require(a.epsilon > 0.0 && a.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  const char* grid_flag = sweep_kappa ? "--kappas" : "--times";
  const std::vector<double> values = parse_grid_list(a.grid, grid_flag);
  for (double v : values) {
    if (sweep_kappa) require(v > 1.0, "--kappas entries must exceed 1");
  }
  if (!sweep_kappa) require(a.fixed > 1.0, "--kappa must exceed 1");
  for (double v : values) {
    const double kappa = sweep_kappa ? v : a.fixed;
    check_cap(2 * degree_for_log(kappa, a.epsilon), a.common.degree_cap,
              "sweep: log polynomial");
  }

  const char* name = sweep_kappa ? "sweep-kappa" : "sweep-time";
  std::cout << name << ": epsilon=" << a.epsilon << " "
            << (sweep_kappa ? "t=" : "kappa=") << a.fixed << " over "
            << values.size() << " grid points\n";

  Runner r(name, a.common, kLedgerHeader);
  Digest dg;
  dg.add(name).add(a.epsilon).add(a.fixed).add(a.grid);
  const std::string digest = dg.hex();
  r.summary()["parameters"] = {
      {"epsilon", a.epsilon},
      {sweep_kappa ? "t" : "kappa", a.fixed},
      {sweep_kappa ? "kappas" : "times", a.grid}};
  r.summary()["input_digest"] = digest;

  std::vector<double> lx, ly;
  for (double v : values) {
    const double kappa = sweep_kappa ? v : a.fixed;
    const double t = sweep_kappa ? a.fixed : v;
    ledger_row(r, name, digest, kappa, a.epsilon, t);
    const QueryLedger led = query_count(kappa, a.epsilon, t);
    if (v > 0.0 && led.total_queries > 0) {
      lx.push_back(std::log(v));
      ly.push_back(std::log(static_cast<double>(led.total_queries)));
    }
  }

  const double lo_band = sweep_kappa ? 1.7 : 0.8;
  const double hi_band = sweep_kappa ? 2.3 : 1.2;
  if (lx.size() >= 2) {
    const double slope = least_squares_slope(lx, ly);
    const bool in_band = slope >= lo_band && slope <= hi_band;
    r.summary()["slope"] = slope;
    r.summary()["slope_band"] = {lo_band, hi_band};
    r.summary()["slope_pass"] = in_band;
    r.row_status(in_band);
    std::cout << "  fitted log-log slope " << slope << " (band [" << lo_band
              << ", " << hi_band << "])\n";
  }
  return r.finish();
}

struct QueryCountArgs {
  Common common;
  double kappa = 0.0;
  double epsilon = 0.0;
  double t = 0.0;
};

int run_query_count(const QueryCountArgs& a) {
  require(a.kappa > 1.0, "--kappa must exceed 1");
  require(a.epsilon > 0.0 && a.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  check_cap(2 * degree_for_log(a.kappa, a.epsilon), a.common.degree_cap,
            "query-count: log polynomial");

  Runner r("query-count", a.common, kLedgerHeader);
  const std::string digest = Digest()
                                 .add("query-count")
                                 .add(a.kappa)
                                 .add(a.epsilon)
                                 .add(a.t)
                                 .hex();
  r.summary()["parameters"] = {{"kappa", a.kappa},
                               {"epsilon", a.epsilon},
                               {"t", a.t}};
  r.summary()["input_digest"] = digest;

  ledger_row(r, "query-count", digest, a.kappa, a.epsilon, a.t);
  const QueryLedger led = query_count(a.kappa, a.epsilon, a.t);
  std::cout << "query-count: (" << led.log_poly_degree << "+"
            << led.rect_poly_degree << ") x " << led.trig_degree << " = "
            << led.total_queries << " against prediction "
            << led.predicted_bound << "\n";
  return r.finish();
}

// ---------------------------------------------------------------------
// config merge: --config file.json turns into tokens right after the
// subcommand so explicit flags, parsed later, win.

std::vector<std::string> effective_args(int argc, char** argv) {
  std::vector<std::string> raw(argv + 1, argv + argc);
  std::string config_path;
  std::vector<std::string> cleaned;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == "--config") {
      if (i + 1 >= raw.size())
        throw std::invalid_argument("--config: missing file path");
      config_path = raw[++i];
    } else if (raw[i].rfind("--config=", 0) == 0) {
      config_path = raw[i].substr(9);
    } else {
      cleaned.push_back(raw[i]);
    }
  }
  if (config_path.empty()) return cleaned;
  if (cleaned.empty() || cleaned[0].rfind("-", 0) == 0)
    throw std::invalid_argument(
        "--config: name the subcommand on the command line");

  ordered_json j;
  try {
    j = ordered_json::parse(read_file(config_path));
  } catch (const std::exception& e) {
    throw std::invalid_argument(config_path + ": " + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument(config_path +
                                ": the config must be a JSON object");

  std::vector<std::string> merged;
  merged.push_back(cleaned[0]);
  for (const auto& [key, value] : j.items()) {
    const std::string option = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(option);
    } else if (value.is_string()) {
      merged.push_back(option);
      merged.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      merged.push_back(option);
      merged.push_back(value.dump());
    } else {
      throw std::invalid_argument(config_path + ": \"" + key +
                                  "\" must be a scalar");
    }
  }
  merged.insert(merged.end(), cleaned.begin() + 1, cleaned.end());
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  CLI::App app{
      "Desk-scale modular flow toolkit: block-encoded polynomial pipelines "
      "with CSV/JSON reports"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  ApproxLogArgs approx_log;
  MhPolyArgs mh_poly;
  FlowArgs flow_args;
  PurifiedArgs purified;
  EntropyArgs entropy_args;
  CorrelatorArgs corr;
  CccArgs ccc;
  SweepArgs sweep_k, sweep_t;
  QueryCountArgs qc;
  int code = 0;

  auto* sub_al = app.add_subcommand(
      "approx-log", "Audit the truncated Chebyshev expansion of ln(x)");
  sub_al->add_option("--kappa", approx_log.kappa, "Inverse spectral floor")
      ->required();
  sub_al->add_option("--epsilon", approx_log.epsilon, "Error budget")
      ->required();
  sub_al->add_option("--grid", approx_log.grid, "Audit grid size")
      ->capture_default_str();
  add_common(sub_al, approx_log.common);
  sub_al->callback([&] { code = run_approx_log(approx_log); });

  auto* sub_mh = app.add_subcommand(
      "mh-poly", "Audit the modular Hamiltonian polynomial");
  sub_mh->add_option("--kappa", mh_poly.kappa, "Inverse spectral floor")
      ->required();
  sub_mh->add_option("--epsilon", mh_poly.epsilon, "Error budget")
      ->required();
  sub_mh->add_option("--grid", mh_poly.grid, "Contract grid size")
      ->capture_default_str();
  add_common(sub_mh, mh_poly.common);
  sub_mh->callback([&] { code = run_mh_poly(mh_poly); });

  auto* sub_flow =
      app.add_subcommand("flow", "Conjugate an operator by modular flow");
  sub_flow->add_option("--state", flow_args.state_path, "Density matrix JSON")
      ->required();
  sub_flow
      ->add_option("--operator", flow_args.operator_path, "Operator JSON")
      ->required();
  sub_flow->add_option("--time", flow_args.t, "Flow time")->required();
  sub_flow->add_option("--epsilon", flow_args.epsilon, "Error budget")
      ->capture_default_str();
  sub_flow
      ->add_option("--kappa-override", flow_args.kappa_override,
                   "Bypass the spectral floor (0 = derive from the state)")
      ->capture_default_str();
  sub_flow->add_option("--mode", flow_args.mode, "exact or polynomial")
      ->check(CLI::IsMember({"exact", "polynomial"}))
      ->capture_default_str();
  add_common(sub_flow, flow_args.common);
  sub_flow->callback([&] { code = run_flow(flow_args); });

  auto* sub_pf = app.add_subcommand(
      "purified-flow", "Apply modular flow to one side of a purification");
  sub_pf->add_option("--state", purified.state_path, "Pure state JSON")
      ->required();
  sub_pf->add_option("--time", purified.t, "Flow time")->required();
  sub_pf->add_option("--delta", purified.delta, "Trace-distance budget")
      ->capture_default_str();
  add_common(sub_pf, purified.common);
  sub_pf->callback([&] { code = run_purified(purified); });

  auto* sub_en =
      app.add_subcommand("entropy", "Estimate the von Neumann entropy");
  sub_en->add_option("--state", entropy_args.state_path, "Density matrix JSON")
      ->required();
  sub_en->add_option("--method", entropy_args.method, "qpe or functional")
      ->check(CLI::IsMember({"qpe", "functional"}))
      ->capture_default_str();
  sub_en->add_option("--epsilon", entropy_args.epsilon, "Error budget")
      ->required();
  sub_en
      ->add_option("--delta", entropy_args.delta,
                   "Failure probability (qpe method)")
      ->capture_default_str();
  add_common(sub_en, entropy_args.common);
  sub_en->callback([&] { code = run_entropy(entropy_args); });

  auto* sub_co = app.add_subcommand(
      "correlator", "Two-sided modular correlator over a modular-time grid");
  sub_co->add_option("--state", corr.state_path, "Density matrix JSON")
      ->required();
  sub_co->add_option("--psi-r", corr.psi_r_path, "Right insertion JSON")
      ->required();
  sub_co->add_option("--psi-l", corr.psi_l_path, "Left insertion JSON")
      ->required();
  sub_co->add_option("--hl", corr.h_l_path,
                     "Left Hamiltonian JSON (evolves the left insertion)");
  sub_co->add_option("--s-grid", corr.s_grid, "Comma list of modular times")
      ->capture_default_str();
  sub_co->add_option("--time", corr.t, "Coordinate time")
      ->capture_default_str();
  sub_co->add_option("--mode", corr.mode, "exact or polynomial")
      ->check(CLI::IsMember({"exact", "polynomial"}))
      ->capture_default_str();
  sub_co->add_option("--epsilon", corr.epsilon, "Polynomial-mode budget")
      ->capture_default_str();
  add_common(sub_co, corr.common);
  sub_co->callback([&] { code = run_correlator(corr); });

  auto* sub_ccc = app.add_subcommand(
      "ccc", "Entropy under flow and its chiral slope on a tripartite state");
  sub_ccc->add_option("--state", ccc.state_path, "Tripartite density JSON")
      ->required();
  sub_ccc->add_option("--t1", ccc.t1, "First flow time")->required();
  sub_ccc->add_option("--t2", ccc.t2, "Second flow time")->required();
  add_common(sub_ccc, ccc.common);
  sub_ccc->callback([&] { code = run_ccc(ccc); });

  auto* sub_sk = app.add_subcommand(
      "sweep-kappa", "Query-count regression against the spectral floor");
  sweep_k.fixed = 1.0;
  sweep_k.grid = "4,8,16,32,64";
  sub_sk->add_option("--epsilon", sweep_k.epsilon, "Error budget")
      ->capture_default_str();
  sub_sk->add_option("--time", sweep_k.fixed, "Fixed flow time")
      ->capture_default_str();
  sub_sk->add_option("--kappas", sweep_k.grid, "Comma list of kappa values")
      ->capture_default_str();
  add_common(sub_sk, sweep_k.common);
  sub_sk->callback([&] { code = run_sweep(sweep_k, true); });

  auto* sub_st = app.add_subcommand(
      "sweep-time", "Query-count regression against the flow time");
  sweep_t.fixed = 64.0;
  sweep_t.grid = "1,2,4,8,16,32,64";
  sub_st->add_option("--epsilon", sweep_t.epsilon, "Error budget")
      ->capture_default_str();
  sub_st->add_option("--kappa", sweep_t.fixed, "Fixed kappa")
      ->capture_default_str();
  sub_st->add_option("--times", sweep_t.grid, "Comma list of flow times")
      ->capture_default_str();
  add_common(sub_st, sweep_t.common);
  sub_st->callback([&] { code = run_sweep(sweep_t, false); });

  auto* sub_qc = app.add_subcommand(
      "query-count", "Degree ledger for one (kappa, epsilon, t) point");
  sub_qc->add_option("--kappa", qc.kappa, "Inverse spectral floor")
      ->required();
  sub_qc->add_option("--epsilon", qc.epsilon, "Error budget")->required();
  sub_qc->add_option("--time", qc.t, "Flow time")->capture_default_str();
  add_common(sub_qc, qc.common);
  sub_qc->callback([&] { code = run_query_count(qc); });

  try {
    std::vector<std::string> args = effective_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int parse_code = app.exit(e);
    return parse_code == 0 ? 0 : 2;
  } catch (const DegreeCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
