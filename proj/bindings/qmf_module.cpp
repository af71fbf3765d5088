#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "qmf/chebyshev.hpp"
#include "qmf/encoding.hpp"
#include "qmf/estimators.hpp"
#include "qmf/flow.hpp"
#include "qmf/matfun.hpp"

namespace py = pybind11;

namespace {

using qmf::cplx;

using ComplexArray =
    py::array_t<cplx, py::array::c_style | py::array::forcecast>;

qmf::ComplexMatrix to_matrix(const ComplexArray& a) {
  if (a.ndim() != 2)
    throw std::invalid_argument("expected a 2-d complex array");
  qmf::ComplexMatrix m(static_cast<std::size_t>(a.shape(0)),
                       static_cast<std::size_t>(a.shape(1)));
  const auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = r(i, j);
  return m;
}

std::vector<cplx> to_cvector(const ComplexArray& a) {
  if (a.ndim() != 1)
    throw std::invalid_argument("expected a 1-d complex array");
  const auto r = a.unchecked<1>();
  std::vector<cplx> v(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    v[static_cast<std::size_t>(i)] = r(i);
  return v;
}

py::array_t<cplx> from_matrix(const qmf::ComplexMatrix& m) {
  py::array_t<cplx> out({m.rows, m.cols});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return out;
}

py::array_t<cplx> from_cvector(const std::vector<cplx>& v) {
  py::array_t<cplx> out(static_cast<py::ssize_t>(v.size()));
  auto w = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i)
    w(static_cast<py::ssize_t>(i)) = v[i];
  return out;
}

qmf::DensityMatrix as_density(const ComplexArray& a) {
  return qmf::validate_density(to_matrix(a));
}

py::dict ledger_dict(const qmf::QueryLedger& led) {
  py::dict d;
  d["log_degree"] = led.log_poly_degree;
  d["rect_degree"] = led.rect_poly_degree;
  d["trig_degree"] = led.trig_degree;
  d["total_queries"] = led.total_queries;
  d["predicted_bound"] = led.predicted_bound;
  return d;
}

py::dict estimate_dict(const qmf::EntropyEstimate& est) {
  py::dict d;
  d["value"] = est.value;
  d["epsilon"] = est.epsilon;
  d["delta"] = est.delta;
  d["shots"] = est.shots;
  d["method"] = est.method == qmf::EntropyMethod::qpe_sampled
                    ? "qpe"
                    : "functional";
  d["kappa_used"] = est.kappa_used;
  d["note"] = est.note;
  return d;
}

qmf::CorrelatorMode parse_mode(const std::string& mode) {
  if (mode == "exact") return qmf::CorrelatorMode::exact;
  if (mode == "polynomial") return qmf::CorrelatorMode::polynomial;
  throw std::invalid_argument("mode must be \"exact\" or \"polynomial\"");
}

}  // namespace

PYBIND11_MODULE(qmf, m) {
  m.doc() =
      "Classical simulator of modular-flow algorithms built from "
      "Chebyshev polynomial approximations: block-encoded matrix "
      "functions, modular time evolution, entropy estimators, and the "
      "holographic correlator.  Density matrices and operators are "
      "numpy complex arrays; states are validated on entry.";

  py::register_exception<qmf::DegreeCapError>(m, "DegreeCapExceeded",
                                              PyExc_RuntimeError);

  m.def(
      "exact_flow",
      [](const ComplexArray& rho, const ComplexArray& op, double t) {
        return from_matrix(qmf::exact_flow(as_density(rho), to_matrix(op), t));
      },
      py::arg("rho"), py::arg("operator"), py::arg("t"),
      "rho^{-it} O rho^{+it} by the spectral route, phase 1 on the kernel.");

  m.def(
      "approx_flow",
      [](const ComplexArray& rho, const ComplexArray& op, double t,
         double epsilon, double kappa, long long degree_cap) {
        const qmf::FlowResult res = qmf::approx_flow(
            as_density(rho), to_matrix(op), t, epsilon, kappa, degree_cap);
        py::dict d;
        d["operator"] = from_matrix(res.approx_operator);
        d["error_norm"] = res.error_norm;
        d["guarantee"] = res.guarantee;
        d["kappa_used"] = res.parameters.kappa_used;
        d["rescale_factor"] = res.rescale_factor;
        d["queries"] = ledger_dict(res.query_ledger);
        d["notes"] = res.notes;
        return d;
      },
      py::arg("rho"), py::arg("operator"), py::arg("t"), py::arg("epsilon"),
      py::arg("kappa") = 0.0, py::arg("degree_cap") = 0,
      "Polynomial modular flow; the dict carries the flowed operator, the "
      "measured error against the exact route, the a-priori guarantee, and "
      "the query ledger.");

  m.def(
      "purified_flow",
      [](const ComplexArray& amplitudes, const std::vector<std::size_t>& dims,
         double t, double delta, long long degree_cap) {
        const qmf::PureState psi(to_cvector(amplitudes), dims);
        const qmf::PurifiedFlowResult res =
            qmf::purified_flow(psi, t, delta, degree_cap);
        py::dict d;
        d["state"] = from_cvector(res.state.amplitudes);
        d["bound"] = res.bound;
        d["epsilon"] = res.epsilon;
        d["kappa"] = res.kappa;
        d["log_terms"] = res.log_terms;
        d["rect_degree"] = res.rect_degree;
        d["trig_degree"] = res.trig_degree;
        return d;
      },
      py::arg("amplitudes"), py::arg("dims"), py::arg("t"), py::arg("delta"),
      py::arg("degree_cap") = 0,
      "(rho_A^{it} x I)|psi> on a bipartite state within 2-norm distance "
      "delta, with the distance bound and polynomial degrees reported.");

  m.def(
      "query_count",
      [](double kappa, double epsilon, double t) {
        return ledger_dict(qmf::query_count(kappa, epsilon, t));
      },
      py::arg("kappa"), py::arg("epsilon"), py::arg("t"),
      "Degree ledger for the stated rules at face value, no matrices.");

  m.def(
      "von_neumann_entropy",
      [](const ComplexArray& rho) {
        return qmf::von_neumann_entropy(as_density(rho));
      },
      py::arg("rho"), "-sum lambda ln lambda in nats.");

  m.def(
      "entropy_qpe",
      [](const ComplexArray& rho, double epsilon, double delta,
         std::uint64_t seed) {
        return estimate_dict(
            qmf::entropy_qpe(as_density(rho), epsilon, delta, seed));
      },
      py::arg("rho"), py::arg("epsilon"), py::arg("delta"),
      py::arg("seed") = 0,
      "Sampled phase-estimation entropy; reproducible for a given seed.");

  m.def(
      "entropy_functional",
      [](const ComplexArray& rho, double epsilon, long long degree_cap) {
        return estimate_dict(qmf::entropy_functional_estimate(
            as_density(rho), epsilon, degree_cap));
      },
      py::arg("rho"), py::arg("epsilon"), py::arg("degree_cap") = 0,
      "Deterministic polynomial entropy estimate within epsilon.");

  m.def(
      "correlator",
      [](const ComplexArray& rho, const ComplexArray& psi_r,
         const ComplexArray& psi_l, double s, double t,
         const py::object& h_l, const std::string& mode, double epsilon) {
        const qmf::DensityMatrix dens = as_density(rho);
        const qmf::ComplexMatrix r = to_matrix(psi_r);
        const qmf::ComplexMatrix l = to_matrix(psi_l);
        if (h_l.is_none()) {
          return qmf::correlator(dens, r, l, s, t, nullptr, parse_mode(mode),
                                 epsilon)
              .value;
        }
        const qmf::ComplexMatrix h = to_matrix(h_l.cast<ComplexArray>());
        return qmf::correlator(dens, r, l, s, t, &h, parse_mode(mode), epsilon)
            .value;
      },
      py::arg("rho"), py::arg("psi_r"), py::arg("psi_l"), py::arg("s"),
      py::arg("t"), py::arg("h_l") = py::none(), py::arg("mode") = "exact",
      py::arg("epsilon") = 1e-2,
      "W(s,t) = Tr(rho {rho^{-is} psi_r rho^{is}, psi_l(t)}); psi_l is "
      "evolved under h_l when given, else taken as already evolved.");

  m.def(
      "entropy_under_flow",
      [](const ComplexArray& sigma, const std::vector<std::size_t>& dims,
         double t) {
        return qmf::entropy_under_flow(as_density(sigma), dims, t);
      },
      py::arg("sigma"), py::arg("dims"), py::arg("t"),
      "S(Tr_A sigma(t)) under the modular flow of the AB marginal.");

  m.def(
      "chiral_slope",
      [](const ComplexArray& sigma, const std::vector<std::size_t>& dims,
         double t1, double t2) {
        return qmf::chiral_slope(as_density(sigma), dims, t1, t2);
      },
      py::arg("sigma"), py::arg("dims"), py::arg("t1"), py::arg("t2"),
      "3 (S(t2) - S(t1)) / (pi (t2 - t1)).");

  m.def(
      "purify",
      [](const ComplexArray& rho) {
        const qmf::PureState psi = qmf::purify(as_density(rho));
        return py::make_tuple(from_cvector(psi.amplitudes),
                              psi.subsystem_dims);
      },
      py::arg("rho"),
      "Canonical purification; returns (amplitudes, subsystem dims).");

  m.def(
      "reduced_density",
      [](const ComplexArray& rho, const std::vector<std::size_t>& dims,
         const std::vector<std::size_t>& keep) {
        return from_matrix(
            qmf::reduced_density(as_density(rho), dims, keep).matrix);
      },
      py::arg("rho"), py::arg("dims"), py::arg("keep"),
      "Partial trace keeping the listed subsystems of a density matrix.");

  m.def(
      "reduced_density_pure",
      [](const ComplexArray& amplitudes, const std::vector<std::size_t>& dims,
         const std::vector<std::size_t>& keep) {
        const qmf::PureState psi(to_cvector(amplitudes), dims);
        return from_matrix(qmf::reduced_density(psi, keep).matrix);
      },
      py::arg("amplitudes"), py::arg("dims"), py::arg("keep"),
      "Partial trace of a pure state, keeping the listed subsystems.");

  m.def("degree_for_log", &qmf::degree_for_log, py::arg("kappa"),
        py::arg("epsilon"),
        "Truncation order from the geometric tail rule.");
  m.def("log_degree_for_tail", &qmf::log_degree_for_tail, py::arg("kappa"),
        py::arg("epsilon"),
        "Smallest order whose actual 1/N series tail meets epsilon.");
  m.def("log_series_eval", &qmf::log_series_eval, py::arg("n"), py::arg("x"),
        "Truncated Chebyshev series for ln x evaluated by Clenshaw.");
}
