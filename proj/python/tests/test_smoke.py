import numpy as np
import pytest

import qmf


def random_density(rng, d, weight=0.5):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    m = (1.0 - weight) * m + weight * np.eye(d) / d
    return 0.5 * (m + m.conj().T)


def random_hermitian_unit(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (g + g.conj().T)
    return h / np.linalg.norm(h, ord=2)


def modular_power(rho, s):
    lam, v = np.linalg.eigh(rho)
    return v @ np.diag(np.exp(-1j * s * np.log(lam))) @ v.conj().T


def test_exact_flow_matches_numpy():
    rng = np.random.default_rng(7)
    rho = random_density(rng, 6)
    op = random_hermitian_unit(rng, 6)
    t = 0.9

    u = modular_power(rho, t)
    reference = u @ op @ u.conj().T

    flowed = qmf.exact_flow(rho, op, t)
    assert np.max(np.abs(flowed - reference)) < 1e-10
    assert np.max(np.abs(qmf.exact_flow(rho, op, 0.0) - op)) < 1e-15


def test_approx_flow_meets_epsilon():
    rng = np.random.default_rng(11)
    rho = random_density(rng, 4)
    op = random_hermitian_unit(rng, 4)

    res = qmf.approx_flow(rho, op, 1.0, 1e-2)
    assert res["error_norm"] < 1e-2
    assert res["error_norm"] <= res["guarantee"] <= 1e-2

    u = modular_power(rho, 1.0)
    reference = u @ op @ u.conj().T
    assert np.linalg.norm(res["operator"] - reference, ord=2) < 1e-2
    assert res["queries"]["total_queries"] > 0


def test_degree_cap_raises():
    rng = np.random.default_rng(13)
    rho = random_density(rng, 4, weight=0.1)
    op = random_hermitian_unit(rng, 4)
    with pytest.raises(qmf.DegreeCapExceeded):
        qmf.approx_flow(rho, op, 1.0, 1e-3, degree_cap=100)


def test_entropy_estimators():
    rng = np.random.default_rng(17)
    rho = random_density(rng, 8)
    lam = np.linalg.eigvalsh(rho)
    exact = -np.sum(lam * np.log(lam))

    assert abs(qmf.von_neumann_entropy(rho) - exact) < 1e-12

    det = qmf.entropy_functional(rho, 0.1)
    assert det["method"] == "functional"
    assert abs(det["value"] - exact) <= 0.1

    sampled = qmf.entropy_qpe(rho, 0.1, 0.1, seed=5)
    assert sampled["shots"] > 0
    assert abs(sampled["value"] - exact) <= 0.1
    again = qmf.entropy_qpe(rho, 0.1, 0.1, seed=5)
    assert sampled["value"] == again["value"]


def test_correlator_exact_matches_dense():
    rng = np.random.default_rng(19)
    rho = random_density(rng, 4)
    pr = random_hermitian_unit(rng, 4)
    pl = random_hermitian_unit(rng, 4)
    hl = random_hermitian_unit(rng, 4)
    s, t = 1.0, 0.5

    lam_h, v_h = np.linalg.eigh(hl)
    u_t = v_h @ np.diag(np.exp(1j * lam_h * t)) @ v_h.conj().T
    b = u_t @ pl @ u_t.conj().T
    left = modular_power(rho, s)
    a = left @ pr @ left.conj().T
    reference = np.trace(rho @ (a @ b + b @ a))

    w = qmf.correlator(rho, pr, pl, s, t, h_l=hl)
    assert abs(w - reference) < 1e-10
    assert abs(w.imag) < 1e-9

    w_poly = qmf.correlator(rho, pr, pl, s, t, h_l=hl, mode="polynomial",
                            epsilon=1e-2)
    assert abs(w_poly - w) <= 1e-2


def test_purified_flow_bound():
    rng = np.random.default_rng(23)
    d = 2
    amps = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
    amps = amps / np.linalg.norm(amps)

    res = qmf.purified_flow(amps, [d, d], 1.0, 0.2)
    assert res["bound"] <= 0.2

    psi = amps.reshape(d, d)
    rho_a = psi @ psi.conj().T
    lam, v = np.linalg.eigh(rho_a)
    ua = v @ np.diag(np.exp(1j * np.log(lam))) @ v.conj().T
    reference = (ua @ psi).reshape(-1)
    assert np.linalg.norm(res["state"] - reference) <= res["bound"]


def test_partial_trace_and_purification():
    rng = np.random.default_rng(29)
    rho = random_density(rng, 3)

    amps, dims = qmf.purify(rho)
    assert list(dims) == [3, 3]
    back = qmf.reduced_density_pure(amps, [3, 3], [0])
    assert np.max(np.abs(back - rho)) < 1e-12

    sigma = random_density(rng, 8)
    marginal = qmf.reduced_density(sigma, [2, 2, 2], [1, 2])
    block = sigma.reshape(2, 4, 2, 4)
    reference = np.einsum("abad->bd", block)
    assert np.max(np.abs(marginal - reference)) < 1e-12


def test_entropy_under_flow_and_slope():
    rng = np.random.default_rng(31)
    sigma = random_density(rng, 8)
    dims = [2, 2, 2]

    s_bc = qmf.von_neumann_entropy(qmf.reduced_density(sigma, dims, [1, 2]))
    assert abs(qmf.entropy_under_flow(sigma, dims, 0.0) - s_bc) < 1e-10

    t1, t2 = 0.3, 1.1
    slope = qmf.chiral_slope(sigma, dims, t1, t2)
    recomputed = 3.0 * (qmf.entropy_under_flow(sigma, dims, t2)
                        - qmf.entropy_under_flow(sigma, dims, t1)) \
        / (np.pi * (t2 - t1))
    assert abs(slope - recomputed) < 1e-12


def test_query_count_pins():
    led = qmf.query_count(10.0, 1e-3, 1.0)
    assert led["log_degree"] == 1070
    assert led["rect_degree"] == 750
    assert led["trig_degree"] == 8
    assert led["total_queries"] == (1070 + 750) * 8
    assert led["total_queries"] <= 5.0 * led["predicted_bound"]


def test_degree_rules():
    assert qmf.degree_for_log(8.0, 0.1) == 181
    assert qmf.log_degree_for_tail(8.0, 0.1) == 79
    x = 0.37
    n = qmf.log_degree_for_tail(4.0, 1e-6)
    assert abs(qmf.log_series_eval(n, x) - np.log(x)) < 1e-5


def test_rejects_non_density():
    bad = np.eye(3, dtype=complex)  # trace 3
    with pytest.raises(ValueError):
        qmf.von_neumann_entropy(bad)
