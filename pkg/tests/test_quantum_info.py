import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from privamp import classical_info as ci
from privamp import quantum_info as qi
from privamp.finite_field import FieldMatrix, FieldSpec, span, vector_index

F2 = FieldSpec(2)
seeds = st.integers(0, 2**32 - 1)


def diag_state(T):
    return qi.CqState.from_classical(T)


def test_psi_self_and_classical_reduction(rng):
    r = qi.random_density(3, rng)
    for s in (0.2, 1.0, 1.7):
        assert qi.psi_bar_q(s, r, r) == pytest.approx(0, abs=1e-12)
    P, Q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
    for s in (0.3, 1.0):
        assert qi.psi_q(s, np.diag(P), np.diag(Q)) == pytest.approx(ci.psi(s, P, Q), abs=1e-12)
        assert qi.psi_bar_q(s, np.diag(P), np.diag(Q)) == pytest.approx(ci.psi(s, P, Q), abs=1e-12)


def test_support_violation():
    with pytest.raises(qi.SupportViolation):
        qi.psi_q(1, np.eye(2) / 2, np.diag([1.0, 0.0]))


@given(seeds)
def test_psi_bar_below_psi_and_monotone(seed):
    rng = np.random.default_rng(seed)
    r, g = qi.random_density(3, rng), qi.random_density(3, rng)
    D = qi.relative_entropy(r, g)
    grid = (0.25, 0.5, 1.0)
    for s in grid:
        assert qi.psi_bar_q(s, r, g) <= qi.psi_q(s, r, g) + 1e-12
        assert s * D <= qi.psi_bar_q(s, r, g) + 1e-12
    for f in (qi.psi_q, qi.psi_bar_q):
        vals = [f(s, r, g) / s for s in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert f(1e-6, r, g) / 1e-6 == pytest.approx(D, abs=1e-4)


def test_cond_renyi_examples(rng):
    sig = qi.random_density(2, rng)
    rho = qi.CqState(np.stack([sig / 2, sig / 2]))
    for s in (0.1, 0.5, 1.0):
        assert qi.cond_renyi_q(s, rho, sig) == pytest.approx(math.log(2), abs=1e-12)
    T = rng.dirichlet(np.ones(6)).reshape(3, 2)
    Q = rng.dirichlet(np.ones(2))
    for s in (0, 0.4, 1.0):
        assert qi.cond_renyi_q(s, diag_state(T), np.diag(Q)) == pytest.approx(ci.cond_renyi(s, T, Q), abs=1e-12)


@given(seeds)
def test_cond_renyi_monotone_and_hmin(seed):
    rng = np.random.default_rng(seed)
    rho = qi.random_cq_state(2, 2, rng)
    for bar in (False, True):
        H = [qi.cond_renyi_q(s, rho, bar=bar) for s in (0.1, 0.3, 0.6, 1.0)]
        assert all(b <= a + 1e-12 for a, b in zip(H, H[1:]))
    assert qi.cond_renyi_q(1, rho, bar=True) >= qi.hmin_q(rho) - 1e-12


def test_phi_q_classical_reduction(rng):
    T = rng.dirichlet(np.ones(8)).reshape(4, 2)
    for s in (0.1, 0.5, 0.9):
        assert qi.phi_q(s, diag_state(T)) == pytest.approx(ci.phi(s, T), abs=1e-12)
    with pytest.raises(qi.DomainError):
        qi.phi_q(1.0, diag_state(T))


@given(seeds)
def test_phi_q_bounds_renyi_and_derivative(seed):
    rng = np.random.default_rng(seed)
    rho = qi.random_cq_state(2, 3, rng)
    for s in (0.1, 0.5, 0.9):
        assert s * qi.cond_renyi_q(s, rho) >= -qi.phi_q(s, rho) - 1e-10
    h = 1e-5
    d = (qi.phi_q(h, rho) - qi.phi_q(-h, rho)) / (2 * h)
    assert d == pytest.approx(-qi.cond_shannon_q(rho), abs=1e-6)


@given(seeds)
def test_phi_q_data_processing(seed):
    rng = np.random.default_rng(seed)
    rho = qi.random_cq_state(2, 2, rng)
    out = qi.apply_channel_q(rho, qi.random_channel(2, 3, rng))
    for s in (0.2, 0.5, 1.0):
        t = s / (1 + s)
        assert qi.phi_q(t, out) <= qi.phi_q(t, rho) + 1e-10


@given(seeds)
def test_optimal_sigma_attains_maximum(seed):
    rng = np.random.default_rng(seed)
    rho = qi.random_cq_state(2, 2, rng)
    s = 0.6
    best = s * qi.cond_renyi_q(s, rho, qi.optimal_sigma(s, rho))
    assert best == pytest.approx(-(1 + s) * qi.phi_q(s / (1 + s), rho), abs=1e-10)
    for _ in range(100):
        g = qi.random_density(2, rng)
        assert s * qi.cond_renyi_q(s, rho, g) <= best + 1e-9


def test_spectrum_examples():
    st_ = qi.spectrum_stats(np.eye(3) / 3)
    assert st_.v == 1 and st_.lam == 0
    st_ = qi.spectrum_stats(np.diag([0.5, 0.25, 0.25]))
    assert st_.v == 2 and st_.lam == pytest.approx(math.log(2))
    with pytest.raises(qi.ZeroOperator):
        qi.spectrum_stats(np.zeros((2, 2)))


def test_spectrum_tensor_merge(rng):
    a, b = np.diag([0.5, 0.3, 0.2]), np.diag([0.6, 0.4])
    assert qi.spectrum_stats(np.kron(a, b)).v <= 6
    c = np.diag([0.5, 0.5 * 0.5, 0.25])
    assert qi.spectrum_stats(np.kron(c, np.diag([0.5, 0.5]))).v == 2


def test_pinching_examples(rng):
    r = qi.random_density(3, rng)
    assert np.allclose(qi.pinching(np.eye(3), r), r)
    out = qi.pinching(np.diag([0.5, 0.3, 0.2]), r)
    assert np.allclose(out, np.diag(np.diag(r)))


@given(seeds)
def test_pinching_commutes_and_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    g = qi.random_density(4, rng)
    g = g @ g  # generic spectrum
    r = qi.random_density(4, rng)
    out = qi.pinching(g, r)
    assert np.max(np.abs(out @ g - g @ out)) <= 1e-9
    assert np.trace(out).real == pytest.approx(1, abs=1e-12)


def test_secrecy_examples(rng):
    sig = qi.random_density(2, rng)
    rho = qi.CqState(np.stack([sig / 2, sig / 2]))
    d1, I = qi.secrecy_criteria_q(rho)
    assert d1 == pytest.approx(0, abs=1e-12) and I == pytest.approx(0, abs=1e-12)
    assert qi.d2_q(rho, sig) == pytest.approx(0, abs=1e-12)
    T = rng.dirichlet(np.ones(6)).reshape(3, 2)
    c = ci.secrecy_criteria(T)
    d1, I = qi.secrecy_criteria_q(diag_state(T))
    assert d1 == pytest.approx(c.d1_prime, abs=1e-12) and I == pytest.approx(c.I_prime, abs=1e-12)


@given(seeds)
def test_d2_forms_and_pinsker(seed):
    rng = np.random.default_rng(seed)
    rho = qi.random_cq_state(2, 3, rng)
    g = qi.random_density(3, rng)
    assert qi.d2_q(rho, g) == pytest.approx(qi.d2_q_expansion(rho, g), abs=1e-9)
    d1, I = qi.secrecy_criteria_q(rho)
    assert d1**2 <= 2 * I + 1e-12
    assert I <= ci.eta_hull(d1, math.log(2)) + 1e-12


@given(seeds)
def test_araki_type_trace_inequality(seed):
    rng = np.random.default_rng(seed)
    A, B = qi.random_density(3, rng), qi.random_density(3, rng)
    for r in (1.0, 1.5, 2.5):
        half = qi.mpow(A, 0.5)
        lhs = np.trace(qi.mpow(half @ B @ half, r)).real
        ar = qi.mpow(A, r / 2)
        rhs = np.trace(ar @ qi.mpow(B, r) @ ar).real
        assert lhs <= rhs + 1e-12


def test_convolve_and_hash_identities(rng):
    rho = qi.random_cq_state(4, 2, rng)
    delta = np.eye(4)[0]
    assert np.allclose(qi.convolve_q(rho, delta, F2, 2).blocks, rho.blocks)
    ident = FieldMatrix(F2, np.eye(2, dtype=int))
    assert np.allclose(qi.apply_hash_q(rho, ident).blocks, rho.blocks)
    # uniform on C = span{11}: each block becomes the hashed block over |C|
    W = np.zeros(4)
    W[vector_index(2, span(F2, [[1, 1]], 2))] = 0.5
    f = FieldMatrix(F2, [[1, 1]])
    hashed = qi.apply_hash_q(rho, f)
    lifted = hashed.blocks[ci.hash_index_map(f)] / 2
    assert np.allclose(qi.convolve_q(rho, W, F2, 2).blocks, lifted, atol=1e-15)


def test_cq_state_invariants_and_json(rng):
    rho = qi.random_cq_state(3, 2, rng)
    back = qi.CqState.from_json(rho.to_json())
    assert np.allclose(back.blocks, rho.blocks, atol=1e-15)
    with pytest.raises(ValueError):
        qi.CqState(np.stack([np.diag([0.7, -0.1])]))
    with pytest.raises(qi.DimCap):
        qi.CqState(np.zeros((17, 16, 16)))
    with pytest.raises(ValueError):
        qi.CqState.from_conditionals([0.5, 0.5], [np.eye(2), np.eye(2) / 2])


def test_hermitian_operator_phase_convention(rng):
    H = qi.HermitianOperator(qi.random_density(3, rng))
    w, V = H.spectrum
    assert np.all(np.diff(w) <= 0)
    for j in range(3):
        k = int(np.argmax(np.abs(V[:, j]) > 1e-12))
        assert abs(V[k, j].imag) < 1e-12 and V[k, j].real > 0
    assert np.allclose(H.power(1.0), H.entries)
