import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from privamp import classical_info as ci
from privamp import pauli as pa
from privamp.finite_field import FieldMatrix, FieldSpec, all_vectors, span, vector_index

F2 = FieldSpec(2)


def rand_joint(seed, nA=None, nE=None):
    rng = np.random.default_rng(seed)
    nA = nA or int(rng.integers(2, 6))
    nE = nE or int(rng.integers(1, 5))
    return rng.dirichlet(np.ones(nA * nE)).reshape(nA, nE), rng


seeds = st.integers(0, 2**32 - 1)


def test_psi_examples():
    assert ci.psi(1, [0.9, 0.1], [0.5, 0.5]) == pytest.approx(math.log(1.64), abs=1e-12)
    assert math.log(1.64) == pytest.approx(0.494696, abs=1e-6)
    P = np.array([0.2, 0.3, 0.5])
    for s in (-0.5, 0.3, 2.0):
        assert ci.psi(s, P, P) == pytest.approx(0, abs=1e-14)
    assert ci.psi(0, [0.1, 0.2], [0.5, 0.5]) == pytest.approx(math.log(0.3))


def test_support_violation():
    with pytest.raises(ci.SupportViolation):
        ci.psi(1, [0.5, 0.5], [1.0, 0.0])
    with pytest.raises(ci.SupportViolation):
        ci.cond_renyi(1, [[0.5, 0.5]], [1.0, 0.0])


@given(seeds)
def test_psi_over_s_nondecreasing(seed):
    rng = np.random.default_rng(seed)
    P, Q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    vals = [ci.psi(s, P, Q) / s for s in (-0.5, 0.25, 0.5, 1.0)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_cond_renyi_uniform():
    T = np.full((4, 3), 1 / 12)
    for s in (0, 0.3, 1, 2):
        assert ci.cond_renyi(s, T, np.full(3, 1 / 3)) == pytest.approx(math.log(4), abs=1e-12)
    assert ci.cond_renyi(1, T) == pytest.approx(1.386294, abs=1e-6)


@given(seeds)
def test_cond_renyi_monotone_and_shannon_limit(seed):
    T, rng = rand_joint(seed)
    Q = rng.dirichlet(np.ones(T.shape[1]))
    grid = [0.01, 0.1, 0.5, 1, 2]
    H = [ci.cond_renyi(s, T, Q) for s in grid]
    assert all(b <= a + 1e-12 for a, b in zip(H, H[1:]))
    h0 = ci.cond_renyi(0, T, Q)
    assert h0 >= H[0] - 1e-12
    assert ci.cond_renyi(1e-7, T, Q) == pytest.approx(h0, abs=1e-5)


def test_phi_examples():
    Q = np.array([0.3, 0.7])
    T = np.outer(np.full(4, 0.25), Q)
    for s in (0.1, 0.5, 0.9):
        assert ci.phi(s, T) == pytest.approx(-s * math.log(4), abs=1e-12)
    simple = pa.SimpleClassicalModel(2, [0.9, 0.1], [0.9, 0.1])
    H2 = -math.log(0.81 + 0.01)
    assert H2 == pytest.approx(0.198451, abs=1e-6)
    assert ci.phi(0.5, simple.P_AE) == pytest.approx(-0.5 * H2, abs=1e-12)
    assert ci.phi(0.5, simple.P_AE) == pytest.approx(-0.099226, abs=1e-6)
    with pytest.raises(ci.DomainError):
        ci.phi(1, T)


@given(seeds)
def test_phi_derivative_at_zero(seed):
    T, _ = rand_joint(seed)
    h = 1e-6
    assert (ci.phi(h, T) - ci.phi(-h, T)) / (2 * h) == pytest.approx(-ci.cond_shannon(T), abs=1e-6)


@given(seeds)
def test_phi_chaining(seed):
    rng = np.random.default_rng(seed)
    nA, nB, nE = 3, 2, 3
    P = rng.dirichlet(np.ones(nA * nB * nE)).reshape(nA, nB, nE)
    A_BE = P.reshape(nA, nB * nE)
    AB_E = P.reshape(nA * nB, nE)
    for t in (0.2, 0.5, 0.9):
        assert ci.phi(t, A_BE) <= t * math.log(nB) + ci.phi(t, AB_E) + 1e-12


def test_secrecy_examples():
    Q = np.array([0.2, 0.8])
    zero = ci.secrecy_criteria(np.outer([0.5, 0.5], Q))
    assert max(zero) == pytest.approx(0, abs=1e-15)
    diag = ci.secrecy_criteria(np.eye(2) / 2)
    assert diag.d1_prime == pytest.approx(1) and diag.I_prime == pytest.approx(math.log(2))
    with pytest.raises(ci.NotNormalized):
        ci.secrecy_criteria(np.eye(2) / 4)


@given(seeds)
def test_pinsker_and_fannes(seed):
    T, _ = rand_joint(seed)
    c = ci.secrecy_criteria(T)
    assert c.d1_prime**2 <= 2 * c.I_prime + 1e-12
    assert c.I_prime <= ci.eta_hull(c.d1_prime, math.log(T.shape[0])) + 1e-12
    assert c.I <= c.I_prime + 1e-12


def test_eta_examples():
    assert ci.eta(0, 5) == 0
    assert ci.eta(1, 3.5) == 3.5
    assert ci.eta(0.5, math.log(2)) == pytest.approx(math.log(2))
    assert ci.eta_hull(10, 1.0) == pytest.approx(ci.eta(1, 1.0))
    assert math.exp(ci.log_eta_hull(math.log(0.3), 2.0)) == pytest.approx(ci.eta(0.3, 2.0))


def test_apply_hash_examples():
    T, _ = rand_joint(1, 4, 2)
    assert np.array_equal(ci.apply_hash(T, np.arange(4)), T)
    const = ci.apply_hash(T, lambda a: 0)
    assert const.shape == (1, 2) and ci.d1_prime(const) == pytest.approx(0)
    parity = FieldMatrix(F2, [[1, 1]])
    P = np.array([[0.1], [0.2], [0.3], [0.4]])  # a = 00, 01, 10, 11
    assert np.allclose(ci.apply_hash(P, parity), [[0.5], [0.5]])
    P = np.array([[0.4], [0.1], [0.3], [0.2]])
    assert np.allclose(ci.apply_hash(P, parity), [[0.6], [0.4]])


@given(seeds)
def test_hashing_never_raises_conditional_entropy(seed):
    T, rng = rand_joint(seed, 8, 3)
    f = FieldMatrix(F2, rng.integers(2, size=(2, 3)))
    out = ci.apply_hash(T, f)
    assert out.sum() == pytest.approx(1, abs=1e-14)
    assert ci.cond_shannon(out) <= ci.cond_shannon(T) + 1e-12


def test_convolve_examples():
    T, _ = rand_joint(3, 8, 2)
    delta = np.eye(8)[0]
    assert np.allclose(ci.convolve(T, delta, F2, 3), T)
    out = ci.convolve(T, np.full(8, 1 / 8), F2, 3)
    assert np.allclose(out.sum(axis=1), 1 / 8)
    with pytest.raises(ci.NonGroupAlphabet):
        ci.convolve(np.ones((3, 1)) / 3, np.ones(3) / 3, F2, 2)


@given(seeds)
def test_convolve_with_code_is_coset_average(seed):
    T, rng = rand_joint(seed, 8, 2)
    G = [[1, 1, 0], [0, 1, 1]]
    C = vector_index(2, span(F2, G, 3))
    W = np.zeros(8)
    W[C] = 1 / len(C)
    parity = FieldMatrix(F2, [[1, 1, 1]])  # kernel is the code
    hashed = ci.apply_hash(T, parity)
    labels = ci.hash_index_map(parity)
    lifted = hashed[labels] / len(C)
    assert np.allclose(ci.convolve(T, W, F2, 3), lifted, atol=1e-15)


def test_optimal_QE_independent_conditionals():
    Q = np.array([0.1, 0.6, 0.3])
    T = np.outer([0.7, 0.2, 0.1], Q)
    assert np.allclose(ci.optimal_QE(0.7, T), Q)
    with pytest.raises(ci.DegenerateP):
        ci.optimal_QE(1, np.zeros((2, 2)))


@given(seeds)
def test_optimal_QE_attains_maximum(seed):
    T, rng = rand_joint(seed)
    nE = T.shape[1]
    for s in (0.3, 1.0):
        Qs = ci.optimal_QE(s, T)
        best = s * ci.cond_renyi(s, T, Qs)
        assert best == pytest.approx(-(1 + s) * ci.phi(s / (1 + s), T), abs=1e-10)
        for Q in rng.dirichlet(np.ones(nE), size=200):
            assert s * ci.cond_renyi(s, T, Q) <= best + 1e-9


@given(seeds)
def test_d2_forms_and_collision_bound(seed):
    T, rng = rand_joint(seed)
    Q = rng.dirichlet(np.ones(T.shape[1]))
    d2 = ci.d2_conditional(T, Q)
    assert d2 == pytest.approx(ci.d2_expansion(T, Q), abs=1e-10)
    assert ci.d1_prime(T) <= math.sqrt(T.shape[0]) * math.sqrt(d2) + 1e-12


def test_d2_zero_on_ideal():
    Q = np.array([0.5, 0.25, 0.25])
    assert ci.d2_conditional(np.outer([0.5, 0.5], Q), Q) == pytest.approx(0, abs=1e-16)


@given(seeds)
def test_data_processing_on_E(seed):
    T, rng = rand_joint(seed, 3, 3)
    W = rng.dirichlet(np.ones(4), size=3)
    out = ci.apply_channel_E(T, W)
    for s in (0.2, 0.7, 1.0):
        assert ci.cond_renyi(s, out) >= ci.cond_renyi(s, T) - 1e-10


def test_joint_subdistribution():
    J = ci.JointSubDistribution([[0.2, 0.1], [0.3, 0.1]], ("x", "y"), ("u", "v"))
    assert J.mass == pytest.approx(0.7) and not J.normalized
    assert np.allclose(J.marginal_E, [0.5, 0.2])
    assert J.to_rows()[0] == ("x", "u", 0.2)
    with pytest.raises(ValueError):
        ci.JointSubDistribution([[0.9, 0.9]])
    with pytest.raises(ValueError):
        ci.JointSubDistribution([[-0.1, 0.2]])
