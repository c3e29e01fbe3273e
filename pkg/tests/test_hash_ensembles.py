import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from privamp import hash_ensembles as he
from privamp.finite_field import FieldMatrix, FieldSpec, all_vectors, rank

F2, F3 = FieldSpec(2), FieldSpec(3)


def test_toeplitz_enumeration_order():
    fam = he.HashFamily("toeplitz", F2, 2, 1)
    got = [m.data.tolist() for m in fam.all_members()]
    assert got == [[[0, 0]], [[1, 0]], [[0, 1]], [[1, 1]]]
    with pytest.raises(he.IndexOutOfFamily):
        fam.member(4)


def test_family_sizes():
    assert he.HashFamily("toeplitz", F3, 4, 2).size == 3**5
    assert he.HashFamily("modified-toeplitz", F2, 5, 2).size == 2**4
    assert he.HashFamily("field-multiplication", F3, 3, 1).size == 27
    assert he.HashFamily("permuted-code-quotient", F2, 4, code=((1, 1, 1, 1),)).size == 24


def test_modified_toeplitz_identity_block():
    fam = he.HashFamily("modified-toeplitz", F2, 3, 2)
    for M in fam.all_members():
        assert np.array_equal(M.data[:, 1:], np.eye(2, dtype=int))


def test_sampling_is_reproducible():
    fam = he.HashFamily("toeplitz", F2, 6, 3)
    a = [fam.sample(np.random.default_rng(5)) for _ in range(3)]
    b = [fam.sample(np.random.default_rng(5)) for _ in range(3)]
    assert a == b


def test_explicit_list_verbatim_and_constant_map():
    Z = FieldMatrix(F2, np.zeros((2, 3), dtype=int))
    fam = he.HashFamily("explicit-list", F2, 3, 2, members=(Z,))
    assert fam.member(0) is Z
    assert he.collision_epsilon(fam).epsilon_universal == 4


def test_collision_examples():
    assert he.collision_epsilon(he.HashFamily("toeplitz", F2, 2, 1)).epsilon_universal == 1
    rep = he.certify(he.HashFamily("modified-toeplitz", F2, 4, 2), "exhaustive")
    assert rep.epsilon_universal == 1 and rep.epsilon_dual == 1


def test_dual_examples():
    assert he.dual_epsilon(he.HashFamily("toeplitz", F2, 3, 1)).epsilon_dual <= 2
    M = FieldMatrix(F2, [[1, 1, 0]])
    single = he.HashFamily("explicit-list", F2, 3, 1, members=(M,))
    # one member: the row space {0, 110} holds x with probability 1, t = 1
    assert he.dual_epsilon(single).epsilon_dual == 2 ** (3 - 1)


FLOOR_CASES = [
    (kind, q, n, m)
    for kind in ("toeplitz", "modified-toeplitz", "field-multiplication", "random-linear")
    for q, n, m in [(2, 3, 1), (2, 4, 2), (2, 5, 3), (3, 3, 1), (3, 4, 2)]
    if he.HashFamily(kind, FieldSpec(q), n, m).size * q**n <= 2**18
]


@pytest.mark.parametrize("kind,q,n,m", FLOOR_CASES)
def test_epsilon_floor(kind, q, n, m):
    fam = he.HashFamily(kind, FieldSpec(q), n, m)
    eps = he.collision_epsilon(fam).epsilon_universal
    assert eps >= he.epsilon_floor(q**n, q**m)


@pytest.mark.parametrize("q,n,m", [(2, 2, 1), (2, 4, 1), (2, 5, 2), (3, 3, 1), (3, 4, 2), (2, 6, 3)])
def test_modified_toeplitz_universal_and_dual(q, n, m):
    rep = he.certify(he.HashFamily("modified-toeplitz", FieldSpec(q), n, m), "exhaustive")
    assert rep.epsilon_universal == 1 and rep.epsilon_dual == 1


@pytest.mark.parametrize("q,n,m", [(2, 3, 1), (2, 4, 2), (2, 5, 3), (3, 3, 2), (3, 4, 1)])
def test_universal_families_are_q_dual(q, n, m):
    for kind in ("toeplitz", "field-multiplication"):
        fam = he.HashFamily(kind, FieldSpec(q), n, m)
        assert he.collision_epsilon(fam).epsilon_universal <= 1
        assert he.dual_epsilon(fam).epsilon_dual <= q


def test_permuted_epsilon_examples():
    assert he.permuted_ensemble_epsilon(np.eye(3, dtype=int), F2, 3) == 1
    assert he.permuted_ensemble_epsilon([[1, 1, 1]], F2, 3) == 4
    assert he.permuted_ensemble_epsilon([[1, 1]], F2, 2) == 2


codes = st.tuples(st.sampled_from([2, 3]), st.integers(2, 5), st.integers(0, 2**32 - 1))


@given(codes)
def test_permuted_epsilon_matches_exhaustive(args):
    q, n, seed = args
    spec = FieldSpec(q)
    rng = np.random.default_rng(seed)
    t = int(rng.integers(1, n))
    G = rng.integers(q, size=(t, n))
    if rank(spec, G) != t:
        return
    fam = he.HashFamily("permuted-code-quotient", spec, n, code=tuple(map(tuple, G)))
    assert he.collision_epsilon(fam, "exhaustive").epsilon_universal == he.permuted_ensemble_epsilon(G, spec, n)


def test_delta_examples():
    full = he.CodeEnsemble(F2, 3, (np.eye(3, dtype=int),))
    assert he.biased_delta(full)[0] == 0
    kers = he.CodeEnsemble.kernels_of(he.HashFamily("modified-toeplitz", F2, 4, 2))
    rep = he.code_to_biased_delta(kers)
    assert rep["delta"] <= 0.5 + 1e-15 and rep["within_bound"]
    one = he.CodeEnsemble(F2, 2, ([[1, 0]],))
    # x = 01 is in the dual {00, 01}: its character sum is 1
    assert he.biased_delta(one)[1] == 1


@pytest.mark.parametrize("n,m", [(3, 1), (4, 2), (5, 2), (5, 3)])
def test_delta_squared_is_dual_membership(n, m):
    for kind in ("modified-toeplitz", "toeplitz"):
        ens = he.CodeEnsemble.kernels_of(he.HashFamily(kind, F2, n, m))
        rep = he.code_to_biased_delta(ens)
        assert rep["delta_squared"] == rep["max_dual_membership"]


def test_delta_q3_needs_flag():
    ens = he.CodeEnsemble.kernels_of(he.HashFamily("modified-toeplitz", F3, 3, 1))
    with pytest.raises(he.NonBinaryField):
        he.biased_delta(ens)
    d, d2 = he.biased_delta(ens, generalized_character=True)
    counts = ens.dual().membership_counts()
    assert d2 == pytest.approx(counts[1:].max() / len(ens.codes), abs=1e-12)


def test_code_epsilon_full_subspace_ensemble():
    # every t-dim subspace: Pr[x in C] = (q^t - 1)/(q^n - 1) = 3/15, each x in 7 of 35 planes
    ens = he.CodeEnsemble.all_subspaces(F2, 4, 2)
    assert he.code_epsilon(ens) == Fraction(2**2 * 7, 35)
    assert he.code_epsilon(ens) <= 1


@pytest.mark.parametrize("shape", [(5, 3), (17, 9), (1500, 700), (2048, 2048)])
def test_toeplitz_fft_agrees(shape):
    n, m = shape
    rng = np.random.default_rng(n)
    diag = rng.integers(2, size=n + m - 1)
    x = rng.integers(2, size=n)
    a = he.toeplitz_apply(diag, x, m, n, method="naive")
    b = he.toeplitz_apply(diag, x, m, n, method="fft")
    assert np.array_equal(a, b)
    if n <= 64:
        T = he.toeplitz_matrix(diag, m, n)
        assert np.array_equal(a, T @ x % 2)


def test_monte_carlo_interval_covers_exact():
    fam = he.HashFamily("toeplitz", F2, 5, 2)
    exact = he.collision_epsilon(fam, "exhaustive").epsilon_universal
    mc = he.collision_epsilon(fam, "monte_carlo", samples=4000, seed=3)
    lo, hi = mc.interval
    assert mc.method == "monte_carlo" and lo <= float(exact) <= hi
    mc2 = he.collision_epsilon(fam, "monte_carlo", samples=4000, seed=3)
    assert mc2 == mc


def test_budget():
    fam = he.HashFamily("toeplitz", F2, 20, 10)
    with pytest.raises(he.BudgetExceeded):
        he.collision_epsilon(fam, "exhaustive")


def test_family_json_round_trip():
    fam = he.HashFamily("permuted-code-quotient", F3, 3, code=((1, 2, 0),))
    back = he.HashFamily.from_json(fam.to_json())
    assert back.all_members() == fam.all_members()
