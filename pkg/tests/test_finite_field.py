import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from privamp.finite_field import (
    DependentInput,
    FieldError,
    FieldMatrix,
    FieldSpec,
    FieldVector,
    InversionOfZero,
    all_vectors,
    coset_decompose,
    coset_table,
    dual_code,
    enumerate_subspaces,
    field_arith,
    kernel_basis,
    rank,
    rref,
    span,
    vector_index,
)

F2, F3, F5 = FieldSpec(2), FieldSpec(3), FieldSpec(5)
GF4 = FieldSpec(2, 2, (1, 1, 1))
FIELDS = [F2, F3, F5, GF4, FieldSpec(2, 3), FieldSpec(7)]


def test_arith_examples():
    assert field_arith(F2, 1, 1, "add") == 0
    assert field_arith(F5, 2, 0, "inv") == 3
    assert field_arith(GF4, 2, 2, "mul") == 3


def test_inverse_of_zero_rejected():
    with pytest.raises(InversionOfZero):
        field_arith(F5, 0, 0, "inv")


def test_bad_specs():
    with pytest.raises(FieldError):
        FieldSpec(4)
    with pytest.raises(FieldError):
        FieldSpec(3, 2)
    with pytest.raises(FieldError):
        FieldSpec(2, 2, (1, 0, 1))  # x^2 + 1 = (x + 1)^2
    with pytest.raises(FieldError):
        FieldSpec(2, 17)
    assert FieldSpec.of_order(8) == FieldSpec(2, 3)


@pytest.mark.parametrize("spec", FIELDS, ids=lambda s: f"q{s.q}")
def test_field_axioms_exhaustive(spec):
    q = spec.q
    els = range(q)
    for a, b in itertools.product(els, els):
        assert field_arith(spec, a, b, "add") == field_arith(spec, b, a, "add")
        assert field_arith(spec, a, b, "mul") == field_arith(spec, b, a, "mul")
        assert field_arith(spec, a, field_arith(spec, a, 0, "neg"), "add") == 0
    for a in range(1, q):
        assert field_arith(spec, a, field_arith(spec, a, 0, "inv"), "mul") == 1
    for a, b, c in itertools.product(els, els, els):
        lhs = field_arith(spec, a, field_arith(spec, b, c, "add"), "mul")
        rhs = field_arith(spec, field_arith(spec, a, b, "mul"), field_arith(spec, a, c, "mul"), "add")
        assert lhs == rhs


def test_kernel_examples():
    assert kernel_basis(FieldMatrix(F2, np.eye(2, dtype=int))) == []
    kb = kernel_basis(FieldMatrix(F2, [[1, 1]]))
    assert [list(v.elements) for v in kb] == [[1, 1]]


matrices = st.tuples(
    st.sampled_from([F2, F3, F5, GF4]), st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**32 - 1)
)


@given(matrices)
def test_kernel_basis_property(args):
    spec, m, n, seed = args
    data = np.random.default_rng(seed).integers(spec.q, size=(m, n))
    M = FieldMatrix(spec, data)
    kb = kernel_basis(M)
    assert len(kb) == n - rank(spec, data)
    for v in kb:
        assert not np.any(M.apply(v))


def test_dual_examples():
    assert len(dual_code([], F2, 2)) == 2
    d = dual_code([FieldVector(F2, [1, 1])])
    assert [list(v.elements) for v in d] == [[1, 1]]
    d = dual_code([FieldVector(F2, [1, 1, 1])])
    pts = span(F2, d, 3)
    assert len(d) == 2 and set(map(int, pts.sum(axis=1) % 2)) == {0}
    with pytest.raises(DependentInput):
        dual_code([FieldVector(F2, [1, 1]), FieldVector(F2, [1, 1])])


@given(matrices)
def test_dual_dimension_and_involution(args):
    spec, t, n, seed = args
    rows = np.random.default_rng(seed).integers(spec.q, size=(t, n))
    R, piv = rref(spec, rows)
    basis = [FieldVector(spec, r) for r in R[: len(piv)]]
    d = dual_code(basis, spec, n)
    assert len(basis) + len(d) == n
    C = {tuple(r) for r in span(spec, basis, n)}
    for y in d:
        assert all(int(spec.matmul(np.array(x)[None, :], y.elements[:, None])[0, 0]) == 0 for x in C)
    dd = dual_code(d, spec, n)
    assert {tuple(r) for r in span(spec, dd, n)} == C


def test_coset_decompose_examples():
    even = [FieldVector(F2, r) for r in ([1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1])]
    x = FieldVector(F2, [1, 0, 0, 0])
    label, comp = coset_decompose(x, even)
    assert label == 1  # representative 0001 is the smallest odd-weight vector
    rep = np.array([0, 0, 0, 1])
    assert np.array_equal((rep + comp.elements) % 2, x.elements)
    label, comp = coset_decompose(FieldVector(F2, [1, 1, 0, 0]), even)
    assert label == 0 and list(comp.elements) == [1, 1, 0, 0]


@pytest.mark.parametrize("spec,n", [(F2, 5), (F3, 4), (GF4, 3), (F2, 8)])
def test_coset_table_bijection(spec, n):
    rng = np.random.default_rng(n)
    for t in range(n + 1):
        G = enumerate_subspaces(spec, n, t)
        G = G[rng.integers(len(G))]
        tab = coset_table(spec, list(G), n)
        pairs = set(zip(tab.label.tolist(), tab.coeff.tolist()))
        assert len(pairs) == spec.q**n
        assert len(tab.rep) == spec.q ** (n - t)
        V = all_vectors(spec.q, n)
        C = span(spec, list(G), n)
        rebuilt = spec.add(V[tab.rep[tab.label]], C[tab.coeff])
        assert np.array_equal(vector_index(spec.q, rebuilt), np.arange(len(V)))
        # representative is the smallest member of its coset
        assert np.array_equal(tab.rep, tab.members.min(axis=1))


def test_subspace_counts():
    # Gaussian binomials [4 choose 2]_2 = 35 and [3 choose 1]_3 = 13
    assert len(enumerate_subspaces(F2, 4, 2)) == 35
    assert len(enumerate_subspaces(F3, 3, 1)) == 13


def test_json_round_trip():
    M = FieldMatrix(GF4, [[0, 1, 2], [3, 2, 1]])
    assert FieldMatrix.from_json(M.to_json()) == M
