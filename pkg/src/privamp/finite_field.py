"""Exact arithmetic over F_q and the small linear algebra built on it.

Elements are stored as integer codes in [0, q).  For prime fields the code is
the residue; for GF(2^k) bit i of the code is the coefficient of x^i.
Vectors of F_q^n are indexed lexicographically (first coordinate most
significant), which fixes the enumeration order used everywhere else.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

MAX_Q = 2**16
MAX_EXHAUSTIVE_N = 64


class FieldError(ValueError):
    pass


class InversionOfZero(FieldError):
    pass


class DependentInput(FieldError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def _poly_code(coeffs) -> int:
    return sum(int(c) << i for i, c in enumerate(coeffs))


def _gf2_polymod(a: int, mod: int) -> int:
    dm = mod.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a


def _gf2_irreducible(code: int) -> bool:
    deg = code.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for div in range(1 << d, 1 << (d + 1)):
            if _gf2_polymod(code, div) == 0:
                return False
    return True


def default_gf2_polynomial(k: int) -> tuple[int, ...]:
    """Smallest irreducible binary polynomial of degree k, lowest degree first."""
    for code in range(1 << k, 1 << (k + 1)):
        if _gf2_irreducible(code):
            return tuple((code >> i) & 1 for i in range(k + 1))
    raise FieldError(f"no irreducible polynomial of degree {k}")


@dataclass(frozen=True)
class FieldSpec:
    """F_q with q = p (prime) or q = 2^k given by a reduction polynomial."""

    p: int
    k: int = 1
    poly: tuple[int, ...] = ()

    def __post_init__(self):
        if not _is_prime(self.p):
            raise FieldError(f"characteristic {self.p} is not prime")
        if self.k < 1:
            raise FieldError("extension degree must be >= 1")
        if self.p**self.k > MAX_Q:
            raise FieldError(f"q = {self.p}^{self.k} exceeds cap {MAX_Q}")
        if self.k > 1:
            if self.p != 2:
                raise FieldError("extension fields are supported only for p = 2")
            poly = tuple(int(c) for c in self.poly) or default_gf2_polynomial(self.k)
            if len(poly) != self.k + 1 or poly[-1] != 1:
                raise FieldError("reduction polynomial must have degree k")
            if not _gf2_irreducible(_poly_code(poly)):
                raise FieldError("reduction polynomial is reducible")
            object.__setattr__(self, "poly", poly)
        elif self.poly:
            raise FieldError("reduction polynomial given for a prime field")

    @classmethod
    def of_order(cls, q: int) -> "FieldSpec":
        if _is_prime(q):
            return cls(q)
        k = q.bit_length() - 1
        if q == 1 << k:
            return cls(2, k)
        raise FieldError(f"unsupported field order {q}")

    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def is_prime_field(self) -> bool:
        return self.k == 1

    # exp/log tables for GF(2^k)
    @cached_property
    def _tables(self):
        q = self.q
        mod = _poly_code(self.poly)
        for g in range(2, q) if q > 2 else [1]:
            exp = np.zeros(2 * q, dtype=np.int64)
            x, seen = 1, set()
            for i in range(q - 1):
                exp[i] = x
                seen.add(x)
                x = _gf2_polymod(_gf2_mul_raw(x, g), mod)
            if len(seen) == q - 1:
                exp[q - 1 : 2 * q - 2] = exp[: q - 1]
                log = np.zeros(q, dtype=np.int64)
                log[exp[: q - 1]] = np.arange(q - 1)
                return exp, log
        raise FieldError("no primitive element found")

    # vectorized element operations
    def add(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        return (a + b) % self.p if self.k == 1 else a ^ b

    def neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        return (-a) % self.p if self.k == 1 else a

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a * b) % self.p
        exp, log = self._tables
        out = exp[log[a] + log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise InversionOfZero("zero has no inverse")
        if self.k == 1:
            return np.vectorize(lambda x: pow(int(x), self.p - 2, self.p), otypes=[np.int64])(a)
        exp, log = self._tables
        return exp[(self.q - 1 - log[a]) % (self.q - 1)]

    def matmul(self, A, B):
        """Matrix product over the field; A is (..., m, n), B is (n, r)."""
        A, B = np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64)
        if self.k == 1:
            return (A @ B) % self.p
        prod = self.mul(A[..., :, :, None], B[None, :, :] if A.ndim == 2 else B)
        return np.bitwise_xor.reduce(prod, axis=-2)

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "poly": list(self.poly)}


def _gf2_mul_raw(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def field_arith(spec: FieldSpec, a: int, b: int, op: str) -> int:
    """Single-element arithmetic; op is one of add, mul, inv, neg."""
    for v in (a, b):
        if not 0 <= v < spec.q:
            raise FieldError(f"element {v} out of range for q={spec.q}")
    if op == "add":
        return int(spec.add(a, b))
    if op == "mul":
        return int(spec.mul(a, b))
    if op == "neg":
        return int(spec.neg(a))
    if op == "inv":
        return int(spec.inv(a))
    raise FieldError(f"unknown op {op!r}")


@dataclass(frozen=True, eq=False)
class FieldVector:
    spec: FieldSpec
    elements: np.ndarray

    def __post_init__(self):
        arr = np.array(self.elements, dtype=np.int64).reshape(-1)
        if np.any((arr < 0) | (arr >= self.spec.q)):
            raise FieldError("vector element out of range")
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        return (
            isinstance(other, FieldVector)
            and self.spec == other.spec
            and np.array_equal(self.elements, other.elements)
        )

    def __hash__(self):
        return hash((self.spec, self.elements.tobytes()))

    def index(self) -> int:
        return int(vector_index(self.spec.q, self.elements))


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    spec: FieldSpec
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise FieldError("matrix data must be two-dimensional")
        if np.any((arr < 0) | (arr >= self.spec.q)):
            raise FieldError("matrix element out of range")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, FieldMatrix)
            and self.spec == other.spec
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.spec, self.data.shape, self.data.tobytes()))

    def apply(self, x):
        """Image of a vector (or rows of vectors) under the map x -> Mx."""
        x = np.asarray(x.elements if isinstance(x, FieldVector) else x, dtype=np.int64)
        return self.spec.matmul(x.reshape(-1, self.cols), self.data.T).reshape(
            x.shape[:-1] + (self.rows,)
        )

    def to_json(self) -> dict:
        d = self.spec.to_json()
        d.update(rows=self.rows, cols=self.cols, data=[int(v) for v in self.data.reshape(-1)])
        return d

    @classmethod
    def from_json(cls, d: dict) -> "FieldMatrix":
        spec = FieldSpec(int(d["p"]), int(d.get("k", 1)), tuple(d.get("poly", ())))
        data = np.array(d["data"], dtype=np.int64).reshape(int(d["rows"]), int(d["cols"]))
        return cls(spec, data)


def all_vectors(q: int, n: int) -> np.ndarray:
    """Every vector of F_q^n as a (q^n, n) array in lexicographic order."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(q**n, dtype=np.int64)
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


def vector_index(q: int, vecs) -> np.ndarray:
    vecs = np.asarray(vecs, dtype=np.int64)
    n = vecs.shape[-1]
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return vecs @ powers


def rref(spec: FieldSpec, A) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    R = np.array(A, dtype=np.int64).copy()
    if R.ndim != 2:
        raise FieldError("rref expects a matrix")
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(R[row:, col])[0]
        if nz.size == 0:
            continue
        r = row + int(nz[0])
        R[[row, r]] = R[[r, row]]
        R[row] = spec.mul(R[row], spec.inv(R[row, col]))
        for other in range(m):
            if other != row and R[other, col]:
                R[other] = spec.sub(R[other], spec.mul(R[row], R[other, col]))
        pivots.append(col)
        row += 1
    return R, pivots


def rank(spec: FieldSpec, A) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(spec, A)[1])


def _basis_rows(basis, spec: FieldSpec, n: int | None = None) -> np.ndarray:
    rows = [b.elements if isinstance(b, FieldVector) else np.asarray(b) for b in basis]
    if not rows:
        return np.zeros((0, n or 0), dtype=np.int64)
    return np.array(rows, dtype=np.int64).reshape(len(rows), -1)


def kernel_basis(M: FieldMatrix) -> list[FieldVector]:
    """Basis of {x : Mx = 0}; each returned vector is checked to map to zero."""
    spec, n = M.spec, M.cols
    R, pivots = rref(spec, M.data)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = np.zeros(n, dtype=np.int64)
        x[f] = 1
        for i, pc in enumerate(pivots):
            x[pc] = spec.neg(R[i, f])
        basis.append(x)
    for x in basis:
        if np.any(M.apply(x)):
            raise FieldError("kernel vector failed verification")
    return [FieldVector(spec, x) for x in basis]


def dual_code(basis, spec: FieldSpec | None = None, n: int | None = None) -> list[FieldVector]:
    """Basis of the orthogonal complement of span(basis) in F_q^n."""
    if basis:
        spec = basis[0].spec if isinstance(basis[0], FieldVector) else spec
        n = len(basis[0])
    if spec is None or n is None:
        raise FieldError("spec and n are required for an empty basis")
    G = _basis_rows(basis, spec, n)
    if rank(spec, G) != len(G):
        raise DependentInput("code basis vectors are linearly dependent")
    if len(G) == 0:
        return [FieldVector(spec, row) for row in np.eye(n, dtype=np.int64)]
    return kernel_basis(FieldMatrix(spec, G))


def span(spec: FieldSpec, basis, n: int) -> np.ndarray:
    """All q^t elements of span(basis), ordered lexicographically by coefficients."""
    G = _basis_rows(basis, spec, n)
    coeffs = all_vectors(spec.q, len(G))
    if len(G) == 0:
        return np.zeros((1, n), dtype=np.int64)
    return spec.matmul(coeffs, G)


@dataclass(frozen=True, eq=False)
class CosetTable:
    """Decomposition F_q^n = (F_q^n / C) x C for every vector at once.

    label[i] is the coset number of vector i, rep[j] the representative index
    of coset j, coeff[i] the index (in span order) of the code component.
    """

    spec: FieldSpec
    n: int
    t: int
    label: np.ndarray
    rep: np.ndarray
    coeff: np.ndarray
    members: np.ndarray = field(repr=False)


def coset_table(spec: FieldSpec, code_basis, n: int) -> CosetTable:
    G = _basis_rows(code_basis, spec, n)
    t = len(G)
    if rank(spec, G) != t:
        raise DependentInput("code basis vectors are linearly dependent")
    q = spec.q
    V = all_vectors(q, n)
    C = span(spec, G, n)
    # cand[i, c] = index of V[i] - C[c]
    cand = vector_index(q, spec.sub(V[:, None, :], C[None, :, :]))
    best = np.argmin(cand, axis=1)
    rep_of = cand[np.arange(len(V)), best]
    reps, label = np.unique(rep_of, return_inverse=True)
    members = np.zeros((len(reps), q**t), dtype=np.int64)
    members[label, best] = np.arange(len(V))
    return CosetTable(spec, n, t, label.astype(np.int64), reps, best.astype(np.int64), members)


def coset_decompose(x: FieldVector, code_basis) -> tuple[int, FieldVector]:
    """(coset label, component in C) with x = representative + component.

    The representative is the lexicographically smallest coset member and the
    label is its vector index.
    """
    spec, n = x.spec, len(x)
    G = _basis_rows(code_basis, spec, n)
    if rank(spec, G) != len(G):
        raise DependentInput("code basis vectors are linearly dependent")
    C = span(spec, G, n)
    cand = spec.sub(x.elements[None, :], C)
    idx = vector_index(spec.q, cand)
    j = int(np.argmin(idx))
    return int(idx[j]), FieldVector(spec, C[j])


def enumerate_subspaces(spec: FieldSpec, n: int, t: int) -> list[np.ndarray]:
    """Every t-dimensional subspace of F_q^n, as RREF generator matrices, in
    lexicographic order of (pivot set, free entries)."""
    q = spec.q
    out = []
    for pivots in itertools.combinations(range(n), t):
        free_slots = [(i, c) for i in range(t) for c in range(pivots[i] + 1, n) if c not in pivots]
        for vals in itertools.product(range(q), repeat=len(free_slots)):
            G = np.zeros((t, n), dtype=np.int64)
            for i, pc in enumerate(pivots):
                G[i, pc] = 1
            for (i, c), v in zip(free_slots, vals):
                G[i, c] = v
            out.append(G)
    return out
