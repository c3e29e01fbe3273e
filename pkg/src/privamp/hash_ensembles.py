"""Hash-function families and code ensembles with exact universality certificates."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .finite_field import (
    FieldError,
    FieldMatrix,
    FieldSpec,
    all_vectors,
    dual_code,
    enumerate_subspaces,
    kernel_basis,
    rank,
    span,
    vector_index,
)

WORK_BUDGET = 2**26
HOEFFDING_CONFIDENCE = 0.99

KINDS = (
    "toeplitz",
    "modified-toeplitz",
    "field-multiplication",
    "random-linear",
    "explicit-list",
    "permuted-code-quotient",
)


class IndexOutOfFamily(IndexError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class NonlinearFamily(ValueError):
    pass


class NonBinaryField(ValueError):
    pass


def _digits(index: int, q: int, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.int64)
    for i in range(length - 1, -1, -1):
        index, out[i] = divmod(index, q)
    return out


def toeplitz_matrix(diag: np.ndarray, m: int, n: int) -> np.ndarray:
    """m x n Toeplitz matrix with T[i, j] = diag[i - j + n - 1]."""
    i = np.arange(m)[:, None]
    j = np.arange(n)[None, :]
    return np.asarray(diag, dtype=np.int64)[i - j + n - 1]


FFT_MIN_N = 1 << 10


def toeplitz_apply(diag, x, m: int, n: int, q: int = 2, method: str = "auto") -> np.ndarray:
    """T x mod q for the Toeplitz matrix of `diag`, without building T.

    y_i = sum_j diag[i - j + n - 1] x_j is a slice of the full convolution of
    diag and x.  The fft path rounds an exact integer convolution, so it is
    only used while n (q - 1)^2 stays far below 2^52."""
    diag = np.asarray(diag, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if method == "auto":
        method = "fft" if n >= FFT_MIN_N and q == 2 else "naive"
    if method == "naive":
        return (toeplitz_matrix(diag, m, n) @ x) % q
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    if n * (q - 1) ** 2 >= 1 << 40:
        raise ValueError("fft path would lose exactness")
    size = 1 << int(np.ceil(np.log2(len(diag) + n)))
    c = np.fft.irfft(np.fft.rfft(diag, size) * np.fft.rfft(x, size), size)
    return np.rint(c[n - 1 : n - 1 + m]).astype(np.int64) % q


@lru_cache(maxsize=None)
def _parity_check(spec: FieldSpec, code: tuple, n: int) -> np.ndarray:
    G = list(np.array(code, dtype=np.int64).reshape(-1, n))
    return np.array([v.elements for v in dual_code(G, spec, n)], dtype=np.int64).reshape(-1, n)


@lru_cache(maxsize=None)
def _find_irreducible(p: int, n: int) -> np.ndarray:
    """Monic irreducible polynomial of degree n over F_p (coefficients low to high)."""
    if n == 1:
        return np.array([0, 1], dtype=np.int64)
    for tail in itertools.product(range(p), repeat=n):
        f = np.array(list(tail) + [1], dtype=np.int64)
        if f[0] == 0:
            continue
        if all(_polymod(f, np.array(list(g) + [1]), p).any() for d in range(1, n // 2 + 1) for g in itertools.product(range(p), repeat=d)):
            return f
    raise FieldError(f"no irreducible polynomial of degree {n} over F_{p}")


def _polymod(f: np.ndarray, g: np.ndarray, p: int) -> np.ndarray:
    f = f.copy() % p
    dg = len(g) - 1
    for i in range(len(f) - 1, dg - 1, -1):
        c = f[i]
        if c:
            f[i - dg : i + 1] = (f[i - dg : i + 1] - c * g) % p
    return f[:dg]


@dataclass(frozen=True, eq=False)
class HashFamily:
    """A finite family of linear maps F_q^n -> F_q^m, sampled uniformly."""

    kind: str
    spec: FieldSpec
    n: int
    m: int = 0
    seed: int = 0
    members: tuple = ()
    code: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "permuted-code-quotient":
            G = np.array(self.code, dtype=np.int64).reshape(-1, self.n)
            object.__setattr__(self, "code", tuple(tuple(int(v) for v in r) for r in G))
            if rank(self.spec, G) != len(G):
                raise ValueError("code basis is dependent")
            object.__setattr__(self, "m", self.n - len(G))
        if not 0 <= self.m <= self.n:
            raise ValueError("need 0 <= m <= n")
        if self.kind == "explicit-list":
            mats = tuple(m if isinstance(m, FieldMatrix) else FieldMatrix(self.spec, m) for m in self.members)
            if not mats or any(x.data.shape != (self.m, self.n) for x in mats):
                raise ValueError("explicit list needs matrices of shape m x n")
            object.__setattr__(self, "members", mats)
        if self.kind == "field-multiplication" and not self.spec.is_prime_field:
            raise ValueError("field multiplication family needs a prime base field")

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def linear(self) -> bool:
        return True

    @property
    def size(self) -> int:
        q, n, m = self.q, self.n, self.m
        if self.kind == "toeplitz":
            return q ** (n + m - 1) if m else 1
        if self.kind == "modified-toeplitz":
            return q ** (n - 1) if n > m else 1
        if self.kind == "field-multiplication":
            return q**n
        if self.kind == "random-linear":
            return q ** (m * n)
        if self.kind == "explicit-list":
            return len(self.members)
        return math.factorial(n)

    def member(self, index: int) -> FieldMatrix:
        if not 0 <= index < self.size:
            raise IndexOutOfFamily(f"index {index} outside family of size {self.size}")
        q, n, m = self.q, self.n, self.m
        if self.kind == "toeplitz":
            data = toeplitz_matrix(_digits(index, q, n + m - 1), m, n) if m else np.zeros((0, n), np.int64)
        elif self.kind == "modified-toeplitz":
            X = toeplitz_matrix(_digits(index, q, n - 1), m, n - m) if n > m else np.zeros((m, 0), np.int64)
            data = np.hstack([X, np.eye(m, dtype=np.int64)])
        elif self.kind == "field-multiplication":
            data = _multiplication_matrix(self.spec.p, n, _digits(index, q, n)[::-1])[:m]
        elif self.kind == "random-linear":
            data = _digits(index, q, m * n).reshape(m, n)
        elif self.kind == "explicit-list":
            return self.members[index]
        else:
            perm = _nth_permutation(n, index)
            H = _parity_check(self.spec, self.code, n)
            data = np.zeros_like(H)
            data[:, perm] = H
        return FieldMatrix(self.spec, data)

    def sample(self, rng: np.random.Generator) -> FieldMatrix:
        return self.member(int(rng.integers(self.size)))

    def all_members(self) -> list[FieldMatrix]:
        return [self.member(i) for i in range(self.size)]

    def to_json(self) -> dict:
        d = {"kind": self.kind, "field": self.spec.to_json(), "n": self.n, "m": self.m, "seed": self.seed}
        if self.kind == "explicit-list":
            d["members"] = [x.to_json() for x in self.members]
        if self.kind == "permuted-code-quotient":
            d["code"] = [list(map(int, r)) for r in np.array(self.code).reshape(-1, self.n)]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "HashFamily":
        f = d["field"]
        spec = FieldSpec(int(f["p"]), int(f.get("k", 1)), tuple(f.get("poly", ())))
        members = tuple(FieldMatrix.from_json(x) for x in d.get("members", ()))
        code = tuple(tuple(r) for r in d.get("code", ()))
        return cls(d["kind"], spec, int(d["n"]), int(d.get("m", 0)), int(d.get("seed", 0)), members, code)


def _nth_permutation(n: int, index: int) -> list[int]:
    items = list(range(n))
    out = []
    for i in range(n, 0, -1):
        f = math.factorial(i - 1)
        j, index = divmod(index, f)
        out.append(items.pop(j))
    return out


def _multiplication_matrix(p: int, n: int, x: np.ndarray) -> np.ndarray:
    """Matrix of a -> x*a in F_{p^n} with the polynomial basis 1, alpha, ..."""
    f = _find_irreducible(p, n)
    cols = []
    for j in range(n):
        prod = np.zeros(2 * n, dtype=np.int64)
        prod[j : j + n] = x
        cols.append(_polymod(prod, f, p))
    return np.array(cols, dtype=np.int64).T % p


# ----------------------------------------------------------------- certificates


@dataclass(frozen=True)
class UniversalityReport:
    epsilon_universal: Fraction | float | None = None
    epsilon_dual: Fraction | float | None = None
    method: str = "exhaustive"
    samples: int | None = None
    seed: int | None = None
    interval: tuple[float, float] | None = None
    worst_witness: tuple[int, ...] | None = None
    dual_dimension: int | None = None

    def to_json(self) -> dict:
        def render(e):
            if e is None:
                return None
            if isinstance(e, Fraction):
                return {"num": e.numerator, "den": e.denominator, "value": float(e)}
            return {"value": float(e)}

        return {
            "epsilon_universal": render(self.epsilon_universal),
            "epsilon_dual": render(self.epsilon_dual),
            "method": self.method,
            "samples": self.samples,
            "seed": self.seed,
            "interval": list(self.interval) if self.interval else None,
            "worst_witness": list(self.worst_witness) if self.worst_witness is not None else None,
            "dual_dimension": self.dual_dimension,
        }


def _check_budget(work: int, force: bool):
    if work > WORK_BUDGET and not force:
        raise BudgetExceeded(f"exhaustive work {work} exceeds budget {WORK_BUDGET}")


def _hoeffding_halfwidth(samples: int) -> float:
    return math.sqrt(math.log(2 / (1 - HOEFFDING_CONFIDENCE)) / (2 * samples))


def kernel_counts(family: HashFamily, matrices=None) -> np.ndarray:
    """count[i] = number of members M with M v_i = 0, over all vectors v_i."""
    V = all_vectors(family.q, family.n)
    counts = np.zeros(len(V), dtype=np.int64)
    for M in matrices if matrices is not None else (family.member(i) for i in range(family.size)):
        counts += ~np.any(M.apply(V), axis=1)
    return counts


def collision_epsilon(
    family: HashFamily,
    method: str = "auto",
    samples: int = 20000,
    seed: int = 0,
    force: bool = False,
) -> UniversalityReport:
    """eps = |B| * max over nonzero d of Pr[f(d) = 0]."""
    q, n, m = family.q, family.n, family.m
    work = family.size * q**n * max(m * n, 1)
    if method == "auto":
        method = "exhaustive" if work <= WORK_BUDGET else "monte_carlo"
    V = all_vectors(q, n)
    if method == "exhaustive":
        _check_budget(work, force)
        counts = kernel_counts(family)
        j = 1 + int(np.argmax(counts[1:]))
        eps = Fraction(q**m * int(counts[j]), family.size)
        return UniversalityReport(epsilon_universal=eps, worst_witness=tuple(map(int, V[j])))
    rng = np.random.default_rng(seed)
    _check_budget(samples * q**n * max(m * n, 1), force)
    counts = kernel_counts(family, (family.sample(rng) for _ in range(samples)))
    j = 1 + int(np.argmax(counts[1:]))
    est = counts[j] / samples
    h = _hoeffding_halfwidth(samples)
    return UniversalityReport(
        epsilon_universal=q**m * est,
        method="monte_carlo",
        samples=samples,
        seed=seed,
        interval=(q**m * max(est - h, 0.0), q**m * min(est + h, 1.0)),
        worst_witness=tuple(map(int, V[j])),
    )


def rowspace_counts(family: HashFamily, matrices=None) -> tuple[np.ndarray, int]:
    """count[i] = number of members whose row space (dual of the kernel)
    contains v_i, plus the maximum row-space dimension seen."""
    q, n = family.q, family.n
    counts = np.zeros(q**n, dtype=np.int64)
    tmax = 0
    for M in matrices if matrices is not None else (family.member(i) for i in range(family.size)):
        rows = M.data[np.any(M.data, axis=1)] if M.rows else M.data
        elems = np.unique(vector_index(q, span(family.spec, list(rows), n)))
        counts[elems] += 1
        tmax = max(tmax, rank(family.spec, M.data))
    return counts, tmax


def dual_epsilon(
    family: HashFamily,
    method: str = "auto",
    samples: int = 20000,
    seed: int = 0,
    force: bool = False,
) -> UniversalityReport:
    """eps_dual = q^(n - t) * max over nonzero x of Pr[x in dual(ker f)],
    t the largest row-space dimension in the family."""
    if not family.linear:
        raise NonlinearFamily("dual universality needs a linear family")
    q, n, m = family.q, family.n, family.m
    work = family.size * q ** max(m, 1) * n
    if method == "auto":
        method = "exhaustive" if work <= WORK_BUDGET else "monte_carlo"
    V = all_vectors(q, n)
    if method == "exhaustive":
        _check_budget(work, force)
        counts, t = rowspace_counts(family)
        j = 1 + int(np.argmax(counts[1:]))
        eps = Fraction(q ** (n - t) * int(counts[j]), family.size)
        return UniversalityReport(epsilon_dual=eps, worst_witness=tuple(map(int, V[j])), dual_dimension=t)
    rng = np.random.default_rng(seed)
    counts, t = rowspace_counts(family, (family.sample(rng) for _ in range(samples)))
    j = 1 + int(np.argmax(counts[1:]))
    est = counts[j] / samples
    h = _hoeffding_halfwidth(samples)
    scale = q ** (n - t)
    return UniversalityReport(
        epsilon_dual=scale * est,
        method="monte_carlo",
        samples=samples,
        seed=seed,
        interval=(scale * max(est - h, 0.0), scale * min(est + h, 1.0)),
        worst_witness=tuple(map(int, V[j])),
        dual_dimension=t,
    )


def certify(family: HashFamily, method: str = "auto", samples: int = 20000, seed: int = 0, force: bool = False) -> UniversalityReport:
    u = collision_epsilon(family, method, samples, seed, force)
    d = dual_epsilon(family, method, samples, seed, force)
    return UniversalityReport(
        epsilon_universal=u.epsilon_universal,
        epsilon_dual=d.epsilon_dual,
        method=u.method,
        samples=u.samples,
        seed=u.seed,
        interval=u.interval,
        worst_witness=u.worst_witness,
        dual_dimension=d.dual_dimension,
    )


def epsilon_floor(size_a: int, size_b: int) -> Fraction:
    """Smallest achievable collision epsilon for maps from size_a to size_b points."""
    return Fraction(size_a - size_b, size_a - 1)


# ----------------------------------------------------------------- code ensembles


@dataclass(frozen=True, eq=False)
class CodeEnsemble:
    """Uniform ensemble over a finite list of linear codes in F_q^n."""

    spec: FieldSpec
    n: int
    codes: tuple = field(default=())

    def __post_init__(self):
        codes = tuple(np.array(c, dtype=np.int64).reshape(-1, self.n) for c in self.codes)
        if not codes:
            raise ValueError("empty code ensemble")
        object.__setattr__(self, "codes", codes)

    @property
    def dimensions(self) -> list[int]:
        return [rank(self.spec, c) if len(c) else 0 for c in self.codes]

    @property
    def t(self) -> int:
        return min(self.dimensions)

    @classmethod
    def kernels_of(cls, family: HashFamily) -> "CodeEnsemble":
        codes = []
        for M in family.all_members():
            kb = kernel_basis(M)
            codes.append(np.array([v.elements for v in kb], dtype=np.int64).reshape(-1, family.n))
        return cls(family.spec, family.n, tuple(codes))

    @classmethod
    def all_subspaces(cls, spec: FieldSpec, n: int, t: int) -> "CodeEnsemble":
        return cls(spec, n, tuple(enumerate_subspaces(spec, n, t)))

    @classmethod
    def permutations_of(cls, spec: FieldSpec, code, n: int) -> "CodeEnsemble":
        G = np.array(code, dtype=np.int64).reshape(-1, n)
        codes = []
        for perm in itertools.permutations(range(n)):
            H = np.zeros_like(G)
            H[:, list(perm)] = G
            codes.append(H)
        return cls(spec, n, tuple(codes))

    def membership_counts(self) -> np.ndarray:
        q = self.spec.q
        counts = np.zeros(q**self.n, dtype=np.int64)
        for G in self.codes:
            counts[np.unique(vector_index(q, span(self.spec, list(G), self.n)))] += 1
        return counts

    def dual(self) -> "CodeEnsemble":
        codes = []
        for G in self.codes:
            d = dual_code(list(G), self.spec, self.n)
            codes.append(np.array([v.elements for v in d], dtype=np.int64).reshape(-1, self.n))
        return CodeEnsemble(self.spec, self.n, tuple(codes))


def code_epsilon(ensemble: CodeEnsemble, t: int | None = None) -> Fraction:
    """Smallest eps with Pr[x in C] <= q^(t - n) eps for every nonzero x.

    t defaults to the largest code dimension in the ensemble."""
    q, n = ensemble.spec.q, ensemble.n
    if t is None:
        t = max(ensemble.dimensions)
    counts = ensemble.membership_counts()
    return Fraction(q ** (n - t) * int(counts[1:].max()), len(ensemble.codes))


def _type_of(vecs: np.ndarray, q: int) -> list[tuple[int, ...]]:
    return [tuple(int(c) for c in np.bincount(v, minlength=q)) for v in vecs]


def permuted_ensemble_epsilon(code, spec: FieldSpec, n: int, force: bool = False) -> Fraction:
    """eps(C) = max over nonzero types p of q^n #{x in C of type p} / (|C| #{x of type p})."""
    q = spec.q
    _check_budget(q**n * n, force)
    G = np.array(code, dtype=np.int64).reshape(-1, n)
    if rank(spec, G) != len(G):
        raise ValueError("code basis is dependent")
    C = span(spec, list(G), n)
    in_code = Counter(_type_of(C, q))
    total = Counter(_type_of(all_vectors(q, n), q))
    zero = tuple([n] + [0] * (q - 1))
    best = Fraction(0)
    for tp, cnt in total.items():
        if tp == zero:
            continue
        best = max(best, Fraction(q**n * in_code.get(tp, 0), len(C) * cnt))
    return best


def biased_delta(ensemble: CodeEnsemble, generalized_character: bool = False) -> tuple[float, Fraction | float]:
    """Bias of the ensemble of uniform variables W on the codes.

    Returns (delta, delta^2) with delta^2 = max over nonzero x of
    E_X |E_W chi_x(W)|^2, evaluated directly from the character sums.  The
    sign character (-1)^{x.W} is used for q = 2; other fields need
    generalized_character, which switches to exp(2 pi i tr(x.W)/p) for prime q.
    """
    spec, n = ensemble.spec, ensemble.n
    q = spec.q
    if q != 2 and not generalized_character:
        raise NonBinaryField("delta bias as defined uses (-1)^(x.W); pass generalized_character for q > 2")
    if generalized_character and not spec.is_prime_field:
        raise NonBinaryField("generalized character implemented for prime fields only")
    X = all_vectors(q, n)
    if q == 2:
        total = np.zeros(len(X), dtype=object)
        for G in ensemble.codes:
            W = span(spec, list(G), n)
            signs = 1 - 2 * ((X @ W.T) % 2)
            s = signs.sum(axis=1)
            total += np.array([Fraction(int(v), len(W)) ** 2 for v in s], dtype=object)
        d2 = max(total[1:]) / len(ensemble.codes)
        return math.sqrt(d2), d2
    omega = np.exp(2j * np.pi / spec.p)
    total = np.zeros(len(X))
    for G in ensemble.codes:
        W = span(spec, list(G), n)
        s = (omega ** ((X @ W.T) % spec.p)).mean(axis=1)
        total += np.abs(s) ** 2
    d2 = float(total[1:].max() / len(ensemble.codes))
    return math.sqrt(d2), d2


def code_to_biased_delta(ensemble: CodeEnsemble, generalized_character: bool = False) -> dict:
    """delta of the uniform-on-code ensemble plus the bound sqrt(eps_dual q^-t)."""
    q, n = ensemble.spec.q, ensemble.n
    delta, d2 = biased_delta(ensemble, generalized_character)
    dual = ensemble.dual()
    counts = dual.membership_counts()
    max_pr = Fraction(int(counts[1:].max()), len(ensemble.codes))
    t = min(ensemble.dimensions)
    eps_dual = code_epsilon(dual)
    bound = math.sqrt(float(eps_dual) * q ** (-t))
    return {
        "delta": delta,
        "delta_squared": d2,
        "max_dual_membership": max_pr,
        "epsilon_dual": eps_dual,
        "bound": bound,
        "within_bound": delta <= bound + 1e-12,
    }
