"""Classical information quantities on joint sub-distributions P(a, e).

All logarithms are natural.  Tables are indexed [a, e]; the first axis is the
key variable A and the second the adversary's variable E.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .finite_field import FieldMatrix, FieldSpec, all_vectors, vector_index

MASS_TOL = 1e-12
DEBUG = bool(os.environ.get("PRIVAMP_DEBUG"))


class SupportViolation(ValueError):
    pass


class NotNormalized(ValueError):
    pass


class DomainError(ValueError):
    pass


class NonGroupAlphabet(ValueError):
    pass


class DegenerateP(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class JointSubDistribution:
    table: np.ndarray
    labels_A: tuple = ()
    labels_E: tuple = ()

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim == 1:
            t = t[:, None]
        if t.ndim != 2:
            raise ValueError("table must be two-dimensional")
        if np.any(t < 0):
            raise ValueError("negative probability")
        if t.sum() > 1 + MASS_TOL:
            raise ValueError(f"total mass {t.sum()} exceeds 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if not self.labels_A:
            object.__setattr__(self, "labels_A", tuple(range(t.shape[0])))
        if not self.labels_E:
            object.__setattr__(self, "labels_E", tuple(range(t.shape[1])))

    @property
    def size_A(self) -> int:
        return self.table.shape[0]

    @property
    def size_E(self) -> int:
        return self.table.shape[1]

    @property
    def mass(self) -> float:
        return math.fsum(self.table.ravel())

    @property
    def marginal_A(self) -> np.ndarray:
        return self.table.sum(axis=1)

    @property
    def marginal_E(self) -> np.ndarray:
        return self.table.sum(axis=0)

    @property
    def normalized(self) -> bool:
        return abs(self.mass - 1) <= MASS_TOL

    def to_rows(self) -> list[tuple]:
        return [
            (self.labels_A[a], self.labels_E[e], float(self.table[a, e]))
            for a in range(self.size_A)
            for e in range(self.size_E)
        ]


def _table(P) -> np.ndarray:
    return P.table if isinstance(P, JointSubDistribution) else np.asarray(P, dtype=float)


def _vec(Q) -> np.ndarray:
    return np.asarray(Q, dtype=float).reshape(-1)


def logsumexp(x) -> float:
    """log sum exp(x) with compensated summation; -inf for an empty input."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        return -math.inf
    m = float(np.max(x))
    if m == -math.inf:
        return -math.inf
    return m + math.log(math.fsum(np.exp(x - m)))


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=0)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.sum(np.exp(x - safe), axis=0))


def _log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


def _check_support(P: np.ndarray, Q: np.ndarray):
    if np.any((P > 0) & (Q <= 0)):
        raise SupportViolation("Q vanishes where P has mass")


def psi(s: float, P, Q) -> float:
    """log sum_x P(x)^(1+s) Q(x)^(-s)."""
    P, Q = _vec(P), _vec(Q)
    _check_support(P, Q)
    mask = P > 0
    return logsumexp((1 + s) * np.log(P[mask]) - s * np.log(Q[mask]))


def log_renyi_sum(s: float, P, Q=None) -> float:
    """log sum_{a,e} P(a,e)^(1+s) Q(e)^(-s), which equals -s H_{1+s}(A|E|P||Q)."""
    T = _table(P)
    Q = T.sum(axis=0) if Q is None else _vec(Q)
    _check_support(T, np.broadcast_to(Q, T.shape))
    mask = T > 0
    logQ = np.broadcast_to(_log(np.where(Q > 0, Q, 1.0)), T.shape)
    return logsumexp((1 + s) * np.log(T[mask]) - s * logQ[mask])


def divergence(P, R) -> float:
    """D(P||R) = sum P log(P/R) for nonnegative arrays of equal shape."""
    P, R = np.asarray(P, dtype=float), np.asarray(R, dtype=float)
    _check_support(P, R)
    mask = P > 0
    return math.fsum((P[mask] * (np.log(P[mask]) - np.log(R[mask]))).ravel())


def entropy(P) -> float:
    P = np.asarray(P, dtype=float).ravel()
    P = P[P > 0]
    return -math.fsum(P * np.log(P))


def cond_shannon(P, Q=None) -> float:
    """H(A|E|P||Q) = log|A| - D(P || P_mix x Q); Q defaults to P^E."""
    T = _table(P)
    Q = T.sum(axis=0) if Q is None else _vec(Q)
    nA = T.shape[0]
    return math.log(nA) - divergence(T, np.broadcast_to(Q / nA, T.shape))


def cond_renyi(s: float, P, Q=None) -> float:
    """H_{1+s}(A|E|P||Q); the s = 0 value is the conditional Shannon limit."""
    if s == 0:
        return cond_shannon(P, Q)
    return -log_renyi_sum(s, P, Q) / s


def phi(s: float, P) -> float:
    """log sum_e (sum_a P(a,e)^(1/(1-s)))^(1-s), defined for s < 1."""
    if s >= 1:
        raise DomainError("phi is defined for s < 1")
    T = _table(P)
    if s == 0:
        return math.log(math.fsum(T.ravel()))
    inner = _logsumexp_rows(_log(T) / (1 - s))
    return logsumexp((1 - s) * inner[np.isfinite(inner)])


def eta(x: float, y: float) -> float:
    """-x log x + x y with 0 log 0 = 0."""
    if x < 0:
        raise ValueError("eta needs x >= 0")
    if x == 0:
        return 0.0
    return -x * math.log(x) + x * y


def eta_hull(x: float, y: float) -> float:
    """Running maximum of eta(., y) over [0, x].

    eta(., y) increases up to e^(y-1) and then falls, so a bound of the form
    eta(d, y) with d <= x is only guaranteed by this monotone hull."""
    peak = math.exp(y - 1)
    return eta(min(x, peak), y)


def log_eta_hull(log_x: float, y: float) -> float:
    """log of eta_hull(e^log_x, y), usable when e^log_x under- or overflows."""
    if log_x == -math.inf:
        return -math.inf
    if log_x >= y - 1:
        return y - 1
    return log_x + math.log(y - log_x)


class SecrecyCriteria(NamedTuple):
    d1_prime: float
    I_prime: float
    d1: float
    I: float


def d1_prime(P) -> float:
    """||P - P_mix x P^E||_1."""
    T = _table(P)
    return math.fsum(np.abs(T - T.sum(axis=0)[None, :] / T.shape[0]).ravel())


def I_prime(P) -> float:
    T = _table(P)
    return divergence(T, np.broadcast_to(T.sum(axis=0) / T.shape[0], T.shape))


def secrecy_criteria(P) -> SecrecyCriteria:
    """(d1', I', d1, I) with d1 = ||P - P^A x P^E||_1 and I the mutual information."""
    T = _table(P)
    if abs(T.sum() - 1) > MASS_TOL:
        raise NotNormalized("I' needs a normalized distribution")
    prod = np.outer(T.sum(axis=1), T.sum(axis=0))
    out = SecrecyCriteria(
        d1_prime(T), I_prime(T), math.fsum(np.abs(T - prod).ravel()), divergence(T, prod)
    )
    if DEBUG:
        assert out.d1_prime**2 <= 2 * out.I_prime + 1e-9, "Pinsker"
        assert out.I_prime <= eta_hull(out.d1_prime, math.log(T.shape[0])) + 1e-9, "Fannes"
    return out


def hash_index_map(f: FieldMatrix) -> np.ndarray:
    """Output index of f(a) for every input index a."""
    q = f.spec.q
    return vector_index(q, f.apply(all_vectors(q, f.cols)))


def apply_hash(P, f, out_size: int | None = None):
    """Pushforward of the A coordinate through f.

    f is a FieldMatrix (output alphabet F_q^m), an index array, or a callable
    on indices."""
    T = _table(P)
    if isinstance(f, FieldMatrix):
        idx = hash_index_map(f)
        out_size = f.spec.q**f.rows
    elif callable(f):
        idx = np.array([f(a) for a in range(T.shape[0])], dtype=np.int64)
    else:
        idx = np.asarray(f, dtype=np.int64)
    if out_size is None:
        out_size = int(idx.max()) + 1
    out = np.zeros((out_size, T.shape[1]))
    np.add.at(out, idx, T)
    if DEBUG and abs(T.sum() - 1) <= MASS_TOL:
        assert cond_shannon(out) <= cond_shannon(T) + 1e-9
    return JointSubDistribution(out) if isinstance(P, JointSubDistribution) else out


def difference_index(spec: FieldSpec, n: int) -> np.ndarray:
    """D[a, w] = index of a - w in F_q^n."""
    V = all_vectors(spec.q, n)
    return vector_index(spec.q, spec.sub(V[:, None, :], V[None, :, :]))


def convolve(P, W, spec: FieldSpec, n: int):
    """(P * W)(a, e) = sum_w W(w) P(a - w, e) on the group F_q^n."""
    T = _table(P)
    W = _vec(W)
    if T.shape[0] != spec.q**n or W.size != spec.q**n:
        raise NonGroupAlphabet("alphabet size must be q^n")
    D = difference_index(spec, n)
    out = np.einsum("w,awe->ae", W, T[D])
    return JointSubDistribution(out) if isinstance(P, JointSubDistribution) else out


def optimal_QE(s: float, P) -> np.ndarray:
    """Q(e) proportional to (sum_a P(a,e)^(1+s))^(1/(1+s)), the maximizer of
    s H_{1+s}(A|E|P||Q) over normalized Q."""
    if s <= 0:
        raise DomainError("optimal_QE needs s > 0")
    T = _table(P)
    if T.sum() <= 0:
        raise DegenerateP("zero mass")
    with np.errstate(divide="ignore"):
        logq = _logsumexp_rows((1 + s) * _log(T)) / (1 + s)
    logq = logq - logsumexp(logq[np.isfinite(logq)])
    return np.exp(logq)


def d2_conditional(P, Q) -> float:
    """sum_{a,e} (P(a,e) - P^E(e)/|A|)^2 / Q(e)."""
    T = _table(P)
    Q = _vec(Q)
    _check_support(T, np.broadcast_to(Q, T.shape))
    dev = T - T.sum(axis=0)[None, :] / T.shape[0]
    keep = Q > 0
    return math.fsum((dev[:, keep] ** 2 / Q[keep][None, :]).ravel())


def d2_expansion(P, Q) -> float:
    """e^{-H_2(A|E|P||Q)} - e^{psi(1|P^E||Q)} / |A|, equal to d2_conditional."""
    T = _table(P)
    return math.exp(log_renyi_sum(1, T, Q)) - math.exp(psi(1, T.sum(axis=0), Q)) / T.shape[0]


def apply_channel_E(P, W) -> np.ndarray:
    """Process E through a stochastic matrix W[e, e']."""
    return _table(P) @ np.asarray(W, dtype=float)


def uniform_product(nA: int, Q) -> np.ndarray:
    return np.outer(np.full(nA, 1 / nA), _vec(Q))
