"""Dense-matrix quantum quantities for classical-quantum states.

A c-q state sum_a P(a)|a><a| (x) rho_a is stored as its blocks X_a = P(a) rho_a,
an array of shape (|A|, d, d).  Logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .classical_info import (
    MASS_TOL,
    DomainError,
    NonGroupAlphabet,
    NotNormalized,
    SupportViolation,
    difference_index,
    hash_index_map,
    logsumexp,
)
from .finite_field import FieldMatrix, FieldSpec

HERM_TOL = 1e-10
PSD_TOL = 1e-10
PINV_CUTOFF = 1e-12
CLUSTER_RTOL = 1e-9
MAX_DIM = 256


class DimCap(ValueError):
    pass


class ZeroOperator(ValueError):
    pass


def _eigh(H: np.ndarray):
    w, V = np.linalg.eigh((H + H.conj().T) / 2)
    return w, V


def _clamp(w: np.ndarray) -> np.ndarray:
    if w.size and w.min() < -PSD_TOL:
        raise ValueError(f"operator not positive semidefinite (eigenvalue {w.min():.3g})")
    return np.where(w < 0, 0.0, w)


def mpow(H: np.ndarray, x: float) -> np.ndarray:
    """H^x for PSD H via eigendecomposition; negative x acts on the support only."""
    w, V = _eigh(H)
    w = _clamp(w)
    if x < 0:
        keep = w > PINV_CUTOFF * max(w.max(initial=0.0), 0.0)
        wx = np.zeros_like(w)
        wx[keep] = w[keep] ** x
    elif x == 0:
        wx = (w > PINV_CUTOFF * max(w.max(initial=0.0), 0.0)).astype(float)
    else:
        wx = w**x
    return (V * wx) @ V.conj().T


def mlog(H: np.ndarray) -> np.ndarray:
    """log H on the support of H (zero on the kernel)."""
    w, V = _eigh(H)
    w = _clamp(w)
    keep = w > PINV_CUTOFF * max(w.max(initial=0.0), 0.0)
    lw = np.zeros_like(w)
    lw[keep] = np.log(w[keep])
    return (V * lw) @ V.conj().T


def support_projector(H: np.ndarray) -> np.ndarray:
    w, V = _eigh(H)
    keep = w > PINV_CUTOFF * max(w.max(initial=0.0), 0.0)
    return V[:, keep] @ V[:, keep].conj().T


def check_support(rho: np.ndarray, sigma: np.ndarray):
    P = np.eye(len(sigma)) - support_projector(sigma)
    if np.abs(np.trace(P @ rho @ P)) > HERM_TOL:
        raise SupportViolation("rho is not supported inside sigma")


def trace_norm(H: np.ndarray) -> float:
    return math.fsum(np.abs(np.linalg.eigvalsh((H + H.conj().T) / 2)))


def von_neumann(H: np.ndarray) -> float:
    w = _clamp(np.linalg.eigvalsh((H + H.conj().T) / 2))
    w = w[w > 0]
    return -math.fsum(w * np.log(w))


class HermitianOperator:
    """Immutable Hermitian matrix with a cached spectral decomposition
    (eigenvalues descending)."""

    def __init__(self, entries):
        M = np.array(entries, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("operator must be square")
        if np.max(np.abs(M - M.conj().T), initial=0.0) > HERM_TOL:
            raise ValueError("operator is not Hermitian")
        M = (M + M.conj().T) / 2
        M.setflags(write=False)
        self.entries = M

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def spectrum(self):
        w, V = np.linalg.eigh(self.entries)
        w, V = w[::-1], V[:, ::-1].copy()
        for j in range(V.shape[1]):
            k = int(np.argmax(np.abs(V[:, j]) > 1e-12))
            V[:, j] *= np.exp(-1j * np.angle(V[k, j]))
        return w, V

    def power(self, x: float) -> np.ndarray:
        return mpow(self.entries, x)


def psi_q(s: float, rho, sigma) -> float:
    """log Tr rho^(1+s) sigma^(-s)."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    check_support(rho, sigma)
    return math.log(np.real(np.trace(mpow(rho, 1 + s) @ mpow(sigma, -s))))


def psi_bar_q(s: float, rho, sigma) -> float:
    """log Tr rho^((1+s)/2) sigma^(-s/2) rho^((1+s)/2) sigma^(-s/2)."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    check_support(rho, sigma)
    r = mpow(rho, (1 + s) / 2)
    g = mpow(sigma, -s / 2)
    return math.log(np.real(np.trace(r @ g @ r @ g)))


def relative_entropy(rho, sigma) -> float:
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    check_support(rho, sigma)
    return float(np.real(np.trace(rho @ (mlog(rho) - mlog(sigma)))))


@dataclass(frozen=True, eq=False)
class CqState:
    blocks: np.ndarray

    def __post_init__(self):
        B = np.array(self.blocks, dtype=complex)
        if B.ndim != 3 or B.shape[1] != B.shape[2]:
            raise ValueError("blocks must have shape (|A|, d, d)")
        if B.shape[0] * B.shape[1] > MAX_DIM:
            raise DimCap(f"d_A * d_E = {B.shape[0] * B.shape[1]} exceeds {MAX_DIM}")
        if np.max(np.abs(B - B.conj().transpose(0, 2, 1)), initial=0.0) > HERM_TOL:
            raise ValueError("blocks must be Hermitian")
        B = (B + B.conj().transpose(0, 2, 1)) / 2
        for X in B:
            _clamp(np.linalg.eigvalsh(X))
        if np.real(np.trace(B, axis1=1, axis2=2)).sum() > 1 + MASS_TOL:
            raise ValueError("total trace exceeds 1")
        B.setflags(write=False)
        object.__setattr__(self, "blocks", B)

    @classmethod
    def from_conditionals(cls, weights, conditionals) -> "CqState":
        w = np.asarray(weights, dtype=float)
        C = np.asarray(conditionals, dtype=complex)
        tr = np.real(np.trace(C, axis1=1, axis2=2))
        if np.any(np.abs(tr - 1) > HERM_TOL):
            raise ValueError("conditional states must have unit trace")
        return cls(w[:, None, None] * C)

    @classmethod
    def from_classical(cls, table) -> "CqState":
        T = np.asarray(table, dtype=float)
        return cls(np.stack([np.diag(row) for row in T]).astype(complex))

    @property
    def size_A(self) -> int:
        return self.blocks.shape[0]

    @property
    def dim_E(self) -> int:
        return self.blocks.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return np.real(np.trace(self.blocks, axis1=1, axis2=2))

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)

    @property
    def normalized(self) -> bool:
        return abs(self.mass - 1) <= MASS_TOL

    @property
    def rho_E(self) -> np.ndarray:
        return self.blocks.sum(axis=0)

    def conditional(self, a: int) -> np.ndarray:
        w = self.weights[a]
        if w <= 0:
            return np.eye(self.dim_E) / self.dim_E
        return self.blocks[a] / w

    def full_matrix(self) -> np.ndarray:
        nA, d = self.size_A, self.dim_E
        out = np.zeros((nA * d, nA * d), dtype=complex)
        for a in range(nA):
            out[a * d : (a + 1) * d, a * d : (a + 1) * d] = self.blocks[a]
        return out

    def to_json(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "conditionals": [
                [[[float(z.real), float(z.imag)] for z in row] for row in self.conditional(a)]
                for a in range(self.size_A)
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "CqState":
        C = np.array(d["conditionals"], dtype=float)
        return cls.from_conditionals(d["weights"], C[..., 0] + 1j * C[..., 1])


def _cq(rho) -> CqState:
    return rho if isinstance(rho, CqState) else CqState(rho)


def log_renyi_sum_q(s: float, rho, sigma=None, bar: bool = False) -> float:
    """log sum_a Tr X_a^(1+s) sigma^(-s), or the sandwiched-split form when bar.

    This is -s H_{1+s}(A|E|rho||sigma) (resp. the bar variant)."""
    rho = _cq(rho)
    sigma = rho.rho_E if sigma is None else np.asarray(sigma)
    g = mpow(sigma, -s) if not bar else mpow(sigma, -s / 2)
    total = []
    for X in rho.blocks:
        check_support(X, sigma)
        if bar:
            r = mpow(X, (1 + s) / 2)
            total.append(np.real(np.trace(r @ g @ r @ g)))
        else:
            total.append(np.real(np.trace(mpow(X, 1 + s) @ g)))
    return math.log(math.fsum(total))


def cond_shannon_q(rho, sigma=None) -> float:
    """log|A| - D(rho || rho_mix (x) sigma)."""
    rho = _cq(rho)
    sigma = rho.rho_E if sigma is None else np.asarray(sigma)
    nA = rho.size_A
    ls = mlog(sigma)
    D = math.fsum(
        float(np.real(np.trace(X @ (mlog(X) - ls)))) for X in rho.blocks
    ) + rho.mass * math.log(nA)
    return math.log(nA) - D


def cond_renyi_q(s: float, rho, sigma=None, bar: bool = False) -> float:
    """H_{1+s}(A|E|rho||sigma) (bar selects the split-power variant)."""
    if s == 0:
        return cond_shannon_q(rho, sigma)
    return -log_renyi_sum_q(s, rho, sigma, bar) / s


def hmin_q(rho, sigma=None) -> float:
    """-log || (I (x) sigma^(-1/2)) rho (I (x) sigma^(-1/2)) ||."""
    rho = _cq(rho)
    sigma = rho.rho_E if sigma is None else np.asarray(sigma)
    g = mpow(sigma, -0.5)
    top = 0.0
    for X in rho.blocks:
        check_support(X, sigma)
        top = max(top, float(np.linalg.eigvalsh(g @ X @ g).max()))
    return -math.log(top)


def phi_q(s: float, rho) -> float:
    """log Tr (sum_a X_a^(1/(1-s)))^(1-s) for s < 1."""
    if s >= 1:
        raise DomainError("phi_q is defined for s < 1")
    rho = _cq(rho)
    alpha = 1 / (1 - s)
    spectra = [_eigh(X) for X in rho.blocks]
    top = max(float(_clamp(w).max(initial=0.0)) for w, _ in spectra)
    if top <= 0:
        raise ZeroOperator("zero state")
    acc = np.zeros((rho.dim_E, rho.dim_E), dtype=complex)
    for w, V in spectra:
        acc += (V * (_clamp(w) / top) ** alpha) @ V.conj().T
    mu = np.linalg.eigvalsh(acc)
    if alpha > 1 and mu.min() < PHI_RCOND * mu.max():
        return math.log(top) + _phi_tail_mp(s, spectra, top)
    mu = mu[mu > 0]
    return math.log(top) + logsumexp((1 - s) * np.log(mu))


PHI_RCOND = 1e-6
MP_MAX_DPS = 2000


def _phi_tail_mp(s: float, spectra, top: float) -> float:
    """log Tr (sum_a (X_a/top)^alpha)^(1-s) in extended precision.

    With a large alpha the summed operator spans more orders of magnitude
    than double precision resolves, yet its small eigenvalues still matter
    after the (1-s) power."""
    import mpmath

    alpha = 1 / (1 - s)
    pos = [float(x) for w, _ in spectra for x in _clamp(w) if x > 0]
    spread = math.log10(top / min(pos)) if pos else 0.0
    dps = int(min(MP_MAX_DPS, 30 + math.ceil(alpha * spread)))
    with mpmath.workdps(dps):
        d = spectra[0][1].shape[0]
        S = mpmath.zeros(d, d)
        for w, V in spectra:
            Vm, _ = mpmath.qr(mpmath.matrix(V.tolist()))
            for k, x in enumerate(_clamp(w)):
                if x <= 0:
                    continue
                lam = (mpmath.mpf(float(x)) / top) ** alpha
                col = Vm[:, k]
                S += lam * (col * col.H)
        S = (S + S.H) / 2
        ev = mpmath.eighe(S, eigvals_only=True)
        total = mpmath.fsum(mpmath.re(e) ** (1 - s) for e in ev if mpmath.re(e) > 0)
        return float(mpmath.log(total))


def optimal_sigma(s: float, rho) -> np.ndarray:
    """(sum_a X_a^(1+s))^(1/(1+s)) normalized to unit trace."""
    rho = _cq(rho)
    S = mpow(sum(mpow(X, 1 + s) for X in rho.blocks), 1 / (1 + s))
    return S / np.real(np.trace(S))


def trace_A_power(s: float, rho) -> np.ndarray:
    """Tr_A rho^(1+s) = sum_a X_a^(1+s)."""
    rho = _cq(rho)
    return sum(mpow(X, 1 + s) for X in rho.blocks)


class SpectrumStats(NamedTuple):
    v: int
    lam: float
    tolerance: float


def _clusters(w_desc: np.ndarray, scale: float) -> list[list[int]]:
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w_desc)):
        if w_desc[groups[-1][-1]] - w_desc[i] <= CLUSTER_RTOL * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectrum_stats(sigma) -> SpectrumStats:
    """Eigenvalue-cluster count v and log spread log(a_max / a_min) over the
    positive part of the spectrum."""
    w = np.sort(_clamp(np.linalg.eigvalsh(np.asarray(sigma))))[::-1]
    if w[0] <= 0:
        raise ZeroOperator("zero operator")
    v = len(_clusters(w, w[0]))
    pos = w[w > PINV_CUTOFF * w[0]]
    return SpectrumStats(v, float(math.log(pos[0] / pos[-1])), CLUSTER_RTOL)


def pinching(sigma, rho) -> np.ndarray:
    """sum_i E_i rho E_i over the eigenprojections E_i of sigma."""
    sigma = np.asarray(sigma)
    w, V = _eigh(sigma)
    w, V = w[::-1], V[:, ::-1]
    scale = max(abs(w[0]), abs(w[-1]), 1e-300)
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    for g in _clusters(w, scale):
        E = V[:, g] @ V[:, g].conj().T
        out += E @ rho @ E
    return out


def d1_prime_q(rho) -> float:
    rho = _cq(rho)
    ref = rho.rho_E / rho.size_A
    return math.fsum(trace_norm(X - ref) for X in rho.blocks)


def I_prime_q(rho) -> float:
    """D(rho || rho_mix (x) rho_E)."""
    rho = _cq(rho)
    return math.log(rho.size_A) - cond_shannon_q(rho)


def secrecy_criteria_q(rho) -> tuple[float, float]:
    """(d1', I') of a normalized c-q state."""
    rho = _cq(rho)
    if not rho.normalized:
        raise NotNormalized("I' needs a normalized state")
    return d1_prime_q(rho), I_prime_q(rho)


def d2_q(rho, sigma) -> float:
    """Tr ((I (x) sigma^(-1/4)) (rho - rho_mix (x) rho_E) (I (x) sigma^(-1/4)))^2."""
    rho = _cq(rho)
    g = mpow(np.asarray(sigma), -0.25)
    ref = rho.rho_E / rho.size_A
    total = []
    for X in rho.blocks:
        check_support(X, sigma)
        Y = g @ (X - ref) @ g
        total.append(float(np.real(np.trace(Y @ Y))))
    return math.fsum(total)


def d2_q_expansion(rho, sigma) -> float:
    """e^{-H2bar(A|E|rho||sigma)} - e^{psibar(1|rho_E||sigma)} / |A|."""
    rho = _cq(rho)
    return math.exp(log_renyi_sum_q(1, rho, sigma, bar=True)) - math.exp(
        psi_bar_q(1, rho.rho_E, sigma)
    ) / rho.size_A


def apply_hash_q(rho, f, out_size: int | None = None) -> CqState:
    """State of (f(A), E): blocks summed over preimages."""
    rho = _cq(rho)
    if isinstance(f, FieldMatrix):
        idx = hash_index_map(f)
        out_size = f.spec.q**f.rows
    else:
        idx = np.asarray(f, dtype=np.int64)
    if out_size is None:
        out_size = int(idx.max()) + 1
    out = np.zeros((out_size, rho.dim_E, rho.dim_E), dtype=complex)
    np.add.at(out, idx, rho.blocks)
    return CqState(out)


def convolve_q(rho, W, spec: FieldSpec, n: int) -> CqState:
    """sum_w W(w) sum_a |a+w><a+w| (x) X_a."""
    rho = _cq(rho)
    W = np.asarray(W, dtype=float).ravel()
    if rho.size_A != spec.q**n or W.size != spec.q**n:
        raise NonGroupAlphabet("alphabet size must be q^n")
    D = difference_index(spec, n)
    return CqState(np.einsum("w,awij->aij", W, rho.blocks[D]))


def apply_channel_q(rho, kraus) -> CqState:
    rho = _cq(rho)
    out = np.stack([sum(K @ X @ K.conj().T for K in kraus) for X in rho.blocks])
    return CqState(out)


# ----------------------------------------------------------------- random instances


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = rank or d
    G = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    R = G @ G.conj().T
    return R / np.real(np.trace(R))


def random_cq_state(dA: int, dE: int, rng: np.random.Generator) -> CqState:
    """Haar pure state on A (x) E (x) E', E' traced out and A dephased."""
    psi = rng.normal(size=(dA, dE, dE)) + 1j * rng.normal(size=(dA, dE, dE))
    psi /= np.linalg.norm(psi)
    return CqState(np.einsum("aij,akj->aik", psi, psi.conj()))


def random_channel(d_in: int, d_out: int, rng: np.random.Generator, env: int = 2) -> list[np.ndarray]:
    """Kraus operators of a random isometry followed by a partial trace."""
    G = rng.normal(size=(d_out * env, d_in)) + 1j * rng.normal(size=(d_out * env, d_in))
    Q, _ = np.linalg.qr(G)
    V = Q[:, :d_in].reshape(d_out, env, d_in)
    return [V[:, k, :] for k in range(env)]


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
