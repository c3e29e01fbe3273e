"""Generalized Pauli channel and additive-noise classical models.

Closed forms for phi and the conditional Renyi entropy, explicit c-q states
for cross-checking them, and the rate curves behind the two reference figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as bd
from . import classical_info as ci
from . import quantum_info as qi
from .classical_info import DomainError, logsumexp

MAX_P_STATE = 7
GRID = 256


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def weyl_operator(p: int, x: int, z: int) -> np.ndarray:
    """X^x Z^z with X|j> = |j+1> and Z = diag(omega^j), omega = exp(2 pi i/p)."""
    if not (0 <= x < p and 0 <= z < p):
        raise ValueError("x and z must lie in [0, p)")
    X = np.roll(np.eye(p), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(p) / p))
    return np.linalg.matrix_power(X, x) @ np.linalg.matrix_power(Z, z)


def _cond_renyi_comp(u: float, PXZ: np.ndarray) -> float:
    """log sum_z P(z) sum_x P(x|z)^(1-u), which is u H_{1-u}(X|Z)."""
    Pz = PXZ.sum(axis=0)
    terms = []
    for z in np.flatnonzero(Pz > 0):
        cond = PXZ[:, z] / Pz[z]
        cond = cond[cond > 0]
        terms.append(math.log(Pz[z]) + logsumexp((1 - u) * np.log(cond)))
    return logsumexp(terms)


def cond_renyi_XZ(alpha: float, PXZ) -> float:
    """H_alpha(X|Z) = log(sum_z P(z) sum_x P(x|z)^alpha)/(1 - alpha); Shannon at alpha = 1."""
    T = np.asarray(PXZ, dtype=float)
    if T.ndim == 1:
        T = T[:, None]
    if abs(alpha - 1) < 1e-12:
        return ci.cond_shannon(T)
    return _cond_renyi_comp(1 - alpha, T) / (1 - alpha)


@dataclass(frozen=True, eq=False)
class PauliChannelModel:
    """Weyl-channel noise: error W(x, z) with probability P^{XZ}(x, z) on F_p^2.
    Rows of the table are indexed by x, columns by z."""

    p: int
    table: np.ndarray

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError("p must be prime")
        t = np.array(self.table, dtype=float)
        if t.shape != (self.p, self.p) or np.any(t < 0):
            raise ValueError("table must be a nonnegative p x p array")
        if abs(t.sum() - 1) > ci.MASS_TOL:
            raise ci.NotNormalized("table must sum to 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def independent(cls, PX, PZ=None) -> "PauliChannelModel":
        PX = np.asarray(PX, dtype=float)
        PZ = np.eye(len(PX))[0] if PZ is None else np.asarray(PZ, dtype=float)
        return cls(len(PX), np.outer(PX, PZ))

    @property
    def PX(self) -> np.ndarray:
        return self.table.sum(axis=1)

    @property
    def PZ(self) -> np.ndarray:
        return self.table.sum(axis=0)

    @property
    def independent_noise(self) -> bool:
        return bool(np.allclose(self.table, np.outer(self.PX, self.PZ), atol=1e-12))

    def to_json(self) -> dict:
        return {"type": "pauli", "p": self.p, "table": self.table.tolist()}

    def log_phi(self, s: float) -> float:
        """phi(s|A|E) = -s log p + s H_{1-s}(X|Z)."""
        if not 0 <= s < 1:
            raise DomainError("closed forms need s in [0, 1)")
        return -s * math.log(self.p) + _cond_renyi_comp(s, self.table)

    def log_renyi_sum(self, s: float) -> float:
        """-s H_{1+s}(A|E), equal to phi(s) for this channel."""
        if s < 0 or s > 1:
            raise DomainError("closed forms need s in [0, 1]")
        return -s * math.log(self.p) + _cond_renyi_comp(s, self.table)


@dataclass(frozen=True, eq=False)
class SimpleClassicalModel:
    """A uniform on F_p, B = A + X' with X' ~ P_prime, E = A + X with X ~ P."""

    p: int
    P: np.ndarray
    P_prime: np.ndarray

    def __post_init__(self):
        for name in ("P", "P_prime"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (self.p,) or np.any(v < 0) or abs(v.sum() - 1) > ci.MASS_TOL:
                raise ValueError(f"{name} must be a distribution on F_p")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def to_json(self) -> dict:
        return {"type": "simple", "p": self.p, "P": self.P.tolist(), "P_prime": self.P_prime.tolist()}

    def _joint(self, noise) -> np.ndarray:
        p = self.p
        a = np.arange(p)
        return noise[(a[None, :] - a[:, None]) % p] / p

    @property
    def P_AE(self) -> np.ndarray:
        return self._joint(self.P)

    @property
    def P_AB(self) -> np.ndarray:
        return self._joint(self.P_prime)


def renyi(alpha: float, P) -> float:
    """Unconditional Renyi entropy of order alpha; Shannon at alpha = 1."""
    P = np.asarray(P, dtype=float)
    P = P[P > 0]
    if abs(alpha - 1) < 1e-12:
        return ci.entropy(P)
    return logsumexp(alpha * np.log(P)) / (1 - alpha)


def model_from_json(d: dict):
    kind = d.get("type")
    if kind == "pauli":
        return PauliChannelModel(int(d["p"]), np.asarray(d["table"], dtype=float))
    if kind == "simple":
        return SimpleClassicalModel(int(d["p"]), np.asarray(d["P"]), np.asarray(d["P_prime"]))
    raise ValueError(f"unknown model type {kind!r}")


class ClosedFormSource:
    """phi / log_renyi_sum provider usable wherever bounds accepts a source."""

    phi_max_s = 1 - bd.S_OPEN

    def __init__(self, model):
        self.model = model

    def phi(self, s: float) -> float:
        m = self.model
        if isinstance(m, PauliChannelModel):
            return m.log_phi(s)
        return -s * renyi(1 / (1 - s), m.P)

    def log_renyi_sum(self, s: float) -> float:
        m = self.model
        if isinstance(m, PauliChannelModel):
            return m.log_renyi_sum(s)
        return -s * renyi(1 + s, m.P)


# ----------------------------------------------------------------- explicit states


def eve_vector(model: PauliChannelModel, j: int, z: int) -> np.ndarray:
    """sum_x omega^(j x) sqrt(P(x|z)) |x, z>, basis index x*p + z."""
    p = model.p
    v = np.zeros(p * p, dtype=complex)
    pz = model.PZ[z]
    if pz == 0:
        return v
    x = np.arange(p)
    v[x * p + z] = np.exp(2j * np.pi * j * x / p) * np.sqrt(model.table[:, z] / pz)
    return v


def build_tripartite_state(model: PauliChannelModel, pure_eve: bool | None = None) -> tuple[qi.CqState, qi.CqState]:
    """(rho_AB, rho_AE) for a uniform input j sent through the channel.

    Eve holds the channel environment spanned by |x, z>.  With independent
    X and Z the Z register carries nothing about j and can be dropped
    (pure_eve), leaving the p-dimensional states |j:P^X>."""
    p = model.p
    if p > MAX_P_STATE:
        raise qi.DimCap("explicit states need p <= 7")
    if pure_eve is None:
        pure_eve = False
    if pure_eve and not model.independent_noise:
        raise ValueError("pure Eve form needs independent X and Z")
    PX = model.PX
    B = np.zeros((p, p, p), dtype=complex)
    for j in range(p):
        for x in range(p):
            B[j, (j + x) % p, (j + x) % p] = PX[x] / p
    if pure_eve:
        E = np.zeros((p, p, p), dtype=complex)
        x = np.arange(p)
        for j in range(p):
            v = np.exp(2j * np.pi * j * x / p) * np.sqrt(PX)
            E[j] = np.outer(v, v.conj()) / p
    else:
        E = np.zeros((p, p * p, p * p), dtype=complex)
        for j in range(p):
            for z in range(p):
                v = eve_vector(model, j, z)
                E[j] += model.PZ[z] * np.outer(v, v.conj()) / p
    return qi.CqState(B), qi.CqState(E)


def _kron_cq(a: qi.CqState, b: qi.CqState) -> qi.CqState:
    A, B = a.blocks, b.blocks
    out = np.einsum("iab,jcd->ijacbd", A, B)
    k, d = A.shape[0] * B.shape[0], A.shape[1] * B.shape[1]
    return qi.CqState(out.reshape(k, d, d))


def block_sources(model, n: int, pure_eve: bool | None = None) -> tuple:
    """(source_AB, source_AE) for n independent uses, A indexed lexicographically.

    The additive-noise model gives joint tables; the Pauli model gives c-q
    states, with the compact Eve form by default when X and Z are independent."""
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(model, SimpleClassicalModel):
        AB, AE = model.P_AB, model.P_AE
        out_AB, out_AE = AB, AE
        for _ in range(n - 1):
            out_AB, out_AE = np.kron(out_AB, AB), np.kron(out_AE, AE)
        return out_AB, out_AE
    if pure_eve is None:
        pure_eve = model.independent_noise
    AB, AE = build_tripartite_state(model, pure_eve)
    out_AB, out_AE = AB, AE
    for _ in range(n - 1):
        out_AB, out_AE = _kron_cq(out_AB, AB), _kron_cq(out_AE, AE)
    return out_AB, out_AE


def eve_marginal_identity_error(model: PauliChannelModel) -> float:
    """max |rho_E - sum P(x,z)|x,z><x,z||, zero up to rounding."""
    _, rho = build_tripartite_state(model)
    target = np.diag(model.table.reshape(-1)).astype(complex)
    return float(np.max(np.abs(rho.rho_E - target)))


@dataclass(frozen=True)
class ClosedForms:
    s: float
    exp_phi: float
    exp_neg_sH: float
    equality: bool
    phi_AB: float | None = None
    exp_neg_sH_AB: float | None = None


def closed_forms(model, s: float) -> ClosedForms:
    """e^{phi(s)} and e^{-s H_{1+s}} for the adversary side, plus Bob's side
    for the additive-noise models; equality is flagged at 1e-9."""
    if not 0 <= s < 1:
        raise DomainError("closed forms need s in [0, 1)")
    src = ClosedFormSource(model)
    lp, lh = src.phi(s), src.log_renyi_sum(s)
    if isinstance(model, PauliChannelModel):
        bob = -s * renyi(1 / (1 - s), model.PX)
        bob_h = -s * renyi(1 + s, model.PX)
    else:
        bob = -s * renyi(1 / (1 - s), model.P_prime)
        bob_h = -s * renyi(1 + s, model.P_prime)
    return ClosedForms(s, math.exp(lp), math.exp(lh), abs(lp - lh) <= 1e-9, math.exp(bob), math.exp(bob_h))


# ----------------------------------------------------------------- finite-n curves


CURVE_IDS = (
    "d1_finite",
    "I_finite",
    "d1_finite_pure",
    "I_finite_pure",
    "I_finite_via_d1",
    "I_asymptotic",
    "I_asymptotic_via_d1",
)


def _log_d1_finite(model, n, R, s, eps, pure):
    """log[(4 + (n+1)^{k/2} sqrt(eps)) e^{n (s/2)(H_{1/(1+s)} - R)}], k = p - 1 or p^2 - 1."""
    p = model.p
    k = (p - 1) if pure else (p * p - 1)
    pre = math.log(4 + math.exp(k / 2 * math.log(n + 1)) * math.sqrt(eps))
    u = s / (1 + s)
    H = _cond_renyi_comp(u, _pure_table(model) if pure else model.table) / u
    return pre + n * s / 2 * (H - R)


def _log_I_finite(model, n, R, s, eps, pure):
    """log[2 eta(2 e^{n s/(2-s) (H_{1-s} - R)}, eps (n+1)^k / 4 + n log p)]."""
    p = model.p
    k = (p - 1) if pure else (p * p - 1)
    H = _cond_renyi_comp(s, _pure_table(model) if pure else model.table) / s
    y = eps * math.exp(k * math.log(n + 1)) / 4 + n * math.log(p)
    return math.log(2) + ci.log_eta_hull(math.log(2) + n * s / (2 - s) * (H - R), y)


def _log_I_via_d1(model, n, R, s):
    """log eta((4 + (n+1)^{(p-1)/2}) e^{n (s/2)(H_{1/(1+s)} - R)}, n log p)."""
    return ci.log_eta_hull(_log_d1_finite(model, n, R, s, 1.0, True), n * math.log(model.p))


def _pure_table(model) -> np.ndarray:
    PX = model.PX if isinstance(model, PauliChannelModel) else model.P
    return np.asarray(PX, dtype=float)[:, None]


def _as_pauli(model) -> PauliChannelModel:
    if isinstance(model, PauliChannelModel):
        return model
    return PauliChannelModel.independent(model.P)


def asymptotic_exponent(model, R: float, via_d1: bool, pure: bool = True) -> tuple[float, float]:
    """Limit of -(1/n) log of the optimized finite-n I' bound.

    direct: max over s in [0,1] of s/(2-s) (R - H_{1-s})
    via d1: max over s in [0,1] of (s/2) (R - H_{1/(1+s)})"""
    T = _pure_table(model) if pure else _as_pauli(model).table
    if via_d1:
        f = lambda s: s / 2 * R - (1 + s) / 2 * _cond_renyi_comp(s / (1 + s), T)
    else:
        f = lambda s: (s * R - _cond_renyi_comp(s, T)) / (2 - s)
    s, v = bd.maximize_1d(f, bd.S_OPEN, 1.0)
    if v <= 0:
        return 0.0, 0.0
    return v, s


def finite_n_point(model, curve: str, n: int, R: float, eps: float = 1.0) -> tuple[float, float]:
    """(-(1/n) log min_s bound, s*) for one finite-n display."""
    m = _as_pauli(model)
    if curve == "d1_finite":
        f = lambda s: _log_d1_finite(m, n, R, s, eps, False)
    elif curve == "I_finite":
        f = lambda s: _log_I_finite(m, n, R, s, eps, False)
    elif curve == "d1_finite_pure":
        f = lambda s: _log_d1_finite(m, n, R, s, 1.0, True)
    elif curve == "I_finite_pure":
        f = lambda s: _log_I_finite(m, n, R, s, 1.0, True)
    elif curve == "I_finite_via_d1":
        f = lambda s: _log_I_via_d1(m, n, R, s)
    elif curve == "I_asymptotic":
        v, s = asymptotic_exponent(m, R, via_d1=False)
        return v, s
    elif curve == "I_asymptotic_via_d1":
        v, s = asymptotic_exponent(m, R, via_d1=True)
        return v, s
    else:
        raise ValueError(f"unknown curve {curve!r}")
    s, lv = bd.minimize_1d(f, bd.S_OPEN, 1.0)
    return -lv / n, s


def finite_n_curves(model, n: int, R_grid, family_eps: float = 1.0, curves=CURVE_IDS, jobs: int = 1) -> list[tuple]:
    """Rows (R, curve_id, value, s_star, n) ordered by curve then rate."""
    if n > 10**6:
        raise ValueError("n must be at most 10^6")
    tasks = [(c, float(R)) for c in curves for R in R_grid]

    def one(task):
        c, R = task
        v, s = finite_n_point(model, c, n, R, family_eps)
        return (R, c, v, s, n)

    return _ordered_map(one, tasks, jobs)


def _ordered_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def rate_grid(lo: float, hi: float, points: int = GRID) -> np.ndarray:
    return np.linspace(lo, hi, points)


FIG1_CURVES = ("I_asymptotic_via_d1", "I_asymptotic", "I_finite_via_d1", "I_finite_pure")


def fig1_model() -> PauliChannelModel:
    return PauliChannelModel.independent([0.9, 0.1])


def fig2_model() -> SimpleClassicalModel:
    return SimpleClassicalModel(2, np.array([0.9, 0.1]), np.array([0.9, 0.1]))


def figure_data(which: str, model=None, n: int = 10_000, points: int = GRID, jobs: int = 1) -> list[tuple]:
    """Curve rows (R, curve_id, value, s_star, n); n is 0 for asymptotic curves.

    fig1: the four leak-exponent curves for a Pauli model on R in [0, log p].
    fig2: e_H and e_phi for an additive-noise model on R in [0, log p]."""
    if which in ("fig1", "1"):
        model = model or fig1_model()
        p = model.p
        grid = rate_grid(0.0, math.log(p), points)
        rows = finite_n_curves(model, n, grid, 1.0, FIG1_CURVES, jobs)
        return [(R, c, v, s, 0 if c.startswith("I_asymptotic") else n) for R, c, v, s, _ in rows]
    if which in ("fig2", "2"):
        model = model or fig2_model()
        grid = rate_grid(0.0, math.log(model.p), points)
        src = ClosedFormSource(model)
        tasks = [(k, float(R)) for k in ("e_H", "e_phi") for R in grid]

        def one(task):
            k, R = task
            e = bd.exponent(k, src, R)
            return (R, k, e.value, e.s_star, 0)

        return _ordered_map(one, tasks, jobs)
    raise ValueError(f"unknown figure {which!r}")


def crossing_interval(rows, better: str = "I_finite_pure", other: str = "I_finite_via_d1") -> list[tuple[float, float]]:
    """Maximal runs of grid rates where `better` strictly exceeds `other`."""
    a = {R: v for R, c, v, _, _ in rows if c == better}
    b = {R: v for R, c, v, _, _ in rows if c == other}
    runs, start, prev = [], None, None
    for R in sorted(a):
        win = a[R] > b[R] and a[R] > 0
        if win and start is None:
            start = R
        if not win and start is not None:
            runs.append((start, prev))
            start = None
        prev = R
    if start is not None:
        runs.append((start, prev))
    return runs
