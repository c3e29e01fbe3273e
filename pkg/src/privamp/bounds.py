"""One-shot secrecy bounds after hashing and their asymptotic exponents.

Every bound is minimized over its free parameter s with a 64-point grid scan
followed by golden-section refinement.  Objectives are handled as logarithms
so that very small or very large bounds stay finite.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import classical_info as ci
from . import quantum_info as qi

GRID_POINTS = 64
S_TOL = 1e-6
S_OPEN = 1e-6
S_CAP = 8.0
D1_CAP = 2.0
# matrix phi_q needs extended precision as s -> 1; the optimizer stops here
PHI_Q_MAX_S = 0.9
GOLDEN = (math.sqrt(5) - 1) / 2


def minimize_1d(f: Callable[[float], float], lo: float, hi: float, grid: int = GRID_POINTS, tol: float = S_TOL):
    """Global-ish minimum of f on [lo, hi]: grid scan, then golden section on
    the cell around the best grid point.  Never worse than the grid."""
    xs = np.linspace(lo, hi, grid)
    fs = [f(float(x)) for x in xs]
    i = int(np.argmin(fs))
    best_x, best_f = float(xs[i]), fs[i]
    a, b = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, grid - 1)])
    x1, x2 = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    for x, v in ((x1, f1), (x2, f2)):
        if v < best_f:
            best_x, best_f = x, v
    return best_x, best_f


def maximize_1d(f, lo, hi, grid: int = GRID_POINTS, tol: float = S_TOL):
    x, v = minimize_1d(lambda s: -f(s), lo, hi, grid, tol)
    return x, -v


@dataclass(frozen=True)
class BoundValue:
    value: float
    s_star: float | None
    variant: str
    criterion: str
    smoothing: str
    constants: dict = field(default_factory=dict)
    clamped: bool = False

    def to_json(self) -> dict:
        return asdict(self)


def _finish(log_value: float, s: float | None, variant: str, criterion: str, smoothing: str, constants: dict) -> BoundValue:
    value = math.exp(log_value) if log_value < 700 else math.inf
    clamped = False
    if criterion == "d1'" and value > D1_CAP:
        value, clamped = D1_CAP, True
    return BoundValue(value, s, variant, criterion, smoothing, constants, clamped)


# ----------------------------------------------------------------- classical


def bound_classical_d1(P, M: int, eps: float = 1.0, variant: str = "lemma10", Q=None) -> BoundValue:
    """Upper bound on the family average of d1'(f(A)|E) for hashes into M values.

    lemma8/lemma9: sqrt(eps M) e^{-H_2(A|E|P||Q)/2}
    lemma10/lemma11: (3 or 2 + sqrt(eps)) M^s e^{phi(s)}, s in (0, 1/2]
    """
    T = ci._table(P)
    consts = {"M": M, "eps": eps}
    if variant in ("lemma8", "lemma9"):
        e = 1.0 if variant == "lemma8" else eps
        lv = 0.5 * (math.log(e * M) + ci.log_renyi_sum(1, T, Q))
        return _finish(lv, None, variant, "d1'", "renyi2", consts)
    if variant not in ("lemma10", "lemma11"):
        raise ValueError(f"unknown variant {variant}")
    c = 3.0 if variant == "lemma10" else 2 + math.sqrt(eps)
    s, lv = minimize_1d(lambda s: math.log(c) + s * math.log(M) + ci.phi(s, T), S_OPEN, 0.5)
    return _finish(lv, s, variant, "d1'", "minentropy", consts)


def bound_classical_I(P, M: int, eps: float = 1.0, variant: str = "lemma12") -> BoundValue:
    """Upper bound on the family average of I'(f(A)|E).

    lemma8/lemma9: log(1 + eps M e^{-H_2(A|E|P)})
    lemma12/lemma13: eta(M^s e^{-s H_{1+s}(A|E|P)}, c + log M), c = 1 or eps.
    """
    T = ci._table(P)
    if abs(T.sum() - 1) > ci.MASS_TOL:
        raise ci.NotNormalized("I' bounds need a normalized distribution")
    consts = {"M": M, "eps": eps}
    if variant in ("lemma8", "lemma9"):
        e = 1.0 if variant == "lemma8" else eps
        x = e * M * math.exp(ci.log_renyi_sum(1, T))
        return _finish(math.log(math.log1p(x)), None, variant, "I'", "renyi2", consts)
    if variant not in ("lemma12", "lemma13"):
        raise ValueError(f"unknown variant {variant}")
    c = (1.0 if variant == "lemma12" else eps) + math.log(M)
    s, lv = minimize_1d(lambda s: ci.log_eta_hull(s * math.log(M) + ci.log_renyi_sum(s, T), c), S_OPEN, 1.0)
    return _finish(lv, s, variant, "I'", "minentropy", consts)


# ----------------------------------------------------------------- quantum


def _cq(rho) -> qi.CqState:
    return rho if isinstance(rho, qi.CqState) else qi.CqState(rho)


def bound_quantum_d1(rho, M: int, eps: float = 1.0, sigma=None, variant: str = "lemma14_v") -> BoundValue:
    """Upper bound on the family average of d1'(f(A)|E) for a c-q state.

    lemma8q/lemma9q: sqrt(eps M) e^{-H2bar(A|E|rho||sigma)/2}
    lemma14_v:       (4 + sqrt v) M^{s/2} e^{-(s/2) H_{1+s}(A|E|rho||sigma)}
    lemma14_lambda:  (4 + sqrt ceil(lambda)) ... e^{... + s/2}
    lemma15_*:       as lemma14 with v (or ceil lambda) multiplied by eps
    lemma14_2_min:   (4 + sqrt v) M^{s/(2+2s)} e^{-(s/(2+2s)) H_{1+s}}, s up to 8

    Without sigma the lemma14/15 forms use the optimal sigma for each s, which
    turns the exponent into ((1+s)/2) phi(s/(1+s)) (resp. phi(s/(1+s))/2).
    """
    rho = _cq(rho)
    logM = math.log(M)
    consts = {"M": M, "eps": eps, "sigma": "given" if sigma is not None else "optimal"}
    if variant in ("lemma8q", "lemma9q"):
        e = 1.0 if variant == "lemma8q" else eps
        sig = rho.rho_E if sigma is None else sigma
        lv = 0.5 * (math.log(e * M) + qi.log_renyi_sum_q(1, rho, sig, bar=True))
        return _finish(lv, None, variant, "d1'", "renyi2", consts)

    mult = eps if variant.startswith("lemma15") else 1.0
    use_lambda = variant.endswith("lambda")
    if variant not in ("lemma14_v", "lemma14_lambda", "lemma15_v", "lemma15_lambda", "lemma14_2_min"):
        raise ValueError(f"unknown variant {variant}")

    def prefactor(op) -> float:
        st = qi.spectrum_stats(op)
        k = math.ceil(st.lam) if use_lambda else st.v
        return math.log(4 + math.sqrt(mult * k))

    if sigma is not None:
        pre = prefactor(sigma)
        consts["v"] = qi.spectrum_stats(sigma).v
        consts["lambda"] = qi.spectrum_stats(sigma).lam
        if variant == "lemma14_2_min":
            def obj(s):
                w = 1 / (2 + 2 * s)
                return pre + w * (s * logM + qi.log_renyi_sum_q(s, rho, sigma))
            s, lv = minimize_1d(obj, S_OPEN, S_CAP)
        else:
            def obj(s):
                extra = s / 2 if use_lambda else 0.0
                return pre + 0.5 * (s * logM + qi.log_renyi_sum_q(s, rho, sigma)) + extra
            s, lv = minimize_1d(obj, S_OPEN, 1.0)
        return _finish(lv, s, variant, "d1'", "minentropy", consts)

    def obj(s):
        pre = prefactor(qi.trace_A_power(s, rho))
        t = s / (1 + s)
        if variant == "lemma14_2_min":
            return pre + (s / (2 + 2 * s)) * logM + 0.5 * qi.phi_q(t, rho)
        extra = s / 2 if use_lambda else 0.0
        return pre + (s / 2) * logM + ((1 + s) / 2) * qi.phi_q(t, rho) + extra

    s, lv = minimize_1d(obj, S_OPEN, S_CAP if variant == "lemma14_2_min" else 1.0)
    return _finish(lv, s, variant, "d1'", "minentropy", consts)


def bound_quantum_I(rho, M: int, eps: float = 1.0, variant: str = "lemma12q") -> BoundValue:
    """Upper bound on the family average of I'(f(A)|E) for a normalized c-q state.

    lemma8q/lemma9q: eps M e^{-H2bar(A|E|rho)}
    lemma12q:  2 eta(2 M^{s/(2-s)} e^{-(s/(2-s)) H_{1+s}}, v/4 + log max(M, d_E))
    lemma13q:  v eps / 4 in place of v / 4
    lemma12q2: 2 eta(2 M^{s/(2+s)} e^{-(s/(2+s)) H_{1+s}}, v/4 + log M), s up to 8
    v is the eigenvalue count of rho_E.
    """
    rho = _cq(rho)
    if not rho.normalized:
        raise ci.NotNormalized("I' bounds need a normalized state")
    logM = math.log(M)
    v = qi.spectrum_stats(rho.rho_E).v
    consts = {"M": M, "eps": eps, "v": v, "d_E": rho.dim_E}
    if variant in ("lemma8q", "lemma9q"):
        e = 1.0 if variant == "lemma8q" else eps
        lv = math.log(e * M) + qi.log_renyi_sum_q(1, rho, rho.rho_E, bar=True)
        return _finish(lv, None, variant, "I'", "renyi2", consts)
    if variant == "lemma12q2":
        c = v / 4 + logM

        def obj(s):
            return math.log(2) + ci.log_eta_hull(math.log(2) + (s * logM + qi.log_renyi_sum_q(s, rho)) / (2 + s), c)

        s, lv = minimize_1d(obj, S_OPEN, S_CAP)
        return _finish(lv, s, variant, "I'", "minentropy", consts)
    if variant not in ("lemma12q", "lemma13q"):
        raise ValueError(f"unknown variant {variant}")
    c = (v if variant == "lemma12q" else v * eps) / 4 + math.log(max(M, rho.dim_E))

    def obj(s):
        return math.log(2) + ci.log_eta_hull(math.log(2) + (s * logM + qi.log_renyi_sum_q(s, rho)) / (2 - s), c)

    s, lv = minimize_1d(obj, S_OPEN, 1.0)
    return _finish(lv, s, variant, "I'", "minentropy", consts)


def smooth_d1_bound(eps1: float, M: int, h2_smooth: float) -> float:
    """2 eps1 + sqrt(M) e^{-H_2^{eps1}/2} for a supplied smoothed entropy."""
    return 2 * eps1 + math.sqrt(M) * math.exp(-h2_smooth / 2)


def smooth_I_bound(eps1: float, M: int, d_E: int, h_smooth: float) -> float:
    """eta(eps1, log(M d_E)) + M e^{-H^{eps1}} for a supplied smoothed entropy."""
    return ci.eta(eps1, math.log(M * d_E)) + M * math.exp(-h_smooth)


# ----------------------------------------------------------------- exponents


class _Source:
    """Uniform view of phi(s) and log sum P^{1+s} (= -s H_{1+s}) for a source."""

    def __init__(self, src):
        self.src = src
        if isinstance(src, qi.CqState):
            self.phi = lambda s: qi.phi_q(s, src)
            self.lrs = lambda s: qi.log_renyi_sum_q(s, src)
            self.phi_max_s = PHI_Q_MAX_S
        elif isinstance(src, (ci.JointSubDistribution, np.ndarray, list)):
            T = ci._table(src)
            self.phi = lambda s: ci.phi(s, T)
            self.lrs = lambda s: ci.log_renyi_sum(s, T)
            self.phi_max_s = 1 - S_OPEN
        else:
            self.phi = src.phi
            self.lrs = src.log_renyi_sum
            self.phi_max_s = getattr(src, "phi_max_s", 1 - S_OPEN)


EXPONENT_KINDS = ("e_phi", "e_H", "e_phi_q", "e_H_q", "e_phi_q2")


@dataclass(frozen=True)
class ExponentValue:
    value: float
    s_star: float


def _objective(kind: str, src: _Source, R: float):
    if kind == "e_phi":
        return (lambda t: -src.phi(t) - t * R), 0.5
    if kind == "e_H":
        return (lambda s: -src.lrs(s) - s * R), 1.0
    if kind == "e_phi_q":
        return (lambda s: -((1 + s) / 2) * src.phi(s / (1 + s)) - (s / 2) * R), 1.0
    if kind == "e_H_q":
        return (lambda s: (-src.lrs(s) - s * R) / (2 - s)), 1.0
    if kind == "e_phi_q2":
        return (lambda s: (-s * R - src.phi(s)) / (2 - s)), src.phi_max_s
    raise ValueError(f"unknown exponent kind {kind}")


def exponent(kind: str, source, R: float) -> ExponentValue:
    """Maximum of the kind's objective over its parameter interval (0 at s = 0)."""
    src = source if isinstance(source, _Source) else _Source(source)
    f, hi = _objective(kind, src, R)
    s, v = maximize_1d(f, S_OPEN, hi)
    if v <= 0:
        return ExponentValue(0.0, 0.0)
    return ExponentValue(v, s)


@dataclass(frozen=True)
class ExponentCurve:
    kind: str
    rate_grid: tuple
    values: tuple
    s_stars: tuple


def exponent_curve(kind: str, source, rates) -> ExponentCurve:
    src = _Source(source)
    pts = [exponent(kind, src, float(R)) for R in rates]
    return ExponentCurve(kind, tuple(float(r) for r in rates), tuple(p.value for p in pts), tuple(p.s_star for p in pts))


def rate_threshold(source, s: float = 2 / 3, h: float = 1e-4) -> float:
    """R(s) = ((2-s)^2/2) d/ds [s H_{1+s}/(2-s)], the rate whose e_H_q maximizer is s."""
    src = source if isinstance(source, _Source) else _Source(source)
    g = lambda x: -src.lrs(x) / (2 - x)
    return (2 - s) ** 2 / 2 * (g(s + h) - g(s - h)) / (2 * h)


def renyi_phi_equality(source, grid=(0.1, 0.25, 0.5, 0.9), tol: float = 1e-8) -> bool:
    """True when s H_{1+s} = -phi(s) on the grid (the equality case of the
    bound s H_{1+s} >= -phi(s))."""
    src = source if isinstance(source, _Source) else _Source(source)
    return all(abs(src.lrs(s) - src.phi(s)) <= tol for s in grid)


@dataclass(frozen=True)
class Relation:
    name: str
    lhs: float
    rhs: float
    applicable: bool = True

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def exponent_relations(source, R: float, quantum: bool | None = None) -> list[Relation]:
    """Inequalities between exponents at rate R, each as lhs <= rhs."""
    src = _Source(source)
    if quantum is None:
        quantum = not isinstance(source, (ci.JointSubDistribution, np.ndarray, list))
    out = []
    if not quantum:
        eH = exponent("e_H", src, R).value
        ephi = exponent("e_phi", src, R).value
        out.append(Relation("e_phi <= e_H", ephi, eH))
        out.append(Relation("e_H/2 <= e_phi", eH / 2, ephi))
        return out
    eHq = exponent("e_H_q", src, R).value
    ephiq = exponent("e_phi_q", src, R).value
    e2 = exponent("e_phi_q2", src, R)
    out.append(Relation("e_H_q/2 <= e_phi_q", eHq / 2, ephiq))
    out.append(Relation("e_phi_q2 <= e_H_q", e2.value, eHq))
    out.append(Relation("e_phi_q2 <= e_phi_q (maximizer s <= 1/2)", e2.value, ephiq, e2.s_star <= 0.5))
    cond = renyi_phi_equality(src) and R >= rate_threshold(src)
    out.append(Relation("e_H_q <= e_phi_q (equality case, R >= R(2/3))", eHq, ephiq, cond))
    return out
