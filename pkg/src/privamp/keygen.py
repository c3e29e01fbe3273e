"""Secret-key generation with coset error correction and hashing.

Alice holds A in F_q^n and announces the coset [A] of a code C1 of dimension
t.  Bob decodes inside the coset; both keep A1 = A - a([A]) in C1 (written in
code coordinates) and hash it to M values.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import classical_info as ci
from . import quantum_info as qi
from .bounds import PHI_Q_MAX_S, S_OPEN, BoundValue, _finish, minimize_1d
from .finite_field import CosetTable, FieldMatrix, FieldSpec, coset_table

TIE_RTOL = 1e-12
PROJ_TOL = 1e-12
MAX_AB = 2**22


class BudgetExceeded(RuntimeError):
    pass


class ParameterViolation(ValueError):
    pass


def _coset(code, spec: FieldSpec | None, n: int | None) -> CosetTable:
    if isinstance(code, CosetTable):
        return code
    return coset_table(spec, code, n)


def bayes_decode(P_AB, code, coset_label: int, b: int, spec: FieldSpec | None = None, n: int | None = None) -> int:
    """argmax over the announced coset of P(a', b); ties go to the smallest index."""
    T = ci._table(P_AB)
    table = _coset(code, spec, n)
    members = np.sort(table.members[coset_label])
    return int(members[int(np.argmax(T[members, b]))])


def error_prob_exact(P_AB, code, spec: FieldSpec | None = None, n: int | None = None) -> float:
    """sum_{a,b} P(a,b) [some a' != a in the coset has P(a',b) >= P(a,b)].

    Ties count as errors; a relative tolerance of 1e-12 absorbs rounding in
    products that are equal as real numbers."""
    T = ci._table(P_AB)
    if T.size > MAX_AB:
        raise BudgetExceeded("joint table too large for exact evaluation")
    table = _coset(code, spec, n)
    total = []
    for members in table.members:
        V = T[members]  # (|C1|, |B|)
        top = V.max(axis=0)
        near = V >= top * (1 - TIE_RTOL)
        unique = near.sum(axis=0) == 1
        correct = near & unique[None, :] & (V > 0)
        total.append(math.fsum((V * ~correct).ravel()))
    return math.fsum(total)


def error_bound_ensemble(P_AB, q: int, t: int, eps: float = 1.0) -> BoundValue:
    """min over s in (0,1] of eps^s (q^t/|A|)^s e^{phi(-s|A|B)}."""
    T = ci._table(P_AB)
    nA = T.shape[0]

    def obj(s):
        return s * math.log(eps) + s * (t * math.log(q) - math.log(nA)) + ci.phi(-s, T)

    s, lv = minimize_1d(obj, S_OPEN, 1.0)
    return _probability(lv, s, "coset-bayes", {"q": q, "t": t, "eps": eps})


def _probability(lv, s, variant, consts) -> BoundValue:
    value = math.exp(lv) if lv < 700 else math.inf
    return BoundValue(min(value, 1.0), s, variant, "P_e", "none", consts, value > 1.0)


# ----------------------------------------------------------------- quantum decoding


def _nonneg_projector(H: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((H + H.conj().T) / 2)
    keep = w >= -PROJ_TOL
    return V[:, keep] @ V[:, keep].conj().T


class QuantumDecoder:
    """Square-root measurement built from the projectors
    {X_a - (q^t/|A|) rho_B >= 0} inside each coset."""

    def __init__(self, rho_AB, code, spec: FieldSpec | None = None, n: int | None = None):
        self.rho = rho_AB if isinstance(rho_AB, qi.CqState) else qi.CqState(rho_AB)
        self.table = _coset(code, spec, n)
        q, t = self.table.spec.q, self.table.t
        nA = self.rho.size_A
        rB = self.rho.rho_E
        d = self.rho.dim_E
        self.povm = np.zeros((nA, d, d), dtype=complex)
        for members in self.table.members:
            proj = {int(a): _nonneg_projector(self.rho.blocks[a] - (q**t / nA) * rB) for a in members}
            Qinv = qi.mpow(sum(proj.values()), -0.5)
            for a, P in proj.items():
                self.povm[a] = Qinv @ P @ Qinv

    def error_prob(self) -> float:
        """sum_a Tr X_a (I - P'_a); the completion of the POVM counts as error."""
        d = self.rho.dim_E
        terms = [
            float(np.real(np.trace(X @ (np.eye(d) - P)))) for X, P in zip(self.rho.blocks, self.povm)
        ]
        return math.fsum(terms)


def error_prob_exact_q(rho_AB, code, spec: FieldSpec | None = None, n: int | None = None) -> float:
    return QuantumDecoder(rho_AB, code, spec, n).error_prob()


def error_bound_q(rho_AB, q: int, t: int, eps: float = 1.0) -> BoundValue:
    """min over s in (0,1] of (2 + 4 eps) (q^t/|A|)^s sum_a Tr X_a^(1-s) rho_B^s."""
    rho = rho_AB if isinstance(rho_AB, qi.CqState) else qi.CqState(rho_AB)
    rB = rho.rho_E
    nA = rho.size_A

    def obj(s):
        g = qi.mpow(rB, s)
        tr = math.fsum(float(np.real(np.trace(qi.mpow(X, 1 - s) @ g))) for X in rho.blocks)
        return math.log(2 + 4 * eps) + s * (t * math.log(q) - math.log(nA)) + math.log(tr)

    s, lv = minimize_1d(obj, S_OPEN, 1.0)
    return _probability(lv, s, "square-root-measurement", {"q": q, "t": t, "eps": eps})


# ----------------------------------------------------------------- leaked information


def hashed_key_index(table: CosetTable, f: FieldMatrix) -> np.ndarray:
    """Index of f(A1) for every a, where A1 is a's component in C1 in code coordinates."""
    return ci.hash_index_map(f)[table.coeff]


def leak_distribution(P_AE, table: CosetTable, f: FieldMatrix) -> np.ndarray:
    """Joint table of (f(A1), ([A], E)), the adversary holding the coset label."""
    T = ci._table(P_AE)
    key = hashed_key_index(table, f)
    nC, nE = len(table.rep), T.shape[1]
    out = np.zeros((f.spec.q**f.rows, nC * nE))
    for a in range(T.shape[0]):
        lab = table.label[a]
        out[key[a], lab * nE : (lab + 1) * nE] += T[a]
    return out


def leak_state(rho_AE, table: CosetTable, f: FieldMatrix) -> qi.CqState:
    """c-q state of f(A1) against ([A], E), the coset label held classically."""
    rho = rho_AE if isinstance(rho_AE, qi.CqState) else qi.CqState(rho_AE)
    key = hashed_key_index(table, f)
    nC, d = len(table.rep), rho.dim_E
    out = np.zeros((f.spec.q**f.rows, nC * d, nC * d), dtype=complex)
    for a in range(rho.size_A):
        lab = table.label[a]
        out[key[a], lab * d : (lab + 1) * d, lab * d : (lab + 1) * d] += rho.blocks[a]
    return qi.CqState(out)


FIXED_VARIANTS = ("d1_universal", "d1_dual", "I_universal", "I_dual")


def leak_bounds_fixed(source, L: float, M: int, eps: float = 1.0, variant: str = "d1_universal") -> BoundValue:
    """Leak bound for a fixed code with sacrifice L = |C1|/M; depends on C1 only through L.

    classical d1: (3 or 2 + sqrt eps) (|A|/L)^s e^{phi(s)}, s in (0, 1/2]
    classical I:  eta((|A|/L)^s e^{phi(s)}, (1 or eps) + log M)
    quantum d1:   (4 + sqrt(v' or eps v')) (|A|/L)^{s/2} e^{((1+s)/2) phi(s/(1+s))},
                  v' the eigenvalue count of Tr_A rho^{1+s}
    quantum I:    2 eta(2 (|A|/L)^{s/(2-s)} e^{phi(s)/(2-s)}, (v or v eps)/4 + log max(M, d_E))
    """
    if L < 1:
        raise ParameterViolation("sacrifice L must be at least 1")
    if variant not in FIXED_VARIANTS:
        raise ValueError(f"unknown variant {variant}")
    dual = variant.endswith("dual")
    quantum = isinstance(source, qi.CqState)
    nA = source.size_A if quantum else ci._table(source).shape[0]
    logr = math.log(nA) - math.log(L)
    consts = {"L": L, "M": M, "eps": eps}
    if not quantum:
        T = ci._table(source)
        if variant.startswith("d1"):
            c = 2 + math.sqrt(eps) if dual else 3.0
            s, lv = minimize_1d(lambda s: math.log(c) + s * logr + ci.phi(s, T), S_OPEN, 0.5)
            return _finish(lv, s, variant, "d1'", "minentropy", consts)
        c = (eps if dual else 1.0) + math.log(M)
        s, lv = minimize_1d(lambda s: ci.log_eta_hull(s * logr + ci.phi(s, T), c), S_OPEN, 1 - S_OPEN)
        return _finish(lv, s, variant, "I'", "minentropy", consts)
    rho = source
    mult = eps if dual else 1.0
    if variant.startswith("d1"):
        def obj(s):
            v1 = qi.spectrum_stats(qi.trace_A_power(s, rho)).v
            return math.log(4 + math.sqrt(mult * v1)) + (s / 2) * logr + ((1 + s) / 2) * qi.phi_q(s / (1 + s), rho)

        s, lv = minimize_1d(obj, S_OPEN, 1.0)
        return _finish(lv, s, variant, "d1'", "minentropy", consts)
    v = qi.spectrum_stats(rho.rho_E).v
    c = v * mult / 4 + math.log(max(M, rho.dim_E))
    consts["v"] = v

    def obj(s):
        return math.log(2) + ci.log_eta_hull(math.log(2) + (s * logr + qi.phi_q(s, rho)) / (2 - s), c)

    s, lv = minimize_1d(obj, S_OPEN, PHI_Q_MAX_S)
    return _finish(lv, s, variant, "I'", "minentropy", consts)


def leak_I_randomized(source, q: int, t: int, M: int, eps1: float, eps2: float = 1.0, universal2: bool = False) -> BoundValue:
    """Leak bound when both the code (eps1-almost universal) and the hash
    (eps2-almost dual universal, or universal2) are drawn at random.

    classical: eta((|A| M/q^t)^s e^{-s H_{1+s}(A|E)}, log M + c) + log eps1,
               c = eps2/eps1, or 1/eps1 for a universal2 hash
    quantum:   2 eta(2 (|A| M/q^t)^{s/(2-s)} e^{-(s/(2-s)) H_{1+s}}, log max(M, d_E) + c) + log eps1,
               c = v eps2/(2 eps1), or v/(4 eps1) for a universal2 hash
    """
    quantum = isinstance(source, qi.CqState)
    if not universal2 and eps2 < (2 if quantum else 1):
        raise ParameterViolation("eps2 too small for the dual-universal form")
    nA = source.size_A if quantum else ci._table(source).shape[0]
    logr = math.log(nA) + math.log(M) - t * math.log(q)
    consts = {"q": q, "t": t, "M": M, "eps1": eps1, "eps2": eps2, "universal2": universal2}
    if not quantum:
        T = ci._table(source)
        c = math.log(M) + (1 / eps1 if universal2 else eps2 / eps1)

        def obj(s):
            return math.exp(ci.log_eta_hull(s * logr + ci.log_renyi_sum(s, T), c)) + math.log(eps1)

        s, val = minimize_1d(obj, S_OPEN, 1.0)
        return _finish_shifted(val, s, consts)
    rho = source
    v = qi.spectrum_stats(rho.rho_E).v
    consts["v"] = v
    c = math.log(max(M, rho.dim_E)) + (v / (4 * eps1) if universal2 else v * eps2 / (2 * eps1))

    def obj(s):
        inner = math.log(2) + (s * logr + qi.log_renyi_sum_q(s, rho)) / (2 - s)
        return 2 * math.exp(ci.log_eta_hull(inner, c)) + math.log(eps1)

    s, val = minimize_1d(obj, S_OPEN, 1.0)
    return _finish_shifted(val, s, consts)


def _finish_shifted(value: float, s: float, consts: dict) -> BoundValue:
    return BoundValue(value, s, "randomized-code", "I'", "minentropy", consts, False)


# ----------------------------------------------------------------- rates


@dataclass(frozen=True)
class Region:
    R1_max: float
    R2_min: float
    key_rate: float


def achievable_region(source_AB, source_AE) -> Region:
    """Per-block rates: R1 = log|A| - H(A|B), R2 = log|A| - H(A|E), key rate R1 - R2 floored at 0."""
    def cond(src):
        if isinstance(src, qi.CqState):
            return src.size_A, qi.cond_shannon_q(src)
        T = ci._table(src)
        return T.shape[0], ci.cond_shannon(T)

    nA, hB = cond(source_AB)
    _, hE = cond(source_AE)
    R1 = math.log(nA) - hB
    R2 = math.log(nA) - hE
    return Region(R1, R2, max(R1 - R2, 0.0))


@dataclass(frozen=True)
class ProtocolReport:
    p_error_exact: float | None
    p_error_bound: BoundValue
    leak_d1_bound: BoundValue
    leak_I_bound: BoundValue
    leak_d1_exact: float | None = None
    leak_I_exact: float | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        return d


def protocol_report(source_AB, source_AE, code, M: int, spec: FieldSpec, n: int, eps_code: float = 1.0, eps_hash: float = 1.0, hash_matrix: FieldMatrix | None = None) -> ProtocolReport:
    """Exact decoding error for the code and the fixed-code leak bounds; with a
    concrete hash matrix the exact leak criteria are included."""
    table = _coset(code, spec, n)
    q, t = spec.q, table.t
    L = q**t / M
    if L < 1:
        raise ParameterViolation("M exceeds the code size")
    quantum_B = isinstance(source_AB, qi.CqState)
    if quantum_B:
        pe = error_prob_exact_q(source_AB, table)
        pb = error_bound_q(source_AB, q, t, eps_code)
    else:
        pe = error_prob_exact(source_AB, table)
        pb = error_bound_ensemble(source_AB, q, t, eps_code)
    dual = eps_hash != 1.0
    d1b = leak_bounds_fixed(source_AE, L, M, eps_hash, "d1_dual" if dual else "d1_universal")
    Ib = leak_bounds_fixed(source_AE, L, M, eps_hash, "I_dual" if dual else "I_universal")
    d1x = Ix = None
    if hash_matrix is not None:
        if isinstance(source_AE, qi.CqState):
            d1x, Ix = qi.secrecy_criteria_q(leak_state(source_AE, table, hash_matrix))
        else:
            crit = ci.secrecy_criteria(leak_distribution(source_AE, table, hash_matrix))
            d1x, Ix = crit.d1_prime, crit.I_prime
    return ProtocolReport(pe, pb, d1b, Ib, d1x, Ix)
