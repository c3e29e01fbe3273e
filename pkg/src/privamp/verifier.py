"""Brute-force checks of every implemented inequality on seeded small instances.

Each registered check draws `counts` random instances, evaluates both sides
exactly (hash families and code ensembles are fully enumerated) and records
the slack rhs - lhs.  Reports are deterministic functions of (seed, counts).
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import bounds as bd
from . import classical_info as ci
from . import hash_ensembles as he
from . import keygen as kg
from . import pauli as pa
from . import quantum_info as qi
from .finite_field import FieldMatrix, FieldSpec, coset_table, rank, span, vector_index

SCHEMA = "privamp.verify/1"
TOLERANCE = 1e-9
TIGHT = 1e-12
F2 = FieldSpec.of_order(2)


@dataclass(frozen=True)
class LemmaCheck:
    lemma_id: str
    instance: dict
    check: str
    lhs: float
    rhs: float
    slack: float
    passed: bool


# ----------------------------------------------------------------- instances


def instance_rng(seed: int, lemma_id: str, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(lemma_id.encode()), index]))


def random_instance(kind: str, dims: tuple, seed, mode: str = "normalized"):
    """Reproducible random source.

    kind "classical": (|A|, |E|) table, Dirichlet-uniform, strictly positive.
    kind "cq": (d_A, d_E) c-q state from a Haar pure state with dilation.
    kind "pauli": (p,) Pauli model with Dirichlet-uniform P^{XZ}.
    mode "sub" scales the mass by uniform(0.5, 1); "degenerate" zeroes one row.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if kind == "classical":
        nA, nE = dims
        if nA * nE > qi.MAX_DIM * qi.MAX_DIM:
            raise qi.DimCap("classical table too large")
        T = rng.dirichlet(np.ones(nA * nE)).reshape(nA, nE)
        if mode == "degenerate":
            T[rng.integers(nA)] = 0
            T /= T.sum()
        if mode == "sub":
            T *= rng.uniform(0.5, 1)
        return T
    if kind == "cq":
        dA, dE = dims
        if dA * dE > qi.MAX_DIM:
            raise qi.DimCap("d_A d_E exceeds the cap")
        rho = qi.random_cq_state(dA, dE, rng)
        if mode == "degenerate":
            b = rho.blocks.copy()
            b[rng.integers(dA)] = 0
            rho = qi.CqState(b / np.real(sum(np.trace(x) for x in b)))
        if mode == "sub":
            rho = qi.CqState(rho.blocks * rng.uniform(0.5, 1))
        return rho
    if kind == "pauli":
        (p,) = dims
        return pa.PauliChannelModel(p, rng.dirichlet(np.ones(p * p)).reshape(p, p))
    raise ValueError(f"unknown instance kind {kind!r}")


def _sigma(d: int, rng) -> np.ndarray:
    return qi.random_density(d, rng)


def _Q(n: int, rng) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


# ----------------------------------------------------------------- ensemble averages


def _members(family) -> list[FieldMatrix]:
    if isinstance(family, he.HashFamily):
        he._check_budget(family.size * family.q**family.n, False)
        return family.all_members()
    return list(family)


def exact_ensemble_average(family, source, criterion: str, ref=None) -> float:
    """Uniform average over all family members of a criterion of (f(A), E).

    criterion: "d1'", "I'", "H2-exp" (e^{-H_2(f(A)|E||ref)}) or "d2"; ref is the
    reference distribution or state on E (default: the E marginal)."""
    mats = _members(family)
    quantum = isinstance(source, qi.CqState)
    vals = []
    for f in mats:
        if quantum:
            r = qi.apply_hash_q(source, f)
            sig = r.rho_E if ref is None else ref
            if criterion == "d1'":
                vals.append(qi.d1_prime_q(r))
            elif criterion == "I'":
                vals.append(qi.I_prime_q(r))
            elif criterion == "H2-exp":
                vals.append(math.exp(qi.log_renyi_sum_q(1, r, sig, bar=True)))
            elif criterion == "d2":
                vals.append(qi.d2_q(r, sig))
            else:
                raise ValueError(f"unknown criterion {criterion!r}")
        else:
            T = ci.apply_hash(ci._table(source), f)
            Q = T.sum(axis=0) if ref is None else ref
            if criterion == "d1'":
                vals.append(ci.d1_prime(T))
            elif criterion == "I'":
                vals.append(ci.I_prime(T))
            elif criterion == "H2-exp":
                vals.append(math.exp(ci.log_renyi_sum(1, T, Q)))
            elif criterion == "d2":
                vals.append(ci.d2_conditional(T, Q))
            else:
                raise ValueError(f"unknown criterion {criterion!r}")
    return math.fsum(vals) / len(vals)


# ----------------------------------------------------------------- fixed families


@lru_cache(maxsize=None)
def _family(kind: str, n: int, m: int) -> he.HashFamily:
    return he.HashFamily(kind, F2, n, m)


@lru_cache(maxsize=None)
def _dual_eps(kind: str, n: int, m: int) -> float:
    return float(he.dual_epsilon(_family(kind, n, m)).epsilon_dual)


@lru_cache(maxsize=None)
def _kernel_weights(kind: str, n: int, m: int) -> tuple:
    """Uniform distributions on the kernels, plus the exact bias delta^2."""
    ens = he.CodeEnsemble.kernels_of(_family(kind, n, m))
    Ws = []
    for G in ens.codes:
        W = np.zeros(2**n)
        W[np.unique(vector_index(2, span(F2, list(G), n)))] = 1
        Ws.append(W / W.sum())
    _, d2 = he.biased_delta(ens)
    return tuple(Ws), float(d2)


@lru_cache(maxsize=None)
def _codes(n: int, t: int) -> tuple:
    ens = he.CodeEnsemble.all_subspaces(F2, n, t)
    tables = tuple(coset_table(F2, list(G), n) for G in ens.codes)
    return tables, float(he.code_epsilon(ens))


# ----------------------------------------------------------------- checks

Rec = tuple  # (check name, lhs, rhs)


def _monotone(values, name) -> list[Rec]:
    """Records v[i] <= v[i+1] for a nondecreasing sequence."""
    return [(f"{name}[{i}]", values[i], values[i + 1]) for i in range(len(values) - 1)]


def chk_L22c(rng):
    P = _Q(6, rng)
    Q = _Q(6, rng)
    grid = (-0.5, 0.25, 0.5, 1.0)
    return _monotone([ci.psi(s, P, Q) / s for s in grid], "psi(s)/s")


def chk_L11(rng):
    T = random_instance("classical", (4, 3), rng)
    Q = _Q(3, rng)
    grid = (-0.5, -0.25, 0.25, 0.5, 1.0, 2.0)
    H = [ci.cond_renyi(s, T, Q) for s in grid]
    recs = _monotone([-h for h in H], "H_{1+s} nonincreasing")
    recs.append(("H >= H_{1+s}", H[2], ci.cond_renyi(0, T, Q)))
    W = rng.dirichlet(np.ones(3), size=3)
    recs.append(("data processing", ci.cond_renyi(0.5, T), ci.cond_renyi(0.5, ci.apply_channel_E(T, W))))
    return recs


def chk_cor(rng):
    T = random_instance("classical", (4, 3), rng)
    return [(f"s={s}", -ci.phi(s, T), s * ci.cond_renyi(s, T)) for s in (0.1, 0.25, 0.5, 0.9)]


def chk_cor1(rng):
    T = random_instance("classical", (4, 3), rng)
    s = float(rng.uniform(0.1, 1.0))
    Qs = ci.optimal_QE(s, T)
    best = s * ci.cond_renyi(s, T, Qs)
    challengers = rng.dirichlet(np.ones(3), size=1000)
    top = max(s * ci.cond_renyi(s, T, Q) for Q in challengers)
    ident = -(1 + s) * ci.phi(s / (1 + s), T)
    return [("maximizer", top, best), ("identity", abs(best - ident), 0.0)]


def chk_chain_12_20_5(rng):
    P = rng.dirichlet(np.ones(2 * 3 * 2)).reshape(2, 3, 2)
    t = float(rng.uniform(0.05, 0.95))
    lhs = ci.phi(t, P.reshape(2, 6))
    rhs = t * math.log(3) + ci.phi(t, P.reshape(6, 2))
    return [("phi(t|A|B,E) <= t log|B| + phi(t|A,B|E)", lhs, rhs)]


def chk_pinsker(rng):
    T = random_instance("classical", (4, 3), rng)
    c = ci.secrecy_criteria(T)
    r = random_instance("cq", (2, 2), rng)
    d, i = qi.secrecy_criteria_q(r)
    return [("classical", c.d1_prime**2, 2 * c.I_prime), ("quantum", d**2, 2 * i)]


def chk_fannes(rng):
    T = random_instance("classical", (4, 3), rng)
    c = ci.secrecy_criteria(T)
    r = random_instance("cq", (2, 2), rng)
    d, i = qi.secrecy_criteria_q(r)
    return [
        ("classical", c.I_prime, ci.eta_hull(c.d1_prime, math.log(4))),
        ("quantum", i, ci.eta_hull(d, math.log(2))),
    ]


def chk_L21(rng):
    rho, sigma = _sigma(3, rng), _sigma(3, rng)
    grid = (0.25, 0.5, 1.0)
    D = qi.relative_entropy(rho, sigma)
    recs = _monotone([qi.psi_q(s, rho, sigma) / s for s in grid], "psi/s")
    recs += _monotone([qi.psi_bar_q(s, rho, sigma) / s for s in grid], "psibar/s")
    recs += [(f"sD <= psi s={s}", s * D, qi.psi_q(s, rho, sigma)) for s in grid]
    recs += [(f"sD <= psibar s={s}", s * D, qi.psi_bar_q(s, rho, sigma)) for s in grid]
    return recs


def chk_L22(rng):
    r = random_instance("cq", (2, 2), rng)
    sig = _sigma(2, rng)
    grid = (0.1, 0.25, 0.5, 1.0)
    recs = _monotone([-qi.cond_renyi_q(s, r, sig) for s in grid], "H nonincreasing")
    recs += _monotone([-qi.cond_renyi_q(s, r, sig, bar=True) for s in grid], "Hbar nonincreasing")
    return recs


def chk_L31(rng):
    rho, sigma = _sigma(3, rng), _sigma(3, rng)
    recs = [(f"s={s}", qi.psi_bar_q(s, rho, sigma), qi.psi_q(s, rho, sigma)) for s in (0.25, 0.5, 1.0)]
    D = qi.relative_entropy(rho, sigma)
    h = 1e-4
    for name, fn in (("psi", qi.psi_q), ("psibar", qi.psi_bar_q)):
        deriv = (fn(h, rho, sigma) - fn(-h, rho, sigma)) / (2 * h)
        recs.append((f"{name}'(0) = D", abs(deriv - D), 1e-6))
    return recs


def chk_cor1q(rng):
    r = random_instance("cq", (2, 2), rng)
    s = float(rng.uniform(0.1, 1.0))
    best = s * qi.cond_renyi_q(s, r, qi.optimal_sigma(s, r))
    top = max(s * qi.cond_renyi_q(s, r, _sigma(2, rng)) for _ in range(1000))
    ident = -(1 + s) * qi.phi_q(s / (1 + s), r)
    return [("maximizer", top, best), ("identity", abs(best - ident), 0.0)]


def chk_l4b(rng):
    r = random_instance("cq", (3, 2), rng)
    out = qi.apply_channel_q(r, qi.random_channel(2, 2, rng))
    return [(f"s={s}", qi.phi_q(s / (1 + s), out), qi.phi_q(s / (1 + s), r)) for s in (0.25, 0.5, 1.0)]


def chk_l2b(rng):
    r = random_instance("cq", (3, 2), rng)
    return [(f"s={s}", -qi.phi_q(s, r), s * qi.cond_renyi_q(s, r)) for s in (0.1, 0.25, 0.5, 0.9)]


def _lem5_rhs(lrs_full: float, psi1: float, M: int, eps: float = 1.0) -> float:
    return eps * (1 - 1 / M) * math.exp(lrs_full) + math.exp(psi1) / M


def chk_lem5(rng):
    T = random_instance("classical", (8, 3), rng)
    Q = _Q(3, rng)
    fam = _family("toeplitz", 3, 1)
    lhs = exact_ensemble_average(fam, T, "H2-exp", Q)
    return [("toeplitz n=3 m=1", lhs, _lem5_rhs(ci.log_renyi_sum(1, T, Q), ci.psi(1, T.sum(axis=0), Q), 2))]


def chk_lem5q(rng):
    r = random_instance("cq", (4, 2), rng)
    sig = _sigma(2, rng)
    fam = _family("toeplitz", 2, 1)
    lhs = exact_ensemble_average(fam, r, "H2-exp", sig)
    rhs = _lem5_rhs(qi.log_renyi_sum_q(1, r, sig, bar=True), qi.psi_bar_q(1, r.rho_E, sig), 2)
    return [("toeplitz n=2 m=1", lhs, rhs)]


def chk_lem6_1(rng):
    T = random_instance("classical", (8, 3), rng)
    Q = _Q(3, rng)
    Ws, d2 = _kernel_weights("modified-toeplitz", 3, 1)
    avg = math.fsum(ci.d2_conditional(ci.convolve(T, W, F2, 3), Q) for W in Ws) / len(Ws)
    return [("modified-toeplitz kernels n=3 m=1", avg, d2 * math.exp(ci.log_renyi_sum(1, T, Q)))]


def chk_lem6_1q(rng):
    r = random_instance("cq", (4, 2), rng)
    sig = _sigma(2, rng)
    Ws, d2 = _kernel_weights("modified-toeplitz", 2, 1)
    avg = math.fsum(qi.d2_q(qi.convolve_q(r, W, F2, 2), sig) for W in Ws) / len(Ws)
    return [("modified-toeplitz kernels n=2 m=1", avg, d2 * math.exp(qi.log_renyi_sum_q(1, r, sig, bar=True)))]


@lru_cache(maxsize=None)
def _dual_families(n: int) -> tuple:
    """(name, family, eps_dual, fixed_rank) for the dual-universal checks on F_2^n."""
    fams = [
        ("toeplitz", _family("toeplitz", n, 1)),
        ("modified-toeplitz", _family("modified-toeplitz", n, 1)),
        ("permuted-repetition", he.HashFamily("permuted-code-quotient", F2, n, 0, code=((1,) * n,))),
    ]
    out = []
    for name, fam in fams:
        ranks = {rank(F2, M.data) for M in fam.all_members()}
        out.append((name, fam, float(he.dual_epsilon(fam).epsilon_dual), len(ranks) == 1))
    return tuple(out)


def chk_lem6_3(rng):
    """Main form for every family; the refined form assumes all kernels share
    one dimension, so it is checked on fixed-rank families only."""
    T = random_instance("classical", (8, 3), rng)
    Q = _Q(3, rng)
    h = math.exp(ci.log_renyi_sum(1, T, Q))
    psi1 = ci.psi(1, T.sum(axis=0), Q)
    recs = []
    for name, fam, eps, fixed in _dual_families(3):
        M = fam.q**fam.m
        recs.append((f"{name} d2", exact_ensemble_average(fam, T, "d2", Q), eps * h))
        if fixed:
            lhs = exact_ensemble_average(fam, T, "H2-exp", Q)
            recs.append((f"{name} refined", lhs, _lem5_rhs(math.log(h), psi1, M, eps)))
    return recs


def chk_lem6_3q(rng):
    r = random_instance("cq", (4, 2), rng)
    sig = _sigma(2, rng)
    lrs = qi.log_renyi_sum_q(1, r, sig, bar=True)
    psi1 = qi.psi_bar_q(1, r.rho_E, sig)
    recs = []
    for name, fam, eps, fixed in _dual_families(2):
        M = fam.q**fam.m
        recs.append((f"{name} d2", exact_ensemble_average(fam, r, "d2", sig), eps * math.exp(lrs)))
        if fixed:
            lhs = exact_ensemble_average(fam, r, "H2-exp", sig)
            recs.append((f"{name} refined", lhs, _lem5_rhs(lrs, psi1, M, eps)))
    return recs


def chk_lem7(rng):
    T = random_instance("classical", (8, 3), rng)
    fam = _family("toeplitz", 3, 1)
    I = exact_ensemble_average(fam, T, "I'")
    d2 = exact_ensemble_average(fam, T, "d2", T.sum(axis=0))
    return [("log form", I, math.log1p(2 * d2)), ("linear form", math.log1p(2 * d2), 2 * d2)]


def chk_lem7q(rng):
    r = random_instance("cq", (4, 2), rng)
    fam = _family("toeplitz", 2, 1)
    I = exact_ensemble_average(fam, r, "I'")
    d2 = exact_ensemble_average(fam, r, "d2", r.rho_E)
    return [("log form", I, math.log1p(2 * d2)), ("linear form", math.log1p(2 * d2), 2 * d2)]


def _classical_bound_checks(rng, variants_d1, variants_I, kind, eps_fn):
    T = random_instance("classical", (8, 3), rng)
    fam = _family(kind, 3, 1)
    eps = eps_fn()
    d1 = exact_ensemble_average(fam, T, "d1'")
    I = exact_ensemble_average(fam, T, "I'")
    recs = []
    Q = _Q(3, rng)
    for v in variants_d1:
        recs.append((f"d1' {v}", d1, bd.bound_classical_d1(T, 2, eps, v, Q if v in ("lemma8", "lemma9") else None).value))
    for v in variants_I:
        recs.append((f"I' {v}", I, bd.bound_classical_I(T, 2, eps, v).value))
    return recs


def chk_lem8(rng):
    return _classical_bound_checks(rng, ("lemma8",), ("lemma8",), "toeplitz", lambda: 1.0)


def chk_lem9(rng):
    return _classical_bound_checks(rng, ("lemma9",), ("lemma9",), "toeplitz", lambda: _dual_eps("toeplitz", 3, 1))


def chk_lem10(rng):
    return _classical_bound_checks(rng, ("lemma10",), (), "toeplitz", lambda: 1.0)


def chk_lem11(rng):
    return _classical_bound_checks(rng, ("lemma11",), (), "toeplitz", lambda: _dual_eps("toeplitz", 3, 1))


def chk_lem12(rng):
    return _classical_bound_checks(rng, (), ("lemma12",), "toeplitz", lambda: 1.0)


def chk_lem13(rng):
    return _classical_bound_checks(rng, (), ("lemma13",), "toeplitz", lambda: _dual_eps("toeplitz", 3, 1))


def _quantum_bound_checks(rng, variants_d1, variants_I, eps_fn, with_sigma=False):
    r = random_instance("cq", (4, 2), rng)
    fam = _family("toeplitz", 2, 1)
    eps = eps_fn()
    d1 = exact_ensemble_average(fam, r, "d1'")
    I = exact_ensemble_average(fam, r, "I'")
    recs = []
    sig = _sigma(2, rng)
    for v in variants_d1:
        recs.append((f"d1' {v}", d1, bd.bound_quantum_d1(r, 2, eps, None, v).value))
        if with_sigma:
            recs.append((f"d1' {v} fixed sigma", d1, bd.bound_quantum_d1(r, 2, eps, sig, v).value))
    for v in variants_I:
        recs.append((f"I' {v}", I, bd.bound_quantum_I(r, 2, eps, v).value))
    return recs


def chk_lem8q(rng):
    return _quantum_bound_checks(rng, ("lemma8q",), ("lemma8q",), lambda: 1.0, True)


def chk_lem9q(rng):
    return _quantum_bound_checks(rng, ("lemma9q",), ("lemma9q",), lambda: _dual_eps("toeplitz", 2, 1), True)


def chk_lem14(rng):
    return _quantum_bound_checks(rng, ("lemma14_v", "lemma14_lambda"), (), lambda: 1.0, True)


def chk_lem14_2(rng):
    return _quantum_bound_checks(rng, ("lemma14_2_min",), (), lambda: 1.0, True)


def chk_lem15(rng):
    return _quantum_bound_checks(rng, ("lemma15_v", "lemma15_lambda"), (), lambda: _dual_eps("toeplitz", 2, 1), True)


def chk_lem12q(rng):
    return _quantum_bound_checks(rng, (), ("lemma12q",), lambda: 1.0)


def chk_lem13q(rng):
    return _quantum_bound_checks(rng, (), ("lemma13q",), lambda: _dual_eps("toeplitz", 2, 1))


def chk_lem12q2(rng):
    return _quantum_bound_checks(rng, (), ("lemma12q2",), lambda: 1.0)


R_GRID = tuple(np.linspace(0.0, math.log(2), 9)[1:])


def chk_lem_8_29_10(rng):
    p = 2 if rng.random() < 0.5 else 3
    model = random_instance("pauli", (p,), rng)
    src = pa.ClosedFormSource(model)
    recs = []
    for R in R_GRID:
        R = R * math.log(p) / math.log(2)
        for rel in bd.exponent_relations(src, R, quantum=True):
            if rel.applicable:
                recs.append((f"{rel.name} R={R:.4f}", rel.lhs, rel.rhs))
    return recs


def chk_lemL12_31(rng):
    T = random_instance("classical", (8, 3), rng)
    tables, eps1 = _codes(3, 2)
    hashes = _family("toeplitz", 2, 1).all_members()
    vals = [ci.I_prime(kg.leak_distribution(T, tab, f)) for tab in tables for f in hashes]
    avg = math.fsum(vals) / len(vals)
    b_u = kg.leak_I_randomized(T, 2, 2, 2, eps1, universal2=True).value
    eps2 = max(1.0, _dual_eps("toeplitz", 2, 1))
    b_d = kg.leak_I_randomized(T, 2, 2, 2, eps1, eps2).value
    return [("universal2 hash", avg, b_u), ("dual-universal hash", avg, b_d)]


def chk_lemL12_31_2(rng):
    r = random_instance("cq", (8, 2), rng)
    tables, eps1 = _codes(3, 2)
    hashes = _family("toeplitz", 2, 1).all_members()
    vals = [qi.I_prime_q(kg.leak_state(r, tab, f)) for tab in tables for f in hashes]
    avg = math.fsum(vals) / len(vals)
    b_u = kg.leak_I_randomized(r, 2, 2, 2, eps1, universal2=True).value
    eps2 = max(2.0, _dual_eps("toeplitz", 2, 1))
    b_d = kg.leak_I_randomized(r, 2, 2, 2, eps1, eps2).value
    return [("universal2 hash", avg, b_u), ("dual-universal hash", avg, b_d)]


def chk_eq12_23_1(rng):
    T = random_instance("classical", (8, 4), rng)
    recs = []
    for t in (1, 2):
        tables, eps = _codes(3, t)
        avg = math.fsum(kg.error_prob_exact(T, tab) for tab in tables) / len(tables)
        recs.append((f"t={t}", avg, kg.error_bound_ensemble(T, 2, t, eps).value))
    return recs


def chk_eq12_23_10(rng):
    r = random_instance("cq", (4, 2), rng)
    tables, eps = _codes(2, 1)
    avg = math.fsum(kg.error_prob_exact_q(r, tab) for tab in tables) / len(tables)
    return [("t=1", avg, kg.error_bound_q(r, 2, 1, eps).value)]


THM_DUAL_CASES = tuple(
    (q, n, m) for q in (2, 3) for n in range(2, 6) for m in range(1, min(3, n - 1) + 1)
)


def thm_dual_records() -> list[tuple[dict, str, float, float]]:
    """Dual epsilon of universal2 linear families against the ceiling q."""
    out = []
    for q, n, m in THM_DUAL_CASES:
        spec = FieldSpec.of_order(q)
        for kind in ("toeplitz", "field-multiplication"):
            if kind == "field-multiplication" and q**n > 243:
                continue
            fam = he.HashFamily(kind, spec, n, m)
            eps = float(he.dual_epsilon(fam).epsilon_dual)
            out.append(({"kind": kind, "q": q, "n": n, "m": m}, "eps_dual <= q", eps, float(q)))
    return out


CHECKS: dict[str, Callable] = {
    "L22c": chk_L22c,
    "L11": chk_L11,
    "L21": chk_L21,
    "L22": chk_L22,
    "L31": chk_L31,
    "cor": chk_cor,
    "cor1": chk_cor1,
    "cor1q": chk_cor1q,
    "l4b": chk_l4b,
    "l2b": chk_l2b,
    "chain_12_20_5": chk_chain_12_20_5,
    "pinsker": chk_pinsker,
    "fannes": chk_fannes,
    "lem5": chk_lem5,
    "lem5q": chk_lem5q,
    "lem6_1": chk_lem6_1,
    "lem6_1q": chk_lem6_1q,
    "lem6_3": chk_lem6_3,
    "lem6_3q": chk_lem6_3q,
    "lem7": chk_lem7,
    "lem7q": chk_lem7q,
    "lem8": chk_lem8,
    "lem9": chk_lem9,
    "lem8q": chk_lem8q,
    "lem9q": chk_lem9q,
    "lem10": chk_lem10,
    "lem11": chk_lem11,
    "lem12": chk_lem12,
    "lem13": chk_lem13,
    "lem14": chk_lem14,
    "lem14_2": chk_lem14_2,
    "lem15": chk_lem15,
    "lem12q": chk_lem12q,
    "lem13q": chk_lem13q,
    "lem12q2": chk_lem12q2,
    "lem_8_29_10": chk_lem_8_29_10,
    "lemL12_31": chk_lemL12_31,
    "lemL12_31_2": chk_lemL12_31_2,
    "eq12_23_1": chk_eq12_23_1,
    "eq12_23_10": chk_eq12_23_10,
    "thm_dual": None,
}
LEMMA_IDS = tuple(CHECKS)


def _run_one(lemma_id: str, seed: int, index: int, tolerance: float) -> list[LemmaCheck]:
    rng = instance_rng(seed, lemma_id, index)
    inst = {"seed": seed, "index": index}
    out = []
    for name, lhs, rhs in CHECKS[lemma_id](rng):
        lhs, rhs = float(lhs), float(rhs)
        slack = rhs - lhs
        out.append(LemmaCheck(lemma_id, inst, name, lhs, rhs, slack, slack >= -tolerance))
    return out


def run_lemma_suite(
    seed: int = 0,
    counts: int = 100,
    lemmas=None,
    jobs: int = 1,
    tolerance: float = TOLERANCE,
) -> list[LemmaCheck]:
    """All checks for the selected lemma ids, ordered by (lemma_id, instance, check)."""
    ids = sorted(LEMMA_IDS if lemmas is None else lemmas)
    for i in ids:
        if i not in CHECKS:
            raise ValueError(f"unknown lemma id {i!r}")
    tasks = [(lid, k) for lid in ids if lid != "thm_dual" for k in range(counts)]

    def work(task):
        return _run_one(task[0], seed, task[1], tolerance)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(work, tasks))
    else:
        parts = [work(t) for t in tasks]
    results = [c for part in parts for c in part]
    if "thm_dual" in ids:
        for k, (inst, name, lhs, rhs) in enumerate(thm_dual_records()):
            inst = dict(inst, index=k)
            results.append(LemmaCheck("thm_dual", inst, name, lhs, rhs, rhs - lhs, rhs - lhs >= -tolerance))
    results.sort(key=lambda c: (c.lemma_id, c.instance.get("index", 0), c.check))
    return results


def summarize(checks: list[LemmaCheck]) -> dict:
    out: dict[str, dict] = {}
    for c in checks:
        s = out.setdefault(c.lemma_id, {"checks": 0, "failed": 0, "min_slack": math.inf})
        s["checks"] += 1
        s["failed"] += not c.passed
        s["min_slack"] = min(s["min_slack"], c.slack)
    for s in out.values():
        s["passed"] = s["failed"] == 0
        s["tight"] = abs(s["min_slack"]) <= TIGHT
    return out


def report(checks: list[LemmaCheck], seed: int, counts: int, tolerance: float = TOLERANCE) -> dict:
    summary = summarize(checks)
    return {
        "schema": SCHEMA,
        "seed": seed,
        "counts": counts,
        "tolerance": tolerance,
        "passed": all(s["passed"] for s in summary.values()),
        "summary": summary,
        "checks": [asdict(c) for c in checks],
    }


def report_json(rep: dict) -> str:
    """Canonical text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(rep, sort_keys=True, indent=1, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return float(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")
