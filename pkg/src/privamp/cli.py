"""Command-line front end: bounds, exponent curves, family certification,
protocol reports, figure data, the verification suite and file validation."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import bounds as bd
from . import classical_info as ci
from . import hash_ensembles as he
from . import keygen as kg
from . import pauli as pa
from . import quantum_info as qi
from . import verifier as vf
from .finite_field import FieldMatrix, FieldSpec

JOBS_ENV = "PRIVAMP_JOBS"
LN2 = math.log(2)

SCHEMA_HELP = """\
input files (JSON):
  model     {"type": "simple", "p": 2, "P": [0.9, 0.1], "P_prime": [0.9, 0.1]}
            {"type": "pauli", "p": 2, "table": [[0.9, 0], [0.1, 0]]}   rows x, columns z
  source    {"type": "distribution", "rows": [[a, e, p], ...]}
            {"type": "table", "table": [[P(a=0,e=0), ...], ...]}
            {"type": "cq_state", "weights": [P(a), ...],
             "conditionals": [[[[re, im], ...], ...], ...]}   one d_E x d_E matrix per a
            a model is also accepted; it stands for its Alice-Eve part
  protocol  {"q": 2, "n": 3, "code": [[1, 1, 0]], "M": 2,
             "eps_code": 1, "eps_hash": 1, "hash_matrix": [[1]]}          hash_matrix optional
  config    {"units": "bits", "seed": 7, "jobs": 2, "tolerance": 1e-9}   keys of RunConfig

output: CSV (17 significant digits, LF line endings, header row) for curves,
canonical JSON for everything else.  `validate` accepts all of them.
environment: PRIVAMP_JOBS sets the default --jobs.
exit codes: 0 success, 1 failed check or invalid file, 2 usage error.
"""


class UsageError(Exception):
    pass


class InvalidInput(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str = ""
    inputs: list = field(default_factory=list)
    out: str | None = None
    units: str = "nats"
    seed: int = 0
    jobs: int = 1
    tolerance: float = vf.TOLERANCE

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise UsageError(f"unknown config keys: {', '.join(extra)}")
        cfg = cls(**d)
        cfg.check()
        return cfg

    def check(self):
        if self.units not in ("nats", "bits"):
            raise UsageError("units must be nats or bits")
        if self.jobs < 1:
            raise UsageError("jobs must be at least 1")
        if not self.tolerance >= 0:
            raise UsageError("tolerance must be nonnegative")


# ----------------------------------------------------------------- formats


def fmt_number(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def emit_csv(header, rows, path=None) -> str:
    """RFC-4180 text with 17 significant digits and LF endings; written to
    path when given (or stdout for "-"), always returned."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_number(v) for v in r])
    text = buf.getvalue()
    _write(text, path)
    return text


def load_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        data = list(csv.reader(fh))
    if not data:
        raise InvalidInput(f"{path}: empty file")
    return data[0], data[1:]


def to_json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return float(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _write(text: str, path):
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{path}: {e}") from e


# ----------------------------------------------------------------- inputs


def load_source(d: dict, role: str = "AE"):
    """JointSubDistribution, CqState, or a model's role part (AB or AE)."""
    kind = d.get("type")
    if kind in ("simple", "pauli"):
        model = pa.model_from_json(d)
        ab, ae = pa.block_sources(model, 1)
        return ab if role == "AB" else ae
    if kind == "table":
        return ci.JointSubDistribution(np.asarray(d["table"], dtype=float))
    if kind == "distribution":
        la, le, cells = [], [], {}
        for a, e, p in d["rows"]:
            if a not in la:
                la.append(a)
            if e not in le:
                le.append(e)
            cells[(a, e)] = cells.get((a, e), 0.0) + float(p)
        T = np.zeros((len(la), len(le)))
        for (a, e), p in cells.items():
            T[la.index(a), le.index(e)] = p
        return ci.JointSubDistribution(T, tuple(la), tuple(le))
    if kind == "cq_state":
        return qi.CqState.from_json(d)
    raise InvalidInput(f"unknown source type {kind!r}")


def _model(path):
    return pa.model_from_json(_read_json(path))


# ----------------------------------------------------------------- subcommands


CLASSICAL_VARIANTS = {
    "d1'": ("lemma8", "lemma9", "lemma10", "lemma11"),
    "I'": ("lemma8", "lemma9", "lemma12", "lemma13"),
}
QUANTUM_VARIANTS = {
    "d1'": ("lemma8q", "lemma9q", "lemma14_v", "lemma14_lambda", "lemma15_v", "lemma15_lambda", "lemma14_2_min"),
    "I'": ("lemma8q", "lemma9q", "lemma12q", "lemma13q", "lemma12q2"),
}


def _render_bound(b: bd.BoundValue, units: str) -> dict:
    d = b.to_json()
    if units == "bits" and b.criterion == "I'":
        d["value"] = b.value / LN2
    d["units"] = units if b.criterion == "I'" else "none"
    return d


def cmd_bound(args, cfg: RunConfig) -> int:
    src = load_source(_read_json(args.source))
    quantum = isinstance(src, qi.CqState)
    table = QUANTUM_VARIANTS if quantum else CLASSICAL_VARIANTS
    crits = ["d1'", "I'"] if args.criterion == "both" else [args.criterion + "'"]
    records = []
    for crit in crits:
        variants = table[crit] if not args.variant else [v for v in args.variant if v in table[crit]]
        for v in variants:
            if quantum:
                fn = bd.bound_quantum_d1 if crit == "d1'" else bd.bound_quantum_I
            else:
                fn = bd.bound_classical_d1 if crit == "d1'" else bd.bound_classical_I
            records.append(_render_bound(fn(src, args.M, args.eps, variant=v), cfg.units))
    if args.variant and not records:
        raise UsageError("no requested variant applies to this source")
    text = to_json_text({"schema": "privamp.bound/1", "M": args.M, "eps": args.eps, "bounds": records})
    _write(text, cfg.out or "-")
    return 0


def _exponent_source(d: dict):
    if d.get("type") in ("simple", "pauli"):
        return pa.ClosedFormSource(pa.model_from_json(d))
    return load_source(d)


def cmd_exponents(args, cfg: RunConfig) -> int:
    src = bd._Source(_exponent_source(_read_json(args.model)))
    kinds = args.kind or ["e_H", "e_phi"]
    grid = pa.rate_grid(args.rmin, args.rmax, args.points)
    tasks = [(k, float(R)) for k in kinds for R in grid]

    def one(task):
        k, R = task
        e = bd.exponent(k, src, R)
        return (R, k, e.value, e.s_star)

    rows = pa._ordered_map(one, tasks, cfg.jobs)
    scale = 1 / LN2 if cfg.units == "bits" else 1.0
    rows = [(R * scale, k, v * scale, s) for R, k, v, s in rows]
    emit_csv(("R", "kind", "value", "s_star"), rows, cfg.out or "-")
    return 0


def cmd_family(args, cfg: RunConfig) -> int:
    spec = FieldSpec.of_order(args.q)
    code = tuple(tuple(r) for r in json.loads(args.code)) if args.code else ()
    fam = he.HashFamily(args.kind, spec, args.n, args.m, seed=cfg.seed, code=code)
    rep = he.certify(fam, args.certify, args.samples, cfg.seed, args.force)
    out = {
        "schema": "privamp.family/1",
        "family": {"kind": fam.kind, "q": fam.q, "n": fam.n, "m": fam.m, "size": fam.size},
        "report": rep.to_json(),
    }
    _write(to_json_text(out), cfg.out or "-")
    return 0


def _protocol_sources(args, proto: dict):
    n = int(proto.get("n", 1))
    if args.model:
        return pa.block_sources(_model(args.model), n)
    if not (args.source_ab and args.source_ae):
        raise UsageError("give --model, or both --source-ab and --source-ae")
    return load_source(_read_json(args.source_ab), "AB"), load_source(_read_json(args.source_ae), "AE")


def cmd_protocol(args, cfg: RunConfig) -> int:
    proto = _read_json(args.protocol)
    unknown = sorted(set(proto) - {"q", "n", "code", "M", "eps_code", "eps_hash", "hash_matrix"})
    if unknown:
        raise InvalidInput(f"unknown protocol keys: {', '.join(unknown)}")
    spec = FieldSpec.of_order(int(proto.get("q", 2)))
    n = int(proto["n"])
    src_AB, src_AE = _protocol_sources(args, proto)
    hm = proto.get("hash_matrix")
    rep = kg.protocol_report(
        src_AB, src_AE, proto["code"], int(proto["M"]), spec, n,
        float(proto.get("eps_code", 1.0)), float(proto.get("eps_hash", 1.0)),
        FieldMatrix(spec, hm) if hm is not None else None,
    )
    region = kg.achievable_region(src_AB, src_AE)
    out = {"schema": "privamp.protocol/1", "config": proto, "report": rep.to_json(),
           "region": {"R1_max": region.R1_max, "R2_min": region.R2_min, "key_rate": region.key_rate}}
    _write(to_json_text(out), cfg.out or "-")
    if args.csv:
        scale = 1 / LN2 if cfg.units == "bits" else 1.0
        I_x = None if rep.leak_I_exact is None else rep.leak_I_exact * scale
        rows = [
            ("p_error_exact", rep.p_error_exact),
            ("p_error_bound", rep.p_error_bound.value),
            ("leak_d1_bound", rep.leak_d1_bound.value),
            ("leak_I_bound", rep.leak_I_bound.value * scale),
            ("leak_d1_exact", rep.leak_d1_exact),
            ("leak_I_exact", I_x),
        ]
        emit_csv(("quantity", "value"), rows, args.csv)
    return 0


def cmd_pauli(args, cfg: RunConfig) -> int:
    model = _model(args.model) if args.model else None
    rows = pa.figure_data(f"fig{args.fig}", model, n=args.n, points=args.points, jobs=cfg.jobs)
    if cfg.units == "bits":
        rows = [(R / LN2, c, v / LN2, s, n) for R, c, v, s, n in rows]
    emit_csv(("R", "curve_id", "value", "s_star", "n"), rows, cfg.out or "-")
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    lemmas = None if args.suite == "all" else args.suite.split(",")
    checks = vf.run_lemma_suite(cfg.seed, args.counts, lemmas, cfg.jobs, cfg.tolerance)
    rep = vf.report(checks, cfg.seed, args.counts, cfg.tolerance)
    _write(vf.report_json(rep), cfg.out)
    for lid, s in sorted(rep["summary"].items()):
        flag = "ok" if s["passed"] else "FAIL"
        print(f"{lid:16s} {flag:4s} checks={s['checks']} min_slack={s['min_slack']:.3e}")
    return 0 if rep["passed"] else 1


# ----------------------------------------------------------------- validate


CSV_HEADERS = {
    ("R", "kind", "value", "s_star"): 2,
    ("R", "curve_id", "value", "s_star", "n"): 3,
    ("quantity", "value"): 1,
}


def _validate_csv(path) -> list[str]:
    header, rows = load_csv(path)
    text_col = CSV_HEADERS.get(tuple(header))
    if text_col is None:
        return [f"unrecognized header {header}"]
    label = {2: 1, 3: 1, 1: 0}[text_col]
    problems = []
    for k, r in enumerate(rows, start=2):
        if len(r) != len(header):
            problems.append(f"line {k}: {len(r)} fields, expected {len(header)}")
            continue
        for j, v in enumerate(r):
            if j == label or v == "":
                continue
            try:
                x = float(v)
            except ValueError:
                problems.append(f"line {k}: {v!r} is not a number")
                continue
            if math.isnan(x):
                problems.append(f"line {k}: NaN")
    print(f"{path}: csv {len(rows)} rows, columns {','.join(header)}")
    return problems


def _describe_source(src) -> str:
    if isinstance(src, qi.CqState):
        w = src.weights
        return f"c-q state |A|={src.size_A} d_E={src.dim_E} mass={w.sum():.17g} P_A={np.round(w, 12).tolist()}"
    return (f"distribution |A|={src.size_A} |E|={src.size_E} mass={src.mass:.17g} "
            f"P_A={np.round(src.marginal_A, 12).tolist()} P_E={np.round(src.marginal_E, 12).tolist()}")


def _validate_json(path) -> list[str]:
    d = _read_json(path)
    schema = d.get("schema")
    if schema == vf.SCHEMA:
        bad = [lid for lid, s in d["summary"].items() if not s["passed"]]
        n = sum(s["checks"] for s in d["summary"].values())
        print(f"{path}: verify report, {n} checks, {len(bad)} failing lemma ids")
        if d["passed"] != (not bad):
            return ["passed flag disagrees with summary"]
        return [f"lemma {lid} failed" for lid in bad]
    if schema == "privamp.bound/1":
        probs = [f"bound {b['variant']} is not a number" for b in d["bounds"] if b["value"] is None or math.isnan(b["value"])]
        print(f"{path}: {len(d['bounds'])} bound records")
        return probs
    if schema == "privamp.family/1":
        r = d["report"]
        eu, ed = r["epsilon_universal"], r["epsilon_dual"]
        print(f"{path}: family {d['family']['kind']} eps_universal={eu and eu['value']} eps_dual={ed and ed['value']}")
        return [] if eu is None or eu["value"] >= 0 else ["negative epsilon"]
    if schema == "privamp.protocol/1":
        pe = d["report"]["p_error_exact"]
        print(f"{path}: protocol report, p_error_exact={pe}")
        return [] if pe is None or 0 <= pe <= 1 + 1e-12 else ["error probability outside [0, 1]"]
    if d.get("type") in ("simple", "pauli"):
        model = pa.model_from_json(d)
        ab, ae = pa.block_sources(model, 1) if d["type"] == "simple" or model.p <= pa.MAX_P_STATE else (None, None)
        print(f"{path}: {d['type']} model p={model.p}")
        if ae is not None:
            print(f"  AE: {_describe_source(ci.JointSubDistribution(ae) if isinstance(ae, np.ndarray) else ae)}")
        return []
    if {"n", "code", "M"} <= set(d):
        print(f"{path}: protocol config n={d['n']} M={d['M']}")
        return []
    src = load_source(d)
    print(f"{path}: {_describe_source(src)}")
    mass = src.weights.sum() if isinstance(src, qi.CqState) else src.mass
    return [] if mass <= 1 + ci.MASS_TOL else ["mass exceeds 1"]


def cmd_validate(args, cfg: RunConfig) -> int:
    status = 0
    for path in args.files:
        try:
            probs = _validate_csv(path) if path.endswith(".csv") else _validate_json(path)
        except (InvalidInput, ValueError, KeyError, TypeError) as e:
            probs = [str(e)]
        for p in probs:
            print(f"  invalid: {p}")
        status = status or (1 if probs else 0)
    return status


# ----------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"\n{self.prog}: error: {message}\n")


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    common.add_argument("--out", help="output path ('-' for stdout; default stdout)")
    common.add_argument("--units", choices=("nats", "bits"), help="render information values in nats (default) or bits")
    common.add_argument("--seed", type=int, help="seed for sampled quantities (default 0)")
    common.add_argument("--jobs", type=int, help=f"worker threads (default ${JOBS_ENV} or 1)")
    common.add_argument("--tolerance", type=float, help=f"slack tolerance for checks (default {vf.TOLERANCE})")

    p = _Parser(prog="privamp", description=__doc__, epilog=SCHEMA_HELP,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", parents=[common], help="one-shot secrecy bounds for a source")
    b.add_argument("--source", required=True)
    b.add_argument("--M", type=int, required=True, help="number of hash outputs")
    b.add_argument("--eps", type=float, default=1.0, help="family epsilon (default 1)")
    b.add_argument("--criterion", choices=("d1", "I", "both"), default="both")
    b.add_argument("--variant", action="append", help="restrict to these variants (repeatable)")

    e = sub.add_parser("exponents", parents=[common], help="exponent curves over a rate grid")
    e.add_argument("--model", required=True, help="model or source JSON")
    e.add_argument("--kind", action="append", choices=bd.EXPONENT_KINDS, help="repeatable; default e_H and e_phi")
    e.add_argument("--rmin", type=float, default=0.0, help="nats")
    e.add_argument("--rmax", type=float, default=LN2, help="nats")
    e.add_argument("--points", type=int, default=pa.GRID)

    f = sub.add_parser("family", parents=[common], help="certify a hash family")
    f.add_argument("--kind", required=True, choices=he.KINDS)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--m", type=int, default=0)
    f.add_argument("--q", type=int, default=2)
    f.add_argument("--code", help="JSON basis rows for permuted-code-quotient")
    f.add_argument("--certify", choices=("exhaustive", "sampled", "auto"), default="auto")
    f.add_argument("--samples", type=int, default=20000)
    f.add_argument("--force", action="store_true", help="ignore the exhaustive work budget")

    r = sub.add_parser("protocol", parents=[common], help="key-generation protocol report")
    r.add_argument("--protocol", required=True, help="protocol JSON")
    r.add_argument("--model", help="model JSON; its n-fold block source is used")
    r.add_argument("--source-ab", help="source JSON for Alice-Bob")
    r.add_argument("--source-ae", help="source JSON for Alice-Eve")
    r.add_argument("--csv", help="also write a quantity,value summary CSV")

    q = sub.add_parser("pauli", parents=[common], help="figure curves for the channel models")
    q.add_argument("--model", help="model JSON (default: the figure's model)")
    q.add_argument("--fig", type=int, choices=(1, 2), required=True)
    q.add_argument("--n", type=int, default=10_000, help="block length for finite-n curves")
    q.add_argument("--points", type=int, default=pa.GRID)

    v = sub.add_parser("verify", parents=[common], help="exhaustive lemma verification suite")
    v.add_argument("--suite", default="all", help="'all' or comma-separated lemma ids")
    v.add_argument("--counts", type=int, default=100, help="instances per lemma")

    a = sub.add_parser("validate", parents=[common], help="check files this tool reads or writes")
    a.add_argument("files", nargs="+")
    return p


COMMANDS = {
    "bound": cmd_bound,
    "exponents": cmd_exponents,
    "family": cmd_family,
    "protocol": cmd_protocol,
    "pauli": cmd_pauli,
    "verify": cmd_verify,
    "validate": cmd_validate,
}


def _config(args) -> RunConfig:
    base = {}
    if args.config:
        base = _read_json(args.config)
        if not isinstance(base, dict):
            raise UsageError("config must be a JSON object")
    base.setdefault("jobs", _default_jobs())
    for key in ("out", "units", "seed", "jobs", "tolerance"):
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    base["subcommand"] = args.subcommand
    return RunConfig.from_dict(base)


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.subcommand](args, cfg)
    except UsageError as e:
        parser.print_help(sys.stderr)
        print(f"\nprivamp: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"privamp: {e}", file=sys.stderr)
        return 2
    except (InvalidInput, ValueError, KeyError, kg.ParameterViolation, he.BudgetExceeded, kg.BudgetExceeded) as e:
        print(f"privamp: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main(argv=None):
    try:
        code = dispatch(argv)
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else 2
    sys.exit(code)
