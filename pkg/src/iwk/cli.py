"""Command-line surface: analyze, twist, fitting, growth, coinv, ingest, cache.

All structured output is JSON (text mode renders the same dictionary);
identical inputs and budgets give byte-identical reports.  Exit codes:
0 all conditions hold, 1 malformed input, 2 some condition fails,
3 inconclusive only, 4 twist search exhausted.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import re
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from .errors import (
    BadReductionAtP,
    BudgetExceeded,
    IwkError,
    PrecisionExhausted,
    SearchExhausted,
)
from .padic import INFINITY
from .zpmod import (
    FgZpModule,
    Presentation,
    diagonal_presentation,
    fitting_from_minors,
    module_from_presentation,
    phi,
    phi_bruteforce,
)
from .iwasawa import DistinguishedPoly, ElementaryLambdaModule, growth_window_check
from .growth import (
    IwasawaInvariants,
    class_number_growth,
    compare,
    doubling_discrepancy_note,
    mordell_weil_bound,
)
from .ecq import (
    EllipticCurveQ,
    TraceRecord,
    canonical_minimal,
    count_points_ap,
    minimal_model,
    reduction_summary,
)
from .conditions import (
    check_c1_str,
    check_c2,
    check_c2_sufficient,
    check_c3,
)
from .twist import DEFAULT_SEARCH_BOUND, construct_c2_twist

CACHE_ENV_VAR = "IWK_CACHE_DIR"
DEFAULT_CACHE_DIR = ".iwk-cache"
CSV_HEADER = ["label", "a1", "a2", "a3", "a4", "a6"]


# ---------------------------------------------------------------------------
# Literal parsers.


def parse_curve(text: str) -> EllipticCurveQ:
    parts = text.split(",")
    if len(parts) != 5:
        raise ValueError("curve literal must be 'a1,a2,a3,a4,a6'")
    try:
        ainvs = tuple(int(x.strip()) for x in parts)
    except ValueError as e:
        raise ValueError(f"non-integer curve coefficient: {e}") from None
    return EllipticCurveQ(*ainvs)


def parse_module_literal(text: str) -> FgZpModule:
    """'p:e1,e2,...#r' with both the exponent list and '#r' optional."""
    m = re.fullmatch(r"(\d+):([\d,\s]*)(?:#(\d+))?", text.strip())
    if not m:
        raise ValueError("module literal must look like 'p:e1,e2#r'")
    p = int(m.group(1))
    exps = tuple(
        sorted((int(x) for x in m.group(2).split(",") if x.strip()), reverse=True)
    )
    r = int(m.group(3)) if m.group(3) else 0
    return FgZpModule(p, r, exps)


_TERM_RE = re.compile(r"^([+-]?\d*)\s*(?:\*?\s*T(?:\^(\d+))?)?$")


def parse_poly_literal(text: str) -> List[int]:
    """Integer polynomial in T, e.g. 'T^2+3*T+3'; ascending coefficient list."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    terms = re.findall(r"[+-]?[^+-]+", s)
    coeffs: Dict[int, int] = {}
    for term in terms:
        m = _TERM_RE.match(term)
        if not m:
            raise ValueError(f"cannot parse term {term!r}")
        coeff_s, exp_s = m.groups()
        has_T = "T" in term
        if coeff_s in ("", "+"):
            c = 1
        elif coeff_s == "-":
            c = -1
        else:
            c = int(coeff_s)
        k = int(exp_s) if exp_s else (1 if has_T else 0)
        coeffs[k] = coeffs.get(k, 0) + c
    deg = max(coeffs)
    return [coeffs.get(k, 0) for k in range(deg + 1)]


def parse_n_range(text: str) -> List[int]:
    """'2..5' or comma-separated levels."""
    s = text.strip()
    if ".." in s:
        lo, hi = s.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in s.split(",") if x.strip()]


def _fmt_val(v) -> object:
    return "INFINITY" if v == INFINITY else int(v)


# ---------------------------------------------------------------------------
# Curve ingestion and the trace cache.


@dataclass(frozen=True)
class CurveRecord:
    label: str
    ainvs: Tuple[int, int, int, int, int]

    def __post_init__(self):
        EllipticCurveQ(*self.ainvs)  # validates nonsingularity

    def curve(self) -> EllipticCurveQ:
        return EllipticCurveQ(*self.ainvs)


def ingest_curves(path: str) -> List[CurveRecord]:
    records: List[CurveRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}:1: empty file") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise ValueError(f"{path}:1: header must be exactly {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(row)}")
            try:
                ainvs = tuple(int(x.strip()) for x in row[1:])
                records.append(CurveRecord(row[0].strip(), ainvs))
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
    return records


def cache_dir() -> str:
    return os.environ.get(CACHE_ENV_VAR, DEFAULT_CACHE_DIR)


def curve_cache_key(E: EllipticCurveQ) -> str:
    E_min = canonical_minimal(E)
    payload = ",".join(str(a) for a in E_min.ainvs)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _cache_path(E: EllipticCurveQ) -> str:
    return os.path.join(cache_dir(), curve_cache_key(E) + ".jsonl")


def _load_cache(E_min: EllipticCurveQ, path: str) -> Dict[int, TraceRecord]:
    out: Dict[int, TraceRecord] = {}
    if not os.path.exists(path):
        return out
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                ell, ap = int(obj["ell"]), int(obj["ap"])
                curve = tuple(int(a) for a in obj["curve"])
                if curve != E_min.ainvs:
                    raise ValueError("curve mismatch")
                if ap * ap > 4 * ell:
                    raise ValueError("Hasse bound violated")
                rec = TraceRecord(ell, ap, float(obj.get("computed_at", 0.0)))
            except (ValueError, KeyError, TypeError) as e:
                print(
                    f"warning: discarding corrupt cache entry {path}:{lineno} ({e})",
                    file=sys.stderr,
                )
                continue
            out[ell] = rec
    return out


def _write_cache(E_min: EllipticCurveQ, path: str, records: Dict[int, TraceRecord]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + f".tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        for ell in sorted(records):
            rec = records[ell]
            fh.write(
                json.dumps(
                    {
                        "curve": list(E_min.ainvs),
                        "ell": rec.prime,
                        "ap": rec.a_ell,
                        "computed_at": rec.computed_at,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    os.replace(tmp, path)


def cache_traces(E: EllipticCurveQ, bound: int) -> List[TraceRecord]:
    """Compute and persist a_ell for all good odd ell <= bound; idempotent."""
    E_min = canonical_minimal(E)
    path = _cache_path(E_min)
    known = _load_cache(E_min, path)
    disc = abs(E_min.discriminant)
    changed = False
    for ell in sympy.primerange(3, bound + 1):
        if disc % ell == 0 or ell in known:
            continue
        known[ell] = count_points_ap(E_min, ell)
        changed = True
    if changed or not os.path.exists(path):
        _write_cache(E_min, path, known)
    return [known[ell] for ell in sorted(known) if known[ell].prime <= bound]


# ---------------------------------------------------------------------------
# The analyze pipeline.


@dataclass(frozen=True)
class AnalysisReport:
    data: Dict

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2)

    @property
    def exit_code(self) -> int:
        statuses = [v["status"] for v in self.data["verdicts"].values()]
        if any(s == "FAILS" for s in statuses):
            return 2
        if any(s == "INCONCLUSIVE" for s in statuses):
            return 3
        return 0


def analyze_curve(
    E: EllipticCurveQ,
    p: int,
    ap_bound: int = 10**4,
    mu: Optional[int] = None,
    lam: Optional[int] = None,
    rank: Optional[int] = None,
    source: str = "",
    label: str = "",
) -> AnalysisReport:
    E_min, (u, _, _, _) = minimal_model(E)
    reductions = {
        str(ell): {
            "kind": info.kind.value,
            "potentially": info.potentially.value,
            "twist_class_gamma": info.twist_class_gamma.value
            if info.twist_class_gamma
            else None,
        }
        for ell, info in reduction_summary(E_min).items()
    }
    verdicts = {
        "C1_str": check_c1_str(E_min, p, ap_bound).to_json_dict(),
        "C2": check_c2(E_min, p).to_json_dict(),
        "C2_sufficient": check_c2_sufficient(E_min, p).to_json_dict(),
        "C3": check_c3(E_min).to_json_dict(),
    }
    for v in verdicts.values():
        v.pop("condition", None)
    data: Dict = {
        "curve": {
            "label": label,
            "input_ainvs": list(E.ainvs),
            "minimal_ainvs": list(E_min.ainvs),
            "scaling_u": u,
            "discriminant": E_min.discriminant,
        },
        "p": p,
        "reductions": reductions,
        "verdicts": verdicts,
        "discrepancy_flags": [],
    }
    if mu is not None and lam is not None:
        inv = IwasawaInvariants(p, mu, lam, source=source or "cli-ingested")
        growth = class_number_growth(inv)
        data["iwasawa_invariants"] = {"mu": mu, "lambda": lam, "source": inv.source}
        data["class_number_growth"] = growth.to_json_dict()
        note = doubling_discrepancy_note(p, mu, lam)
        if note:
            data["discrepancy_flags"].append(note)
    if rank is not None:
        lam_lower, growth_lower = mordell_weil_bound(rank, 0, p)
        data["mordell_weil_bound"] = {
            "rank": rank,
            "lambda_lower": lam_lower,
            "growth_lower": growth_lower.to_json_dict(),
        }
    return AnalysisReport(data)


# ---------------------------------------------------------------------------
# Subcommand handlers.


def _render_text(obj: Dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key in sorted(obj):
        val = obj[key]
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_render_text(val, indent + 1))
        else:
            lines.append(f"{pad}{key}: {val}")
    return "\n".join(lines)


def _emit(data: Dict, fmt: str) -> None:
    if fmt == "text":
        print(_render_text(data))
    else:
        print(json.dumps(data, sort_keys=True, indent=2))


def _cmd_analyze(args) -> int:
    E = parse_curve(args.curve)
    p = args.p
    if p == 2 or not sympy.isprime(p):
        raise ValueError("p must be an odd prime")
    if (args.mu is None) != (getattr(args, "lam") is None):
        raise ValueError("--mu and --lambda must be supplied together")
    try:
        report = analyze_curve(
            E,
            p,
            ap_bound=args.ap_bound,
            mu=args.mu,
            lam=args.lam,
            rank=args.rank,
            source=args.source,
            label=args.label,
        )
    except BadReductionAtP as e:
        raise ValueError(str(e)) from None
    _emit(report.data, args.format)
    return report.exit_code


def _cmd_twist(args) -> int:
    E = parse_curve(args.curve)
    p = args.p
    if p == 2 or not sympy.isprime(p):
        raise ValueError("p must be an odd prime")
    try:
        E_tw, cert = construct_c2_twist(E, p, args.search_bound)
    except SearchExhausted as e:
        print(json.dumps({"error": str(e)}, sort_keys=True))
        return 4
    except BadReductionAtP as e:
        raise ValueError(str(e)) from None
    data = {"twisted_ainvs": list(E_tw.ainvs), "certificate": cert.to_json_dict()}
    _emit(data, args.format)
    return 0


def _cmd_fitting(args) -> int:
    i = args.i
    if args.module is not None:
        M = parse_module_literal(args.module)
        value = phi(M, i)
        data: Dict = {"module": args.module, "i": i, "phi": _fmt_val(value)}
        checks = {}
        if M.is_torsion and M.exponents:
            try:
                bf = phi_bruteforce(M, i, budget=args.budget)
                checks["bruteforce"] = {
                    "value": _fmt_val(bf),
                    "agrees": bf == value,
                }
            except BudgetExceeded as e:
                checks["bruteforce"] = {"skipped": str(e)}
            try:
                mv = fitting_from_minors(diagonal_presentation(M), i)
                checks["minors"] = {
                    "value": _fmt_val(mv.generator_valuation),
                    "agrees": mv.generator_valuation == value,
                }
            except (BudgetExceeded, PrecisionExhausted) as e:
                checks["minors"] = {"skipped": str(e)}
        data["cross_checks"] = checks
    else:
        with open(args.presentation_file) as fh:
            obj = json.load(fh)
        matrix = tuple(tuple(int(x) for x in row) for row in obj["matrix"])
        P = Presentation(int(obj["p"]), int(obj["precision"]), matrix)
        M = module_from_presentation(P)
        value = phi(M, i)
        data = {
            "presentation_file": args.presentation_file,
            "module": {"p": M.p, "free_rank": M.free_rank, "exponents": list(M.exponents)},
            "i": i,
            "phi": _fmt_val(value),
        }
        if P.generators <= 6:
            try:
                mv = fitting_from_minors(P, i)
                data["cross_checks"] = {
                    "minors": {
                        "value": _fmt_val(mv.generator_valuation),
                        "agrees": mv.generator_valuation == value,
                    }
                }
            except PrecisionExhausted as e:
                data["cross_checks"] = {"minors": {"skipped": str(e)}}
    _emit(data, args.format)
    return 0


def _cmd_growth(args) -> int:
    inv = IwasawaInvariants(args.p, args.mu, args.lam, source=args.source or "cli")
    g = class_number_growth(inv)
    data: Dict = {"growth": g.to_json_dict()}
    note = doubling_discrepancy_note(args.p, args.mu, args.lam)
    if note:
        data["discrepancy_flags"] = [note]
    if args.compare:
        parts = [int(x) for x in args.compare.split(",")]
        if len(parts) != 3:
            raise ValueError("--compare expects 'p,mu,lambda'")
        other = class_number_growth(
            IwasawaInvariants(parts[0], parts[1], parts[2], source="cli-compare")
        )
        data["compare"] = {
            "other": other.to_json_dict(),
            "relation": compare(g, other).value,
        }
    _emit(data, args.format)
    return 0


def _cmd_coinv(args) -> int:
    coeffs = parse_poly_literal(args.poly)
    if coeffs[-1] != 1:
        raise ValueError("polynomial must be monic")
    f = DistinguishedPoly(args.p, tuple(coeffs[:-1]))
    M = ElementaryLambdaModule(args.p, args.mu, ((f, 1),) if f.degree else ())
    if f.degree == 0 and args.mu == 0:
        M = ElementaryLambdaModule(args.p, 0, ())
    levels = parse_n_range(args.n_range)
    rep = growth_window_check(M, levels)
    data = {
        "p": args.p,
        "mu": args.mu,
        "lambda": M.lambda_invariant,
        "table": [
            {"n": n, "order": o, "deviation": d}
            for n, o, d in zip(rep.levels, rep.orders, rep.deviations)
        ],
        "bounded_tail": rep.bounded,
        "max_deviation": rep.max_deviation,
    }
    _emit(data, args.format)
    return 0


def _cmd_ingest(args) -> int:
    records = ingest_curves(args.path)
    data = {
        "path": args.path,
        "count": len(records),
        "records": [{"label": r.label, "ainvs": list(r.ainvs)} for r in records],
    }
    _emit(data, args.format)
    return 0


def _cmd_cache(args) -> int:
    E = parse_curve(args.curve)
    records = cache_traces(E, args.bound)
    data = {
        "curve": list(canonical_minimal(E).ainvs),
        "bound": args.bound,
        "cached": len(records),
        "cache_file": _cache_path(E),
    }
    _emit(data, args.format)
    return 0


# ---------------------------------------------------------------------------
# Parser assembly.


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on malformed input, not argparse's 2
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iwk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(sp):
        sp.add_argument("--format", choices=("json", "text"), default="json")

    sp = sub.add_parser("analyze", help="full condition report for a pair (E, p)")
    sp.add_argument("--curve", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--ap-bound", type=int, default=10**4, dest="ap_bound")
    sp.add_argument("--search-bound", type=int, default=DEFAULT_SEARCH_BOUND)
    sp.add_argument("--rank", type=int, default=None)
    sp.add_argument("--mu", type=int, default=None)
    sp.add_argument("--lambda", type=int, default=None, dest="lam")
    sp.add_argument("--source", default="")
    sp.add_argument("--label", default="")
    add_format(sp)
    sp.set_defaults(func=_cmd_analyze)

    sp = sub.add_parser("twist", help="construct a twist satisfying the torsion condition")
    sp.add_argument("--curve", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--search-bound", type=int, default=DEFAULT_SEARCH_BOUND, dest="search_bound")
    add_format(sp)
    sp.set_defaults(func=_cmd_twist)

    sp = sub.add_parser("fitting", help="Fitting-ideal valuation with cross-checks")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--module")
    group.add_argument("--presentation-file", dest="presentation_file")
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--budget", type=int, default=10**6)
    add_format(sp)
    sp.set_defaults(func=_cmd_fitting)

    sp = sub.add_parser("growth", help="class-number growth class from invariants")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--mu", type=int, required=True)
    sp.add_argument("--lambda", type=int, required=True, dest="lam")
    sp.add_argument("--compare", default=None)
    sp.add_argument("--source", default="")
    add_format(sp)
    sp.set_defaults(func=_cmd_growth)

    sp = sub.add_parser("coinv", help="exact coinvariant orders over a window")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--mu", type=int, default=0)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n-range", required=True, dest="n_range")
    add_format(sp)
    sp.set_defaults(func=_cmd_coinv)

    sp = sub.add_parser("ingest", help="load a curve CSV")
    sp.add_argument("--path", required=True)
    add_format(sp)
    sp.set_defaults(func=_cmd_ingest)

    sp = sub.add_parser("cache", help="compute and persist traces of Frobenius")
    sp.add_argument("--curve", required=True)
    sp.add_argument("--bound", type=int, required=True)
    add_format(sp)
    sp.set_defaults(func=_cmd_cache)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"iwk: error: {e}", file=sys.stderr)
        return 1
    except BudgetExceeded as e:
        print(f"iwk: budget exceeded: {e}", file=sys.stderr)
        return 1
    except IwkError as e:
        print(f"iwk: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
