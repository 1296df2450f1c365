"""Command-line front end.

Exit status: 0 when every certificate passes, 1 when any fails, 2 when some
are inconclusive and none fail, 64 on usage errors, 74 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from typing import Any, Callable

from . import __version__
from . import verifier
from .evaluator import FAIL, INCONCLUSIVE, PASS, certify_A_negative, certify_B_positive, scan
from .forms import DEFAULT_ORDER, IDENTITY_ORDER, Forms, registry
from .numerics import DEFAULT_PRECISION
from .qseries import CoeffPoly

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_IO = 64, 74
PRECISION_ENV = "MAGICINEQ_PRECISION"
SCHEMA_VERSION = 1

TSV_SCAN_COLUMNS = (
    "t_num", "t_den",
    "A_status", "A_lo", "A_hi", "A_order", "A_precision",
    "B_status", "B_route", "B_lo", "B_hi", "B_order", "B_precision",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which collides with inconclusive
        raise UsageError(message)


def parse_rational(text: str) -> Fraction:
    """Exact "p/q" or integer string; decimals are rejected."""
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise UsageError(f"t must be an exact fraction p/q, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"malformed rational {text!r}") from None


def _default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--order", type=int, help="truncation order N (>= 16)")
    common.add_argument("--precision", type=int, help=f"bits (>= 64); default 128 or ${PRECISION_ENV}")
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--timings", action="store_true", help="add wall time per check")

    parser = _Parser(prog="magicineq", description="Certify the modular-form inequalities behind the E8 magic function.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--paper-table", action="store_true",
                        help="print the golden coefficient tables and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, help_ in (
        ("identities", "exact q-series identities"),
        ("signs", "coefficient sign checks at finite order"),
        ("cancellations", "exact low-order cancellations in F2 and F3"),
        ("derivative", "closed form of d/dt F1(it)"),
        ("lemmas", "interval certificates for the three bound constants"),
        ("special-values", "series at z = i against closed forms"),
        ("typo", "q^3 coefficient of H against an independent product"),
    ):
        sub.add_parser(name, parents=[common], help=help_)
    ev = sub.add_parser("eval", parents=[common], help="sign certificate at one point t")
    ev.add_argument("--which", choices=("A", "B"), required=True)
    ev.add_argument("--t", required=True, type=str, help='exact rational "p/q"')
    ev.add_argument("--route", choices=("direct", "reciprocal"), help="B only")
    sc = sub.add_parser("scan", parents=[common], help="both certificates on a geometric grid")
    sc.add_argument("--min", dest="t_min", default="1/8")
    sc.add_argument("--max", dest="t_max", default="8")
    sc.add_argument("--steps", type=int, default=129)
    sc.add_argument("--jobs", type=int, default=1)
    return parser


# -- runners ------------------------------------------------------------------

FormsFactory = Callable[[int], Forms]


def _timed(fn: Callable[[], Any], timings: dict[str, float], label: str) -> Any:
    start = time.perf_counter()
    out = fn()
    timings[label] = round(time.perf_counter() - start, 6)
    return out


def run_command(args: argparse.Namespace, forms_factory: FormsFactory) -> dict[str, Any]:
    N, prec = args.order, args.precision
    timings: dict[str, float] = {}
    rows = None
    cmd = args.command
    if cmd == "identities":
        certs = _timed(lambda: verifier.check_identities(N, forms_factory(N)), timings, cmd)
    elif cmd == "signs":
        certs = _timed(lambda: verifier.check_signs(N, forms_factory(N)), timings, cmd)
    elif cmd == "cancellations":
        certs = [_timed(lambda: verifier.check_cancellations(forms_factory(N)), timings, cmd)]
    elif cmd == "derivative":
        certs = [_timed(lambda: verifier.check_F1_derivative(N, forms_factory(N)), timings, cmd)]
    elif cmd == "lemmas":
        certs = _timed(lambda: verifier.check_lemma_constants(prec, forms_factory(N)), timings, cmd)
        certs.append(_timed(
            lambda: verifier.check_quadratic_positivity(max(64, prec)), timings, "quadratic"))
    elif cmd == "special-values":
        certs = _timed(lambda: verifier.check_special_values(N, prec, forms_factory(N)), timings, cmd)
    elif cmd == "typo":
        certs = [_timed(lambda: verifier.check_H_typo(forms_factory(N)), timings, cmd)]
    elif cmd == "eval":
        t = parse_rational(args.t)
        if t <= 0:
            raise UsageError("t must be positive")
        if args.which == "A":
            if args.route:
                raise UsageError("--route applies to B only")
            c = _timed(lambda: certify_A_negative(t, N, prec, forms_factory), timings, cmd)
        else:
            c = _timed(lambda: certify_B_positive(t, N, prec, forms_factory, args.route),
                       timings, cmd)
        certs = [c]
    elif cmd == "scan":
        t_min, t_max = parse_rational(args.t_min), parse_rational(args.t_max)
        if not 0 < t_min <= t_max:
            raise UsageError("need 0 < min <= max")
        if args.steps < 1 or (args.steps > 1 and t_min == t_max):
            raise UsageError("steps must be >= 1 and min < max when steps > 1")
        if args.jobs < 1:
            raise UsageError("jobs must be >= 1")
        # a single point only uses t_min; the grid still wants t_min < t_max
        grid_max = t_max if t_max > t_min else t_min * 2
        report = _timed(lambda: scan(t_min, grid_max, args.steps, N, prec, args.jobs), timings, cmd)
        certs, rows = [], []
        for r in report.rows:
            certs += [r.A, r.B]
            rows.append(_scan_row(r))
    else:
        raise UsageError("a subcommand is required")

    dicts = [c.to_dict() for c in certs]
    summary = {s: sum(d["status"] == s for d in dicts) for s in (PASS, FAIL, INCONCLUSIVE)}
    out: dict[str, Any] = {
        "tool": "magicineq",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": cmd,
        "config": {"order": N, "precision": prec, "format": args.format},
        "certificates": dicts,
        "summary": summary,
    }
    if cmd == "scan":
        out["config"].update(min=str(t_min), max=str(t_max), steps=args.steps)
        out["rows"] = rows
    if cmd == "eval":
        out["config"].update(which=args.which, t=str(parse_rational(args.t)))
    if args.timings:
        out["timings"] = timings
    return out


def _scan_row(r) -> dict[str, Any]:
    def ends(c):
        return list(c.value.format(17)) if c.value is not None else ["", ""]

    a_lo, a_hi = ends(r.A)
    b_lo, b_hi = ends(r.B)
    return {
        "t_num": r.t.numerator, "t_den": r.t.denominator,
        "A_status": r.A.status, "A_lo": a_lo, "A_hi": a_hi,
        "A_order": r.A.order, "A_precision": r.A.precision,
        "B_status": r.B.status, "B_route": r.B.route, "B_lo": b_lo, "B_hi": b_hi,
        "B_order": r.B.order, "B_precision": r.B.precision,
    }


def exit_code(summary: dict[str, int]) -> int:
    if summary[FAIL]:
        return EXIT_FAIL
    if summary[INCONCLUSIVE]:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -- rendering ------------------------------------------------------------------

def render(report: dict[str, Any]) -> str:
    if report["config"]["format"] == "json":
        return json.dumps(report, indent=2) + "\n"
    if report["command"] == "scan":
        lines = ["\t".join(TSV_SCAN_COLUMNS)]
        lines += ["\t".join(str(row[c]) for c in TSV_SCAN_COLUMNS) for row in report["rows"]]
    else:
        lines = ["check_id\tstatus\tevidence"]
        lines += [
            f"{c['check_id']}\t{c['status']}\t{json.dumps(c['evidence'], separators=(',', ':'))}"
            for c in report["certificates"]
        ]
    return "\n".join(lines) + "\n"


def _z_notation(c: CoeffPoly) -> str:
    """p^i v^j with v = i z, so v^2 = -z^2."""
    parts = []
    for (i, j), coef in sorted(c.terms.items(), reverse=True):
        if j == 2:
            coef = -coef
        mono = "".join([{0: "", 1: "pi", 2: "pi^2"}[i], {0: "", 1: " i z", 2: " z^2"}[j]])
        parts.append(f"{coef}{'*' + mono.strip() if mono else ''}")
    return " + ".join(parts).replace("+ -", "- ") or "0"


def golden_tables(forms_factory: FormsFactory = registry) -> str:
    fm = forms_factory(16)
    seq = fm.sequences()
    out = []

    def block(title: str, items) -> None:
        out.append(title)
        out.extend(f"  q^{n}: {v}" for n, v in items)

    block("f", [(n, _z_notation(c)) for n, c in fm["F"].nonzero()][:3])
    block("g", [(n, c.constant()) for n, c in fm["G"].nonzero()][:3])
    block("f~", [(n, _z_notation(fm["F_TILDE"].coeff(n))) for n in (0, 2, 4, 6)])
    block("g~", [(n, c.constant()) for n, c in fm["G_TILDE"].nonzero()][:5])
    out.append("sequences")
    out.append(f"  alpha_2 = {seq.alpha[2]}, beta_2 = {seq.beta[2]}, "
               f"delta_1 = {seq.delta[1]}, delta_2 = {seq.delta[2]}")
    h = fm["H_FN"]
    out.append("H")
    out.append(f"  q^1: {h.coeff(1).constant()}  q^3: {h.coeff(3).constant()} "
               f"(printed elsewhere as {verifier.PRINTED_H_Q3})")
    return "\n".join(out) + "\n"


def main(argv: list[str] | None = None, forms_factory: FormsFactory = registry) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.paper_table:
            sys.stdout.write(golden_tables(forms_factory))
            return EXIT_OK
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.order is None:
            args.order = IDENTITY_ORDER if args.command == "identities" else DEFAULT_ORDER
        if args.precision is None:
            args.precision = _default_precision()
        if args.order < 16:
            raise UsageError("--order must be >= 16")
        if args.precision < 64:
            raise UsageError("--precision must be >= 64")
        report = run_command(args, forms_factory)
    except UsageError as exc:
        print(f"magicineq: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report)
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"magicineq: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return exit_code(report["summary"])


if __name__ == "__main__":
    raise SystemExit(main())
