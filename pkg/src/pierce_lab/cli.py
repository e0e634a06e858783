"""Command-line front end: ``pierce-lab <command> [options]``.

Every run prints its resolved configuration first, and identical
configurations produce byte-identical output.  Exit codes: 0 when every
report passes, 1 on any FAIL, 2 on usage errors, 3 when something is
INDETERMINATE and ``--strict`` is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import __version__
from .certify import e_bounds
from .dimension import DEFAULT_BUDGET, BudgetExhausted, cover_count, cover_point, fit_slope, parse_predicate
from .expansion import (
    INFINITY,
    DigitWord,
    digit_expand,
    expand_trace,
    fundamental_interval,
    is_realizable,
    parse_rational,
    phi_eval,
)
from .generators import AdmissibleGenerator, parse_generator
from .verify import (
    SCHEMA,
    Report,
    Verdict,
    check_constants,
    check_trace_limit,
    dimension_lower_bound,
    exceptional_trace,
    holder_sweep,
    jsonable,
    lln_trace,
    mc_lln_experiment,
    sandwich_sweep,
    shallit_statistic,
    to_decimal,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INDETERMINATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """``"4"``, ``"2,4,8"`` or an inclusive range ``"2:64"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            a, b = part.split(":", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return out


def _int_list(text):
    try:
        return parse_int_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _fraction(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


# -- output ---------------------------------------------------------------------

class Output:
    """Collects one run's header, reports and rows, then renders a format."""

    def __init__(self, fmt: str, config: dict):
        self.fmt = fmt
        self.config = config
        self.reports: list[Report] = []
        self.lines: list[str] = []
        self.table: tuple[list[str], list[list]] | None = None
        self.extra: dict = {}

    def render(self) -> str:
        if self.fmt == "json":
            doc = {"schema": SCHEMA, "config": jsonable(self.config)}
            if self.reports:
                doc["reports"] = [r.to_dict() for r in self.reports]
                doc["summary"] = summarize(self.reports)
            if self.table:
                head, rows = self.table
                doc["rows"] = [dict(zip(head, jsonable(r))) for r in rows]
            doc.update(jsonable(self.extra))
            return json.dumps(doc, indent=2, sort_keys=False) + "\n"
        header = "".join(f"# {k}: {_flat(v)}\n" for k, v in jsonable(self.config).items())
        header = f"# schema: {SCHEMA}\n" + header
        if self.fmt == "csv":
            header = header.replace("\n", "\r\n")
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\r\n")
            if self.table:
                head, rows = self.table
                writer.writerow(head)
                writer.writerows([[_flat(v) for v in jsonable(r)] for r in rows])
            elif self.reports:
                writer.writerow(["claim", "verdict", "depth", "inputs", "values", "notes"])
                for r in self.reports:
                    d = r.to_dict()
                    writer.writerow([d["claim"], d["verdict"], _flat(d["depth"]),
                                     _flat(d["inputs"]), _flat(d["values"]), d["notes"]])
            else:
                writer.writerow(["key", "value"])
                for k, v in jsonable(self.extra).items():
                    writer.writerow([k, _flat(v)])
            return header + buf.getvalue()
        body = list(self.lines)
        if self.table and not body:
            head, rows = self.table
            body.append("\t".join(head))
            body.extend("\t".join(_flat(v) for v in jsonable(r)) for r in rows)
        for r in self.reports:
            body.append(_report_line(r))
        if self.reports:
            s = summarize(self.reports)
            body.append(f"summary: {s['PASS']} PASS, {s['FAIL']} FAIL, {s['INDETERMINATE']} INDETERMINATE")
        return header + "".join(line + "\n" for line in body)


def _flat(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def _report_line(r: Report) -> str:
    d = r.to_dict()
    keys = [k for k in ("pair", "M") if k in d["inputs"]]
    tag = " ".join(f"{k}={d['inputs'][k]}" for k in keys)
    shown = {k: v for k, v in d["values"].items() if not isinstance(v, (dict, list))}
    vals = " ".join(f"{k}={_flat(v)}" for k, v in shown.items())
    line = f"{d['claim']} {tag} {d['verdict']} {vals}".replace("  ", " ")
    if d["notes"]:
        line += f" ({d['notes']})"
    return line


def summarize(reports) -> dict:
    counts = {v.value: 0 for v in Verdict}
    for r in reports:
        counts[r.verdict.value] += 1
    return counts


def exit_code(reports, strict: bool, incomplete: bool = False) -> int:
    verdicts = {r.verdict for r in reports}
    if Verdict.FAIL in verdicts:
        return EXIT_FAIL
    if strict and (Verdict.INDETERMINATE in verdicts or incomplete):
        return EXIT_INDETERMINATE
    return EXIT_OK


# -- commands -------------------------------------------------------------------

def cmd_expand(args, out: Output) -> int:
    x = parse_rational(args.x)
    word = digit_expand(x, max_depth=args.depth)
    out.extra = {"x": x, "digits": word}
    out.lines.append(str(word) if word.digits or word.is_terminated else "")
    if args.trace:
        rows = [[k, "inf" if d == INFINITY else d, str(r)] for k, d, r in expand_trace(x, args.depth)]
        out.table = (["k", "digit", "remainder"], rows)
        out.lines.append("k\tdigit\tremainder")
        out.lines.extend("\t".join(map(str, r)) for r in rows)
    return EXIT_OK


def cmd_phi(args, out: Output) -> int:
    word = DigitWord.parse(args.word)
    if not word.is_terminated:
        word = DigitWord.terminated(word.digits)
    value = phi_eval(word)
    info = {"word": word, "phi": value, "realizable": is_realizable(word)}
    if word.digits:
        info["interval"] = str(fundamental_interval(word))
    out.extra = info
    out.lines.extend(f"{k}: {_flat(v)}" for k, v in jsonable(info).items())
    return EXIT_OK


def _verify_reports(args) -> list[Report]:
    sub = args.claim
    if sub == "constants":
        reports = []
        for M in args.M:
            r = check_constants(M)
            r.values["dimension_lower_bound"] = dimension_lower_bound(M)
            reports.append(r)
        return reports
    if sub == "sandwich":
        return sandwich_sweep(args.pairs, args.seed, precision_bits=args.precision_bits)
    if sub == "holder":
        reports = []
        for M in args.M:
            reports.extend(holder_sweep(M, args.pairs, args.seed, precision_bits=args.precision_bits))
        return reports
    gen = parse_generator(args.gen)
    if sub == "lln":
        trace = lln_trace(gen, args.depth, args.places)
        return [check_trace_limit(trace, 1, args.tol, "lln", {"gen": gen.spec, "depth": args.depth})]
    if sub == "exceptional":
        if not isinstance(gen, AdmissibleGenerator):
            raise UsageError(f"exceptional needs an admissible generator, got {gen.spec}")
        reports = []
        for M in args.M:
            trace = exceptional_trace(gen, M, args.depth, args.places)
            reports.append(check_trace_limit(trace, Fraction(M, M + 1), args.tol, "exceptional",
                                             {"gen": gen.spec, "M": M, "depth": args.depth}))
        return reports
    raise UsageError(f"unknown claim {sub}")


def cmd_verify(args, out: Output) -> int:
    reports = _verify_reports(args)
    out.reports = reports
    if args.claim in ("lln", "exceptional") and args.show_trace:
        gen = parse_generator(args.gen)
        M = args.M[0]
        trace = lln_trace(gen, args.depth, args.places) if args.claim == "lln" else \
            exceptional_trace(gen, M, args.depth, args.places)
        rows = [[p.n, _flat(jsonable(p.digit)), str(p.lower), str(p.upper)] for p in trace]
        out.table = (["n", "digit", "root_lower", "root_upper"], rows)
    return exit_code(reports, args.strict)


def cmd_mc(args, out: Output) -> int:
    res = mc_lln_experiment(args.samples, args.bits, args.depth, args.seed, places=args.places, band=args.band)
    # the median of floor-rounded roots is within one ulp below the true median
    median = Fraction(res["median"].value)
    e_lo, e_hi = e_bounds(64)
    lo_ok = median >= (1 - args.band) * e_hi
    hi_ok = median + Fraction(1, 10 ** args.places) <= (1 + args.band) * e_lo
    verdict = Verdict.PASS if lo_ok and hi_ok else Verdict.FAIL
    values = {k: v for k, v in res.items() if k != "values" or args.all_values}
    out.reports = [Report("mc_lln", {"samples": args.samples, "bits": args.bits, "depth": args.depth,
                                     "seed": args.seed}, values, verdict, args.depth,
                          "median within band of e" if verdict is Verdict.PASS else "median outside band")]
    return exit_code(out.reports, args.strict)


def cmd_shallit(args, out: Output) -> int:
    src = args.source
    if "/" in src and "," not in src:
        word = digit_expand(parse_rational(src))
    elif any(c.isalpha() for c in src.replace("inf", "")):
        word = parse_generator(src)
    else:
        word = DigitWord.parse(src)
    enc = shallit_statistic(word, args.N)
    info = {
        "N": args.N,
        "source": word,
        "s_N": enc,
        "s_N_lower": to_decimal(enc.lo, args.places, "floor"),
        "s_N_upper": to_decimal(enc.hi, args.places, "ceiling"),
    }
    out.extra = info
    out.lines.extend(f"{k}: {_flat(v)}" for k, v in jsonable(info).items())
    return EXIT_OK


def cmd_dim(args, out: Output) -> int:
    pred = parse_predicate(args.pred)
    depths = args.depths
    caps = args.cap if len(args.cap) > 1 else args.cap * len(depths)
    if len(caps) != len(depths):
        raise UsageError("give one cap or one cap per depth")
    covers, partial = [], False
    for n, cap in zip(depths, caps):
        try:
            covers.append(cover_count(pred, n, cap, args.budget, exact=False))
        except BudgetExhausted as exc:
            covers.append(exc.partial)
            partial = True
    usable = [c for c in covers if c.complete and c.count > 0]
    slope = fit_slope(usable).slope if len(usable) >= 2 else None
    head = ["depth", "cap", "count", "nodes", "mesh", "mass", "remainder",
            "log_inv_mesh", "log_boxes", "complete", "slope"]
    rows = []
    for c in covers:
        x, y = cover_point(c) if c.count and c.mesh else (None, None)
        rows.append([c.depth, c.cap, c.count, c.nodes, c.mesh, _num(c.mass), _num(c.remainder),
                     _num(x), _num(y), "true" if c.complete else "partial",
                     "" if slope is None else _num(slope)])
    out.table = (head, rows)
    out.extra = {"slope": None if slope is None else _num(slope), "partial": partial}
    if slope is not None:
        out.lines.append(f"slope: {_num(slope)}")
    head_line = "\t".join(head)
    out.lines.append(head_line)
    out.lines.extend("\t".join(_flat(v) for v in jsonable(r)) for r in rows)
    return EXIT_INDETERMINATE if partial and args.strict else EXIT_OK


def _num(v) -> str | None:
    if v is None:
        return None
    return f"{float(v):.12g}"


# -- parser ---------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json", "csv"), default=None,
                   help="output format (default: csv for dim, text otherwise)")
    p.add_argument("--output", "-o", help="write to this file (UTF-8) instead of stdout")
    p.add_argument("--strict", action="store_true", help="exit 3 on INDETERMINATE or partial results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pierce-lab", description="Exact Pierce expansion toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("expand", help="Pierce digits of a rational p/q")
    p.add_argument("x")
    p.add_argument("--depth", type=int, default=10_000)
    p.add_argument("--trace", action="store_true", help="print the step table with remainders")
    _common(p)
    p.set_defaults(func=cmd_expand)

    p = subs.add_parser("phi", help="value and fundamental interval of a digit word like 1,4,9")
    p.add_argument("word")
    _common(p)
    p.set_defaults(func=cmd_phi)

    p = subs.add_parser("verify", help="certify one of the inequalities over a sweep")
    p.add_argument("claim", choices=("holder", "sandwich", "lln", "exceptional", "constants"))
    p.add_argument("--M", type=_int_list, default=None, help="one value, a list 2,4,8 or a range 2:64")
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision-bits", type=int, default=256)
    p.add_argument("--gen", default="exp", help="generator spec for lln/exceptional")
    p.add_argument("--depth", type=int, default=400)
    p.add_argument("--places", type=int, default=12)
    p.add_argument("--tol", type=_fraction, default=Fraction(1, 100), help="relative tolerance, e.g. 1/100")
    p.add_argument("--show-trace", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("mc", help="Monte-Carlo law-of-large-numbers smoke test")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--bits", type=int, default=4096)
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--places", type=int, default=12)
    p.add_argument("--band", type=_fraction, default=Fraction(15, 100))
    p.add_argument("--all-values", action="store_true", help="include every sample in the report")
    _common(p)
    p.set_defaults(func=cmd_mc)

    p = subs.add_parser("shallit", help="leap-year discrepancy statistic s_N")
    p.add_argument("source", help="p/q, a digit word like 1,4,9,inf, or a generator spec")
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--places", type=int, default=8)
    _common(p)
    p.set_defaults(func=cmd_shallit)

    p = subs.add_parser("dim", help="box-count proxy for a digit predicate (CSV)")
    p.add_argument("--pred", required=True, help="e.g. true, window:2,4, logratio:1,2, explicit-prefix:3,8")
    p.add_argument("--depths", type=_int_list, required=True, help="inclusive range like 2:5")
    p.add_argument("--cap", type=_int_list, default=[48], help="digit cap, or one cap per depth")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _common(p)
    p.set_defaults(func=cmd_dim)
    return parser


def resolved_config(args) -> dict:
    skip = {"func", "output"}
    cfg = {"command": args.command, "version": __version__}
    cfg.update({k: v for k, v in sorted(vars(args).items()) if k not in skip and k != "command"})
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "dim" else "text"
    if args.command == "verify" and args.M is None:
        args.M = [2, 4, 8] if args.claim == "holder" else [4] if args.claim == "exceptional" else [2]
    out = Output(args.format, resolved_config(args))
    try:
        code = args.func(args, out)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"pierce-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = out.render()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
