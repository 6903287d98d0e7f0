"""Command-line front end.

Reports are ``key=value`` lines in a fixed order (``--format json`` emits the
same keys as one object).  Exit status: 0 success, 1 when a verification
finds the property false, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import adversary as adv
from . import core, extractor, oracle, tables
from .errors import KextractError, UndefinedComplexity

VERBS = [
    "encode", "decode", "binom",
    "params check", "params derive",
    "oracle gen", "oracle c", "oracle dep", "oracle profile", "oracle soi",
    "table gen", "table verify", "table smallest", "table montecarlo",
    "extract", "badcols", "audit",
    "grid gen",
    "adversary popular", "adversary witness1", "adversary witness2",
    "adversary range", "adversary frequent", "adversary greedy",
    "adversary minentropy", "adversary amplify",
    "dist minentropy",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class PropertyFailed(Exception):
    """Carries a report whose verdict is negative (exit status 1)."""

    def __init__(self, report):
        self.report = report


def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (frozenset, set)):
        return ",".join(sorted(core.format_bits(s) if isinstance(s, str) else str(s) for s in v)) or "empty"
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v) or "empty"
    if isinstance(v, str) and v == "":
        return "."
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, int)) or v is None:
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return _fmt_value(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({k: _json_value(v) for k, v in report.items()}) + "\n"
    return "".join(f"{k}={_fmt_value(v)}\n" for k, v in report.items())


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise KextractError(f"cannot read {path}: {exc.strerror}") from None


def _write_or_emit(text: str, out, report: dict) -> dict:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        report["out"] = out
    else:
        report["content"] = text.rstrip("\n").replace("\n", " / ")
    return report


def _bits(token: str) -> str:
    try:
        return core.parse_bits(token)
    except KextractError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _fraction(token: str) -> Fraction:
    try:
        v = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {token!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _system(path) -> oracle.DescriptionSystem:
    return oracle.load_system(Path(path).read_bytes() if Path(path).exists() else _read(path),
                              name=Path(path).name)


def _table(path) -> tables.ColorTable:
    return tables.ColorTable.loads(_read(path))


def _grid(path) -> adv.FunctionGrid:
    return adv.FunctionGrid.loads(_read(path))


def _family(paths) -> adv.AdvisedFamily:
    K = len(paths)
    k = (K + 1).bit_length() - 2
    if (1 << (k + 1)) - 1 != K:
        raise KextractError(f"a family needs 2^(k+1)-1 functions (1, 3, 7, ...), got {K}")
    return adv.AdvisedFamily(k, [_grid(p) for p in paths])


# -- handlers ---------------------------------------------------------------

def cmd_encode(a):
    s = core.encode_pair(a.x1, a.x2)
    return {"encoding": s, "length": len(s)}


def cmd_decode(a):
    x1, x2 = core.decode_pair(a.s)
    return {"x1": x1, "x2": x2}


def cmd_binom(a):
    b = core.binom_sum(a.n, a.m)
    rep = {"b": b, "log2_b": math.log2(b)}
    if 1 <= a.m < a.n:
        lo, hi = core.binom_sum_log_bounds(a.n, a.m)
        rep.update(lower=lo, upper=hi, bounds_ok=lo < math.log2(b) < hi)
    return rep


def cmd_params_check(a):
    p = core.RainbowParams.from_sizes(a.bign, a.bigm, a.s, a.d, m=a.m)
    r = core.rainbow_feasible(p)
    rep = {"feasible": r.feasible, "margin": r.margin, "rhs": r.rhs, "borderline": r.borderline}
    if not r.feasible:
        raise PropertyFailed(rep)
    return rep


def cmd_params_derive(a):
    p = extractor.derive_params(a.n, a.sn, a.alpha, a.constc, a.m, a.mode,
                                s=a.s, S=a.bigs, D=a.d, t=a.t)
    return {"mode": p.mode, "s": p.s, "S": p.S, "t": p.t, "D": p.D,
            "log2_S": p.s, "log2_D": int(p.D).bit_length() - 1}


def cmd_oracle_gen(a):
    conds = None
    if a.cond_len is not None:
        conds = list(core.strings_upto(a.cond_len))
    if a.kind == "literal":
        s = oracle.literal_system(a.max_len, conditions=conds, copy=not a.no_copy)
    else:
        s = oracle.random_system(a.max_len, a.seed, conditions=conds,
                                 max_program=a.max_program, coverage=a.coverage)
    return _write_or_emit(s.dumps(), a.out, {"kind": a.kind, "entries": len(s)})


def cmd_oracle_c(a):
    s = _system(a.system)
    return {"x": a.x, "cond": a.cond, "complexity": s.complexity(a.x, a.cond)}


def cmd_oracle_dep(a):
    r = oracle.dep(_system(a.system), a.x, a.y)
    return {"c_x": r.c_x, "c_y": r.c_y, "c_x_given_y": r.c_x_given_y,
            "c_y_given_x": r.c_y_given_x, "dep": r.dep}


def cmd_oracle_profile(a):
    ps = oracle.profile_set(_system(a.system), a.t, a.cond, a.len)
    return {"size": len(ps), "bound": (1 << (a.t + 1)) - 1, "set": frozenset(ps)}


def cmd_oracle_soi(a):
    r = oracle.soi_slack(_system(a.system), a.x, a.y, a.const)
    return {"slack_a": r.a, "slack_b": r.b, "slack_c": r.c}


def cmd_table_gen(a):
    T = tables.random_table(a.n, a.m, a.seed)
    return _write_or_emit(T.dumps(), a.out, {"n": a.n, "m": a.m, "seed": a.seed})


def cmd_table_verify(a):
    rep = tables.verify_rainbow(_table(a.table), a.s, a.d, mode=a.mode).as_dict()
    if not rep["balanced"]:
        raise PropertyFailed(rep)
    return rep


def cmd_table_smallest(a):
    p = core.RainbowParams(a.n, a.m, a.s, a.d)
    T = tables.smallest_rainbow(p, method=a.method)
    return _write_or_emit(T.dumps(), a.out, {"n": a.n, "m": a.m})


def cmd_table_montecarlo(a):
    p = core.RainbowParams(a.n, a.m, a.s, a.d)
    try:
        r = tables.monte_carlo_rainbow(p, a.tries, a.seed)
    except tables.ExhaustedTries as exc:
        raise PropertyFailed({"found": False, "tries": exc.tries})
    rep = {"found": True, "tries": r.tries, "worst_count": r.report.worst_count,
           "vacuous": r.report.vacuous}
    # tables here are large; written only on request
    if a.out:
        Path(a.out).write_text(r.table.dumps(), encoding="utf-8")
        rep["out"] = a.out
    return rep


def cmd_extract(a):
    return {"z": extractor.extract(_table(a.table), a.x, a.y)}


def cmd_badcols(a):
    T = _table(a.table)
    r = extractor.bad_column_report(T, _system(a.system), a.t1, a.t)
    return {"bad_count": len(r.columns), "bad_columns": sorted(r.columns),
            "rows": sorted(r.rows), "padded_size": r.padded_size, "threshold": r.threshold}


def cmd_audit(a):
    T = _table(a.table)
    p = extractor.derive_params(T.n, a.sn, a.alpha, a.constc, T.m, a.mode,
                                s=a.s, S=a.bigs, D=a.d, t=a.t)
    return extractor.audit_extraction(_system(a.system), T, a.x, a.y, p).as_dict()


def cmd_grid_gen(a):
    g = adv.random_grid(a.arity, a.n, a.m, a.seed, a.undefined)
    return _write_or_emit(g.dumps(), a.out, {"arity": a.arity, "n": a.n, "m": a.m, "seed": a.seed})


def cmd_popular(a):
    f = _grid(a.f)
    z, count = adv.most_popular_output(f)
    M = 1 << f.m
    floor = -(-(1 << (f.arity * f.n)) // M)
    return {"z": z, "count": count, "pigeonhole_min": floor, "ok": count >= floor}


def cmd_witness1(a):
    w = adv.one_source_witness(_grid(a.f), _system(a.system))
    return {"x": w.x, "z": w.z, "count": w.count, "c_x": w.c_x, "undefined_flag": w.undefined}


def cmd_witness2(a):
    return adv.two_source_witness(_grid(a.f), a.alpha, _system(a.system)).as_dict()


def cmd_range(a):
    return {"range": adv.range_of(_family(a.family), a.x)}


def cmd_frequent(a):
    fam = _family(a.family)
    s, count = adv.frequent_range(fam)
    b = adv.range_bound_b(fam)
    return {"set": s, "size": len(s), "count": count, "b": b,
            "threshold": Fraction(1 << fam.n, b), "ok": count * b >= 1 << fam.n}


def cmd_greedy(a):
    fam = _family(a.family)
    (s, count), tr = adv.greedy_range_cover(fam, trace=True)
    bound = adv.greedy_bound(fam)
    return {"set": s, "size": len(s), "count": count, "order": list(tr.chosen),
            "stopped": tr.stopped, "bound": bound, "ok": count >= bound}


def cmd_minentropy(a):
    joint, r = adv.min_entropy_adversary(_grid(a.f), a.alpha)
    rep = r.as_dict()
    if a.out:
        Path(a.out).write_text(joint.dumps(), encoding="utf-8")
        rep["out"] = a.out
    if not r.ok:
        raise PropertyFailed(rep)
    return rep


def cmd_amplify(a):
    task = adv.Task(alpha=a.alpha, beta=a.beta, s=a.s, l=a.l, a=a.a)
    r = adv.amplification_harness(_grid(a.f1), _grid(a.f2), _table(a.table),
                                  _system(a.system), task)
    return r.as_dict()


def cmd_dist_minentropy(a):
    d = adv.FiniteDistribution.loads(_read(a.dist))
    r = adv.min_entropy(d)
    return {"p_max": r.p_max, "h_infinity": r.h_infinity, "support": len(d.support)}


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kextract",
                     description="Desk-scale Kolmogorov extraction workbench.",
                     epilog="verbs: " + "; ".join(VERBS),
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--format", choices=["text", "json"], default="text")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def leaf(container, name, handler, help):
        p = container.add_parser(name, help=help)
        p.set_defaults(handler=handler)
        return p

    def group(name, help):
        g = sub.add_parser(name, help=help)
        return g.add_subparsers(dest="action", required=True, parser_class=_Parser)

    p = leaf(sub, "encode", cmd_encode, "self-delimiting pair encoding")
    p.add_argument("--x1", type=_bits, required=True)
    p.add_argument("--x2", type=_bits, required=True)
    p = leaf(sub, "decode", cmd_decode, "decode a pair encoding")
    p.add_argument("--s", type=_bits, required=True)
    p = leaf(sub, "binom", cmd_binom, "b(n, m) and its log bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    g = group("params", "parameter arithmetic")
    p = leaf(g, "check", cmd_params_check, "existence condition for balanced tables")
    p.add_argument("--bign", type=int, required=True)
    p.add_argument("--bigm", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d", type=_fraction, required=True)
    p = leaf(g, "derive", cmd_params_derive, "extractor parameters")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_extractor_flags(p)

    g = group("oracle", "description systems")
    p = leaf(g, "gen", cmd_oracle_gen, "write a literal or seeded random system")
    p.add_argument("--kind", choices=["literal", "random"], default="literal")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--cond-len", type=int, help="conditions: all strings up to this length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-program", type=int)
    p.add_argument("--coverage", type=float, default=1.0)
    p.add_argument("--no-copy", action="store_true")
    p.add_argument("--out")
    p = leaf(g, "c", cmd_oracle_c, "complexity of x given cond")
    p.add_argument("system")
    p.add_argument("--x", type=_bits, required=True)
    p.add_argument("--cond", type=_bits, default=".")
    p = leaf(g, "dep", cmd_oracle_dep, "dependency of x and y")
    p.add_argument("system")
    p.add_argument("--x", type=_bits, required=True)
    p.add_argument("--y", type=_bits, required=True)
    p = leaf(g, "profile", cmd_oracle_profile, "strings of a length with complexity <= t")
    p.add_argument("system")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--cond", type=_bits, default=".")
    p.add_argument("--len", type=int, required=True)
    p = leaf(g, "soi", cmd_oracle_soi, "symmetry-of-information slacks")
    p.add_argument("system")
    p.add_argument("--x", type=_bits, required=True)
    p.add_argument("--y", type=_bits, required=True)
    p.add_argument("--const", type=float, default=0.0)

    g = group("table", "color tables")
    p = leaf(g, "gen", cmd_table_gen, "seeded random table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p = leaf(g, "verify", cmd_table_verify, "rainbow balance check")
    p.add_argument("table")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d", type=_fraction, required=True)
    p.add_argument("--mode", choices=["decomposed", "exhaustive"], default="decomposed")
    p = leaf(g, "smallest", cmd_table_smallest, "canonically first balanced table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d", type=_fraction, required=True)
    p.add_argument("--method", choices=["search", "brute"], default="search")
    p.add_argument("--out")
    p = leaf(g, "montecarlo", cmd_table_montecarlo, "random tables until one verifies")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d", type=_fraction, required=True)
    p.add_argument("--tries", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = leaf(sub, "extract", cmd_extract, "E(x, y) = T(x, y)")
    p.add_argument("table")
    p.add_argument("--x", type=_bits, required=True)
    p.add_argument("--y", type=_bits, required=True)
    p = leaf(sub, "badcols", cmd_badcols, "bad columns of a table for a system")
    p.add_argument("table")
    p.add_argument("--system", required=True)
    p.add_argument("--t1", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p = leaf(sub, "audit", cmd_audit, "measure extractor hypotheses and conclusions")
    p.add_argument("table")
    p.add_argument("--system", required=True)
    p.add_argument("--x", type=_bits, required=True)
    p.add_argument("--y", type=_bits, required=True)
    _add_extractor_flags(p)

    g = group("grid", "function grids")
    p = leaf(g, "gen", cmd_grid_gen, "seeded random function grid")
    p.add_argument("--arity", type=int, choices=[1, 2], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--undefined", type=float, default=0.0)
    p.add_argument("--out")

    g = group("adversary", "lower-bound constructions")
    p = leaf(g, "popular", cmd_popular, "most popular output")
    p.add_argument("--f", required=True)
    p = leaf(g, "witness1", cmd_witness1, "one-source witness")
    p.add_argument("--f", required=True)
    p.add_argument("--system", required=True)
    p = leaf(g, "witness2", cmd_witness2, "two-source witness")
    p.add_argument("--f", required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--system", required=True)
    for name, handler, help in (("range", cmd_range, "Range(x) of a family"),
                                ("frequent", cmd_frequent, "largest frequent Range"),
                                ("greedy", cmd_greedy, "greedy Range cover")):
        p = leaf(g, name, handler, help)
        p.add_argument("--family", nargs="+", required=True, metavar="GRID")
        if name == "range":
            p.add_argument("--x", type=_bits, required=True)
    p = leaf(g, "minentropy", cmd_minentropy, "min-entropy adversary distribution")
    p.add_argument("--f", required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--out")
    p = leaf(g, "amplify", cmd_amplify, "dependency-reduction harness")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--a", type=float, default=8.0)

    g = group("dist", "finite distributions")
    p = leaf(g, "minentropy", cmd_dist_minentropy, "min-entropy of a distribution file")
    p.add_argument("dist")
    return parser


def _add_extractor_flags(p):
    p.add_argument("--mode", choices=["paper", "desk"], default="paper")
    p.add_argument("--sn", type=float)
    p.add_argument("--alpha", type=int)
    p.add_argument("--constc", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--bigs", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--t", type=int)


def run(argv) -> tuple[int, str]:
    """Run a command; returns (exit status, report text). Diagnostics go to stderr."""
    parser = build_parser()
    buf = io.StringIO()
    try:
        with contextlib.redirect_stdout(buf):
            args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, ""
    except SystemExit as exc:  # --help
        return int(exc.code or 0), buf.getvalue()
    try:
        report = args.handler(args)
        code = 0
    except PropertyFailed as exc:
        report, code = exc.report, 1
    except UndefinedComplexity as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, ""
    except KextractError as exc:
        print(f"error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2, ""
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, ""
    return code, render(report, args.format)


def main(argv=None) -> int:
    code, text = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
