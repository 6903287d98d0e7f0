"""Constructions witnessing the lower bounds: popular outputs, Range covers,
min-entropy adversaries, and the dependency-reduction harness.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from .core import all_strings, binom_sum, format_bits, parse_bits, to_bits, to_index
from .errors import KextractError, LengthMismatch, ParseError, PartialFunctionError
from .extractor import extract
from .oracle import BOTTOM, DescriptionSystem
from .tables import ColorTable


class FunctionGrid:
    """A (possibly partial) function on n-bit inputs with m-bit outputs.

    Arity-2 grids are stored row-major: entry ``x * 2^n + y`` holds f(x, y).
    Undefined entries are ``None``.
    """

    def __init__(self, arity: int, n: int, m: int, entries: Iterable[Optional[str]]):
        if arity not in (1, 2):
            raise KextractError(f"arity must be 1 or 2, got {arity}")
        entries = tuple(entries)
        size = 1 << (arity * n)
        if len(entries) != size:
            raise KextractError(f"grid needs {size} entries, got {len(entries)}")
        for e in entries:
            if e is not None and (len(e) != m or any(c not in "01" for c in e)):
                raise KextractError(f"output {e!r} is not an {m}-bit string")
        self.arity, self.n, self.m = arity, n, m
        self.entries = entries

    @classmethod
    def from_function(cls, arity: int, n: int, m: int, fn: Callable) -> "FunctionGrid":
        if arity == 1:
            return cls(1, n, m, (fn(x) for x in all_strings(n)))
        return cls(2, n, m, (fn(x, y) for x in all_strings(n) for y in all_strings(n)))

    @property
    def total(self) -> bool:
        return None not in self.entries

    def require_total(self):
        if not self.total:
            raise PartialFunctionError("function is undefined on some inputs")

    def inputs(self):
        """Domain in lexicographic (row-major) order, matching ``entries``."""
        if self.arity == 1:
            return list(all_strings(self.n))
        return [(x, y) for x in all_strings(self.n) for y in all_strings(self.n)]

    def __call__(self, *args) -> Optional[str]:
        if len(args) != self.arity or any(len(a) != self.n for a in args):
            raise LengthMismatch(f"expected {self.arity} inputs of length {self.n}")
        idx = 0
        for a in args:
            idx = (idx << self.n) | to_index(a)
        return self.entries[idx]

    def map_outputs(self, fn, m: int) -> "FunctionGrid":
        return FunctionGrid(self.arity, self.n, m,
                            (None if e is None else fn(e) for e in self.entries))

    def __eq__(self, other):
        return (isinstance(other, FunctionGrid)
                and (self.arity, self.n, self.m, self.entries)
                == (other.arity, other.n, other.m, other.entries))

    def __repr__(self):
        return f"FunctionGrid(arity={self.arity}, n={self.n}, m={self.m})"

    def dumps(self) -> str:
        per_line = 1 << self.n
        toks = ["?" if e is None else format_bits(e) for e in self.entries]
        lines = [f"func arity={self.arity} n={self.n} m={self.m}"]
        lines += [" ".join(toks[i:i + per_line]) for i in range(0, len(toks), per_line)]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "FunctionGrid":
        lines = text.splitlines()
        header = lines[0].split() if lines else []
        try:
            if header[0] != "func" or len(header) != 4:
                raise ValueError
            fields = dict(tok.split("=", 1) for tok in header[1:])
            arity, n, m = int(fields["arity"]), int(fields["n"]), int(fields["m"])
        except (ValueError, KeyError, IndexError):
            raise ParseError("expected header 'func arity=<1|2> n=<n> m=<m>'", 1) from None
        entries = []
        for lineno, line in enumerate(lines[1:], start=2):
            for tok in line.split():
                if tok == "?":
                    entries.append(None)
                    continue
                try:
                    e = parse_bits(tok)
                except KextractError as exc:
                    raise ParseError(str(exc), lineno) from None
                if len(e) != m:
                    raise ParseError(f"output {tok!r} is not {m} bits", lineno)
                entries.append(e)
        try:
            return cls(arity, n, m, entries)
        except KextractError as exc:
            raise ParseError(str(exc)) from None


def random_grid(arity: int, n: int, m: int, seed: int, undefined_rate: float = 0.0) -> FunctionGrid:
    """Uniform outputs from ``numpy.random.default_rng(seed)``; each entry is
    left undefined with probability ``undefined_rate``."""
    rng = np.random.default_rng(seed)
    size = 1 << (arity * n)
    values = rng.integers(0, 1 << m, size=size)
    holes = rng.random(size) < undefined_rate if undefined_rate > 0 else np.zeros(size, bool)
    return FunctionGrid(arity, n, m, (None if h else to_bits(int(v), m)
                                      for v, h in zip(values, holes)))


class AdvisedFamily:
    """The ``K = 2^(k+1) - 1`` single-argument functions reachable with k advice bits."""

    def __init__(self, k: int, functions: Iterable[FunctionGrid]):
        functions = list(functions)
        K = (1 << (k + 1)) - 1
        if len(functions) != K:
            raise KextractError(f"advice length {k} needs exactly {K} functions, got {len(functions)}")
        if not functions:
            raise KextractError("empty family")
        n, m = functions[0].n, functions[0].m
        for f in functions:
            if f.arity != 1 or (f.n, f.m) != (n, m):
                raise KextractError("family functions must share arity 1, n and m")
        self.k, self.functions, self.n, self.m = k, functions, n, m

    @property
    def K(self) -> int:
        return len(self.functions)

    @classmethod
    def random(cls, k: int, n: int, m: int, seed: int, undefined_rate: float = 0.0):
        seeds = np.random.SeedSequence(seed).generate_state((1 << (k + 1)) - 1)
        return cls(k, [random_grid(1, n, m, int(s), undefined_rate) for s in seeds])


class Popular(NamedTuple):
    z: str
    count: int


def _popular(values) -> Popular:
    counts = Counter(values)
    z = min(counts, key=lambda v: (-counts[v], v))
    return Popular(z, counts[z])


def most_popular_output(f: FunctionGrid) -> Popular:
    """Output with the most preimages; ties go to the lexicographically smallest."""
    f.require_total()
    return _popular(f.entries)


def _rank(c):
    return -1 if c is BOTTOM else c


@dataclass(frozen=True)
class OneSourceWitness:
    x: str
    z: str
    count: int
    c_x: object
    undefined: bool


def one_source_witness(f: FunctionGrid, sys: DescriptionSystem) -> OneSourceWitness:
    """Most complex preimage of the most popular output (undefined complexity ranks -1)."""
    if f.arity != 1:
        raise KextractError("one-source witness needs an arity-1 function")
    z, count = most_popular_output(f)
    preimage = [x for x, e in zip(f.inputs(), f.entries) if e == z]
    x = min(preimage, key=lambda u: (-_rank(sys.complexity(u)), u))
    c = sys.complexity(x)
    return OneSourceWitness(x, z, count, c, c is BOTTOM)


def range_of(fam: AdvisedFamily, x: str) -> frozenset[str]:
    return frozenset(e for f in fam.functions if (e := f(x)) is not None and len(e) == fam.m)


def _canonical_key(s: frozenset[str]):
    return tuple(sorted(s))


def range_counts(fam: AdvisedFamily) -> Counter:
    return Counter(range_of(fam, x) for x in all_strings(fam.n))


def range_bound_b(fam: AdvisedFamily) -> int:
    """Number of possible Range values, b(M, K); sizes beyond M contribute nothing."""
    M = 1 << fam.m
    return binom_sum(M, min(M, fam.K))


class RangeCover(NamedTuple):
    set: frozenset
    count: int


def frequent_range(fam: AdvisedFamily) -> RangeCover:
    """Largest set equal to ``Range(x)`` for at least ``2^n / b(M, K)`` strings x.

    Ties go to the first set by sorted element list.
    """
    counts = range_counts(fam)
    b = range_bound_b(fam)
    frequent = [s for s, c in counts.items() if c * b >= 1 << fam.n]
    size = max(len(s) for s in frequent)
    best = min((s for s in frequent if len(s) == size), key=_canonical_key)
    return RangeCover(best, counts[best])


@dataclass(frozen=True)
class GreedyTrace:
    chosen: tuple[str, ...]
    marked_sizes: tuple[int, ...]
    stopped: str  # "completed" | "failed"


def greedy_range_cover(fam: AdvisedFamily, trace: bool = False):
    """Greedy marking: iteration i picks the first unchosen m-bit z (lexicographic)
    lying in at least a ``1/(2^m + 1)`` fraction of the Ranges still marked,
    then keeps only those Ranges marked.  Stops after K picks or the first
    iteration with no such z.
    """
    T = (1 << fam.m) + 1
    ranges = {x: range_of(fam, x) for x in all_strings(fam.n)}
    marked = list(ranges)
    chosen: list[str] = []
    sizes = [len(marked)]
    stopped = "completed"
    for _ in range(fam.K):
        pick = None
        for z in all_strings(fam.m):
            if z in chosen:
                continue
            hits = [x for x in marked if z in ranges[x]]
            if len(hits) * T >= len(marked):
                pick = (z, hits)
                break
        if pick is None:
            stopped = "failed"
            break
        chosen.append(pick[0])
        marked = pick[1]
        sizes.append(len(marked))
    result = frozenset(chosen)
    cover = RangeCover(result, sum(1 for r in ranges.values() if r == result))
    if trace:
        return cover, GreedyTrace(tuple(chosen), tuple(sizes), stopped)
    return cover


def greedy_bound(fam: AdvisedFamily) -> Fraction:
    return Fraction(1 << fam.n, ((1 << fam.m) + 1) ** fam.K)


def _lg(v) -> float:
    return math.log2(v) if v > 1 else 0.0


@dataclass(frozen=True)
class TwoSourceWitness:
    x: str
    y: str
    a: str
    preimage_size: int
    c_xy: object
    c_x_given_y: object
    c_y_given_x: object
    c_f: object
    target_conditional: float
    target_output: float
    undefined: bool

    def as_dict(self) -> dict:
        return {
            "x": format_bits(self.x), "y": format_bits(self.y),
            "a": format_bits(self.a), "preimage_size": self.preimage_size,
            "c_xy": str(self.c_xy), "c_x_given_y": str(self.c_x_given_y),
            "c_y_given_x": str(self.c_y_given_x), "c_f": str(self.c_f),
            "target_conditional_min": self.target_conditional,
            "target_output_max": self.target_output,
            "undefined_flag": self.undefined,
        }


def prefix_grid(f: FunctionGrid, alpha: int) -> FunctionGrid:
    if not 0 <= alpha <= f.m:
        raise KextractError(f"alpha must lie in [0, m={f.m}], got {alpha}")
    return f.map_outputs(lambda e: e[:alpha], alpha)


def two_source_witness(f: FunctionGrid, alpha: int, sys: DescriptionSystem) -> TwoSourceWitness:
    """A pair in the largest alpha-prefix class of f, chosen to maximize C(xy) in ``sys``.

    Targets reported alongside: ``n - alpha - 2 log n`` for the conditional
    complexities and ``m - alpha + log n + 2 log alpha`` for C(f(x, y)), both
    without their O(1) terms.
    """
    if f.arity != 2:
        raise KextractError("two-source witness needs an arity-2 function")
    f.require_total()
    g = prefix_grid(f, alpha)
    a, size = _popular(g.entries)
    pairs = [xy for xy, e in zip(f.inputs(), g.entries) if e == a]
    x, y = min(pairs, key=lambda p: (-_rank(sys.complexity(p[0] + p[1])), p))
    c_xy = sys.complexity(x + y)
    return TwoSourceWitness(
        x=x, y=y, a=a, preimage_size=size, c_xy=c_xy,
        c_x_given_y=sys.complexity(x, y), c_y_given_x=sys.complexity(y, x),
        c_f=sys.complexity(f(x, y)),
        target_conditional=f.n - alpha - 2 * _lg(f.n),
        target_output=f.m - alpha + _lg(f.n) + 2 * _lg(alpha),
        undefined=c_xy is BOTTOM,
    )


def _fmt_outcome(o) -> str:
    if isinstance(o, tuple):
        return ",".join(format_bits(p) for p in o)
    return format_bits(o)


class FiniteDistribution:
    """Exact-rational distribution over bitstrings or pairs of bitstrings."""

    def __init__(self, support: dict):
        probs = {}
        for k, p in support.items():
            p = Fraction(p)
            if p <= 0:
                raise KextractError(f"probability of {k!r} must be positive, got {p}")
            probs[k] = p
        if sum(probs.values()) != 1:
            raise KextractError(f"probabilities sum to {sum(probs.values())}, not 1")
        self.support = probs

    @classmethod
    def uniform(cls, outcomes: Iterable) -> "FiniteDistribution":
        outcomes = list(outcomes)
        if len(set(outcomes)) != len(outcomes):
            raise KextractError("uniform distribution over a repeated outcome")
        p = Fraction(1, len(outcomes))
        return cls({o: p for o in outcomes})

    def pushforward(self, fn) -> "FiniteDistribution":
        out: dict = {}
        for k, p in self.support.items():
            key = fn(k)
            out[key] = out.get(key, 0) + p
        return FiniteDistribution(out)

    def marginal(self, i: int) -> "FiniteDistribution":
        return self.pushforward(lambda k: k[i])

    def __getitem__(self, outcome) -> Fraction:
        return self.support.get(outcome, Fraction(0))

    def __eq__(self, other):
        return isinstance(other, FiniteDistribution) and self.support == other.support

    def dumps(self) -> str:
        items = sorted(self.support.items(), key=lambda kv: kv[0])
        return "".join(f"{_fmt_outcome(k)} {p.numerator}/{p.denominator}\n" for k, p in items)

    @classmethod
    def loads(cls, text: str) -> "FiniteDistribution":
        support = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                key_tok, prob_tok = line.split()
                key = (tuple(parse_bits(t) for t in key_tok.split(","))
                       if "," in key_tok else parse_bits(key_tok))
                num, _, den = prob_tok.partition("/")
                p = Fraction(int(num), int(den or 1))
            except (ValueError, KextractError, ZeroDivisionError):
                raise ParseError("expected '<outcome> <num>/<den>'", lineno) from None
            if key in support:
                raise ParseError(f"repeated outcome {key_tok}", lineno)
            support[key] = p
        try:
            return cls(support)
        except KextractError as exc:
            raise ParseError(str(exc)) from None


class MinEntropy(NamedTuple):
    p_max: Fraction
    h_infinity: float


def _neg_log2(p: Fraction) -> float:
    return math.log2(p.denominator) - math.log2(p.numerator)


def min_entropy(d: FiniteDistribution) -> MinEntropy:
    p = max(d.support.values())
    return MinEntropy(p, _neg_log2(p))


@dataclass(frozen=True)
class AdversaryReport:
    n: int
    m: int
    alpha: int
    a: str
    b: str
    support_size: int
    px_max: Fraction
    py_max: Fraction
    joint_max: Fraction
    output_max: Fraction
    pr_designated: Fraction

    @property
    def marginal_bound(self) -> Fraction:
        return Fraction(2) ** (self.alpha - self.n)

    @property
    def joint_target(self) -> Fraction:
        return Fraction(1, 1 << (2 * self.n - self.alpha))

    @property
    def output_bound(self) -> Fraction:
        return Fraction(1, 1 << (self.m - self.alpha))

    @property
    def checks(self) -> dict[str, bool]:
        return {
            "hx_ok": self.px_max <= self.marginal_bound,
            "hy_ok": self.py_max <= self.marginal_bound,
            "hxy_ok": self.joint_max == self.joint_target,
            "hf_ok": self.pr_designated >= self.output_bound,
        }

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        def q(v):
            return f"{v.numerator}/{v.denominator}"
        d = {
            "a": format_bits(self.a), "b": format_bits(self.b),
            "support_size": self.support_size,
            "px_max": q(self.px_max), "py_max": q(self.py_max),
            "marginal_bound": q(self.marginal_bound),
            "joint_max": q(self.joint_max), "joint_target": q(self.joint_target),
            "pr_designated": q(self.pr_designated), "output_max": q(self.output_max),
            "output_bound": q(self.output_bound),
            "h_x": _neg_log2(self.px_max), "h_y": _neg_log2(self.py_max),
            "h_xy": _neg_log2(self.joint_max), "h_f": _neg_log2(self.output_max),
        }
        d.update(self.checks)
        d["ok"] = self.ok
        return d


def min_entropy_adversary(f: FunctionGrid, alpha: int) -> tuple[FiniteDistribution, AdversaryReport]:
    """Joint law uniform on a set B of ``2^(2n - alpha)`` pairs sharing the most
    popular alpha-bit prefix ``a`` of f.

    B takes pairs from the most popular suffix class ``b`` inside the prefix
    class first (lexicographic order), then the remaining pairs of the prefix
    class, so f(X, Y) = ab with probability at least ``2^-(m - alpha)``.
    """
    if f.arity != 2:
        raise KextractError("min-entropy adversary needs an arity-2 function")
    f.require_total()
    n, m = f.n, f.m
    g = prefix_grid(f, alpha)
    a, _ = _popular(g.entries)
    cls_pairs = [(xy, e) for xy, e in zip(f.inputs(), f.entries) if e[:alpha] == a]
    b, _ = _popular(e[alpha:] for _, e in cls_pairs)
    size = 1 << (2 * n - alpha)
    first = [xy for xy, e in cls_pairs if e[alpha:] == b]
    rest = [xy for xy, e in cls_pairs if e[alpha:] != b]
    B = (first + rest)[:size]
    # the prefix class always holds at least 2^(2n - alpha) pairs by pigeonhole
    assert len(B) == size
    joint = FiniteDistribution.uniform(B)
    out = joint.pushforward(lambda xy: f(*xy))
    report = AdversaryReport(
        n=n, m=m, alpha=alpha, a=a, b=b, support_size=len(B),
        px_max=min_entropy(joint.marginal(0)).p_max,
        py_max=min_entropy(joint.marginal(1)).p_max,
        joint_max=min_entropy(joint).p_max,
        output_max=min_entropy(out).p_max,
        pr_designated=out[a + b],
    )
    return joint, report


def compose(f1: FunctionGrid, f2: FunctionGrid, T: ColorTable) -> FunctionGrid:
    """The grid of ``(x, y) -> extract(T, f1(x, y), f2(x, y))``."""
    for f in (f1, f2):
        if f.arity != 2:
            raise KextractError("amplification needs arity-2 functions")
        f.require_total()
    if (f1.n, f1.m) != (f2.n, f2.m):
        raise LengthMismatch("f1 and f2 must share input and output lengths")
    if T.n != f1.m:
        raise LengthMismatch(f"table takes {T.n}-bit inputs but f1, f2 output {f1.m} bits")
    return FunctionGrid(2, f1.n, T.m, (extract(T, u, v) for u, v in zip(f1.entries, f2.entries)))


@dataclass(frozen=True)
class Task:
    alpha: int
    beta: float
    s: float
    l: int
    a: float


def _val(c):
    return None if c is BOTTOM else c


def _fmt(v):
    return "undefined" if v is None else v


@dataclass
class AmplificationReport:
    x: str
    y: str
    u: str
    v: str
    z: str
    values: dict = field(default_factory=dict)
    clauses: dict = field(default_factory=dict)

    @property
    def failing(self) -> list[str]:
        return [k for k, ok in self.clauses.items() if ok is not True]

    def as_dict(self) -> dict:
        d = {"x": format_bits(self.x), "y": format_bits(self.y),
             "u": format_bits(self.u), "v": format_bits(self.v), "z": format_bits(self.z)}
        d.update({k: _fmt(v) for k, v in self.values.items()})
        d.update({f"clause_{k}": _fmt(v) for k, v in self.clauses.items()})
        d["failing"] = ",".join(self.failing) or "none"
        return d


def _dep(sys, p, q):
    vals = [sys.complexity(p), sys.complexity(p, q), sys.complexity(q), sys.complexity(q, p)]
    if BOTTOM in vals:
        return None
    return max(vals[0] - vals[1], vals[2] - vals[3])


def amplification_harness(f1: FunctionGrid, f2: FunctionGrid, T: ColorTable,
                          sys: DescriptionSystem, task: Task) -> AmplificationReport:
    """Compose ``f = E(f1, f2)``, pick the two-source witness (x, y) for f, and
    evaluate every clause of the dependency-reduction task and both bound
    chains in ``sys``.  Clauses that cannot be evaluated are ``None``.
    """
    if task.l != f1.m:
        raise LengthMismatch(f"task output length l={task.l} but f1 outputs {f1.m} bits")
    f = compose(f1, f2, T)
    if task.alpha > f.m:
        raise KextractError(f"alpha={task.alpha} exceeds extractor output length {f.m}")
    w = two_source_witness(f, task.alpha, sys)
    x, y = w.x, w.y
    u, v = f1(x, y), f2(x, y)
    z = f(x, y)
    lg_n = _lg(f.n)
    c = {
        "c_x": _val(sys.complexity(x)), "c_y": _val(sys.complexity(y)),
        "dep_xy": _dep(sys, x, y),
        "c_u": _val(sys.complexity(u)), "c_v": _val(sys.complexity(v)),
        "dep_uv": _dep(sys, u, v),
        "c_z": _val(w.c_f),
        "c_z_recomputed": _val(sys.complexity(extract(T, u, v))),
        "extractor_target_min": f.m - task.beta,
        "witness_target_max": f.m - task.alpha + lg_n + 2 * _lg(task.alpha),
        "complexity_floor": task.beta + task.a * lg_n,
    }

    def ge(p, q):
        return None if p is None or q is None else p >= q

    def le(p, q):
        return None if p is None or q is None else p <= q

    premise = None
    if None not in (c["dep_xy"], c["c_x"], c["c_y"]):
        premise = c["dep_xy"] <= task.alpha and c["c_x"] >= task.s and c["c_y"] >= task.s
    task2 = None
    if c["c_u"] is not None and c["c_v"] is not None:
        task2 = c["c_u"] >= c["complexity_floor"] and c["c_v"] >= c["complexity_floor"]
    clauses = {
        "premise": premise,
        "task_1": le(c["dep_uv"], task.beta),
        "task_2": task2,
        "extractor_lower": ge(c["c_z"], c["extractor_target_min"]),
        "witness_upper": le(c["c_z"], c["witness_target_max"]),
    }
    c["consistent"] = c["c_z"] == c["c_z_recomputed"]
    return AmplificationReport(x, y, u, v, z, c, clauses)
