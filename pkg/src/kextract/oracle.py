"""Finite description systems as an exactly computable complexity model.

A system is the graph of a two-tape machine: a finite set of triples
``(program, condition, output)`` with no repeated ``(program, condition)``.
The complexity of ``x`` given ``y`` is the length of the shortest program
whose entry has condition ``y`` and output ``x``; unconditional complexity
uses the empty condition.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .core import format_bits, parse_bits, strings_upto
from .errors import DuplicateKey, KextractError, ParseError, UndefinedComplexity


@functools.total_ordering
class _Bottom:
    """No description exists. Compares greater than every natural number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("kextract.BOTTOM")

    def __repr__(self):
        return "BOTTOM"

    def __str__(self):
        return "undefined"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()
Complexity = Union[int, _Bottom]


def is_defined(c: Complexity) -> bool:
    return c is not BOTTOM


class DescriptionSystem:
    def __init__(self, entries: Iterable[tuple[str, str, str]] = (), name: str = "system"):
        self.name = name
        table: dict[tuple[str, str], str] = {}
        for program, condition, output in entries:
            key = (program, condition)
            if key in table:
                raise DuplicateKey(
                    f"duplicate program {format_bits(program)!r} "
                    f"under condition {format_bits(condition)!r}")
            table[key] = output
        self._table = table
        best: dict[tuple[str, str], int] = {}
        for (program, condition), output in table.items():
            k = (condition, output)
            if k not in best or len(program) < best[k]:
                best[k] = len(program)
        self._best = best
        by_cond: dict[str, dict[str, int]] = {}
        for (condition, output), length in best.items():
            by_cond.setdefault(condition, {})[output] = length
        self._by_cond = by_cond

    @property
    def entries(self) -> list[tuple[str, str, str]]:
        """Entries in a fixed order: by condition, then program length, then program."""
        return sorted(((p, c, o) for (p, c), o in self._table.items()),
                      key=lambda e: (len(e[1]), e[1], len(e[0]), e[0]))

    def __len__(self):
        return len(self._table)

    def __eq__(self, other):
        return isinstance(other, DescriptionSystem) and self._table == other._table

    def __repr__(self):
        return f"DescriptionSystem({self.name!r}, {len(self)} entries)"

    def complexity(self, x: str, cond: str = "") -> Complexity:
        return self._best.get((cond, x), BOTTOM)

    def outputs_under(self, cond: str) -> dict[str, int]:
        return self._by_cond.get(cond, {})

    def dumps(self) -> str:
        lines = [f"# {self.name}"]
        for p, c, o in self.entries:
            lines.append(f"{format_bits(p)} | {format_bits(c)} -> {format_bits(o)}")
        return "\n".join(lines) + "\n"


def load_system(text: Union[bytes, str], name: str = "system") -> DescriptionSystem:
    """Parse ``<program> | <condition> -> <output>`` lines."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from None
    entries = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        left, arrow, output = line.partition("->")
        program, bar, condition = left.partition("|")
        if not arrow or not bar:
            raise ParseError("expected '<program> | <condition> -> <output>'", lineno)
        try:
            triple = (parse_bits(program), parse_bits(condition), parse_bits(output))
        except KextractError as exc:
            raise ParseError(str(exc), lineno) from None
        key = triple[:2]
        if key in seen:
            raise DuplicateKey(
                f"program {program.strip()!r} with condition {condition.strip()!r} "
                f"already defined on line {seen[key]}", lineno)
        seen[key] = lineno
        entries.append(triple)
    return DescriptionSystem(entries, name=name)


def complexity(sys: DescriptionSystem, x: str, cond: str = "") -> Complexity:
    return sys.complexity(x, cond)


def require(sys, x, cond, label):
    c = sys.complexity(x, cond)
    if c is BOTTOM:
        raise UndefinedComplexity(label)
    return c


@dataclass(frozen=True)
class DependencyReport:
    c_x: int
    c_y: int
    c_x_given_y: int
    c_y_given_x: int

    @property
    def dep(self) -> int:
        return max(self.c_x - self.c_x_given_y, self.c_y - self.c_y_given_x)


def dep(sys: DescriptionSystem, x: str, y: str) -> DependencyReport:
    """Dependency ``max(C(x) - C(x|y), C(y) - C(y|x))``."""
    return DependencyReport(
        c_x=require(sys, x, "", "C(x)"),
        c_x_given_y=require(sys, x, y, "C(x|y)"),
        c_y=require(sys, y, "", "C(y)"),
        c_y_given_x=require(sys, y, x, "C(y|x)"),
    )


def profile_set(sys: DescriptionSystem, t: int, cond: str, length: int) -> frozenset[str]:
    """Strings of the given length with complexity at most ``t`` given ``cond``."""
    return frozenset(u for u, c in sys.outputs_under(cond).items()
                     if len(u) == length and c <= t)


def _lg(v: float) -> float:
    # log of a non-positive argument is taken as 0 (only arises for empty strings)
    return math.log2(v) if v > 1 else 0.0


@dataclass(frozen=True)
class SoiSlack:
    """Right side minus left side for each symmetry-of-information inequality.

    ``c`` is None when the strings have different lengths.
    """
    a: float
    b: float
    c: float | None


def soi_slack(sys: DescriptionSystem, x: str, y: str, const: float = 0.0) -> SoiSlack:
    """Slack of the three symmetry-of-information inequalities, measured in ``sys``.

    ``const`` is used for every O(1) term. Negative slack means the system
    violates the inequality; that is reported, not raised.
    """
    cx = require(sys, x, "", "C(x)")
    cy = require(sys, y, "", "C(y)")
    cxy = require(sys, x + y, "", "C(xy)")
    cx_y = require(sys, x, y, "C(x|y)")
    cy_x = require(sys, y, x, "C(y|x)")
    a = cy + cx_y + 2 * _lg(cy) + const - cxy
    b = cxy - (cx + cy_x - 2 * _lg(cxy) - 4 * _lg(_lg(cxy)) - const)
    c = None
    if len(x) == len(y):
        c = (cy - cy_x) - (cx - cx_y - 5 * _lg(len(x)))
    return SoiSlack(a, b, c)


def literal_system(max_len: int, conditions: Iterable[str] | None = None,
                   copy: bool = True, name: str = "literal") -> DescriptionSystem:
    """Every string of length <= ``max_len`` is its own program, so C(x) = |x|.

    With ``copy`` set, the empty program under a nonempty condition ``c``
    outputs ``c`` (so C(c|c) = 0); the empty output then has no description
    under that condition.
    """
    strings = list(strings_upto(max_len))
    conds = strings if conditions is None else sorted(set(conditions), key=lambda s: (len(s), s))
    entries = []
    for c in conds:
        for x in strings:
            if copy and c and x == "":
                entries.append(("", c, c))
            else:
                entries.append((x, c, x))
    return DescriptionSystem(entries, name=name)


def random_system(max_len: int, seed: int, conditions: Iterable[str] | None = None,
                  max_program: int | None = None, coverage: float = 1.0,
                  output_lengths: Iterable[int] | None = None,
                  name: str | None = None) -> DescriptionSystem:
    """Seeded system assigning each covered string a shortest program of random length.

    For every condition and every output of length <= ``max_len`` (kept with
    probability ``coverage``, restricted to ``output_lengths`` when given) a
    length is drawn uniformly from ``0..max_program``; the first unused
    program of that length, or failing that of the next available length, is
    taken.
    """
    rng = np.random.default_rng(seed)
    if max_program is None:
        max_program = max_len + 1
    outputs = list(strings_upto(max_len))
    if output_lengths is not None:
        keep = set(output_lengths)
        outputs = [x for x in outputs if len(x) in keep]
    conds = [""] if conditions is None else sorted(set(conditions), key=lambda s: (len(s), s))
    entries = []
    for c in conds:
        used: dict[int, int] = {}
        for x in outputs:
            if coverage < 1.0 and rng.random() >= coverage:
                continue
            k = int(rng.integers(0, max_program + 1))
            while used.get(k, 0) >= 1 << k:
                k += 1
            program = format(used.get(k, 0), f"0{k}b") if k else ""
            used[k] = used.get(k, 0) + 1
            entries.append((program, c, x))
    return DescriptionSystem(entries, name=name or f"random-L{max_len}-seed{seed}")


__all__ = [
    "BOTTOM", "Complexity", "DescriptionSystem", "DependencyReport", "SoiSlack",
    "complexity", "dep", "is_defined", "literal_system",
    "load_system", "profile_set", "random_system", "soi_slack",
]
