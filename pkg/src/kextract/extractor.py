"""The table extractor ``E(x, y) = T(x, y)`` and its proof-level diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import format_bits, to_bits, to_index
from .errors import HypothesisViolation, KextractError, LengthMismatch
from .oracle import BOTTOM, Complexity, DescriptionSystem, require, profile_set
from .tables import ColorTable


@dataclass(frozen=True)
class ExtractorParams:
    n: int
    m: int
    s: int
    S: int
    t: int
    D: int
    s_n: float | None = None
    alpha: int | None = None
    const_c: int | None = None
    mode: str = "paper"


def derive_params(n: int, s_n: float | None, alpha: int | None, const_c: int | None,
                  m: int, mode: str = "paper", *, s: int | None = None,
                  S: int | None = None, D: int | None = None,
                  t: int | None = None) -> ExtractorParams:
    """Extractor parameters.

    Paper mode computes ``s = floor(s_n - 3 log n)``, ``S = 2^s``,
    ``t = alpha + C`` and ``D = 2^(alpha + C + 2 ceil(log m))`` after checking
    ``s_n >= alpha + 7 log n + C`` and ``m <= s_n - 7 log n``.  Desk mode
    records caller-supplied ``s, S, D, t`` unchanged.
    """
    if mode == "desk":
        if None in (s, S, D, t):
            raise KextractError("desk mode needs s, S, D and t")
        return ExtractorParams(n=n, m=m, s=s, S=S, t=t, D=D, s_n=s_n, alpha=alpha,
                               const_c=const_c, mode="desk")
    if mode != "paper":
        raise KextractError(f"unknown mode {mode!r}")
    if None in (s_n, alpha, const_c):
        raise KextractError("paper mode needs s_n, alpha and const_c")
    if n < 1 or m < 1:
        raise KextractError("paper mode needs n >= 1 and m >= 1")
    lg = math.log2(n)
    if s_n > n:
        raise HypothesisViolation(f"s_n <= n ({s_n} > {n})")
    if s_n < alpha + 7 * lg + const_c:
        raise HypothesisViolation(
            f"s_n >= alpha + 7 log n + C ({s_n} < {alpha + 7 * lg + const_c:g})")
    if m > s_n - 7 * lg:
        raise HypothesisViolation(f"m <= s_n - 7 log n ({m} > {s_n - 7 * lg:g})")
    s_val = math.floor(s_n - 3 * lg)
    t_val = alpha + const_c
    d_exp = alpha + const_c + 2 * math.ceil(math.log2(m))
    return ExtractorParams(n=n, m=m, s=s_val, S=1 << s_val, t=t_val, D=1 << d_exp,
                           s_n=s_n, alpha=alpha, const_c=const_c, mode="paper")


def extract(T: ColorTable, x: str, y: str) -> str:
    if len(x) != T.n or len(y) != T.n:
        raise LengthMismatch(f"inputs must have length {T.n}, got {len(x)} and {len(y)}")
    return to_bits(T[to_index(x), to_index(y)], T.m)


def padded_superset(B1, n: int, size: int) -> frozenset[str]:
    """``B1`` topped up to ``size`` with the lexicographically smallest absent strings."""
    if len(B1) > size:
        raise KextractError(f"set of size {len(B1)} does not fit in {size}")
    if size > 1 << n:
        raise KextractError(f"superset size {size} exceeds 2^{n}")
    out = set(B1)
    u = 0
    while len(out) < size:
        out.add(to_bits(u, n))
        u += 1
    return frozenset(out)


def color_sets(T: ColorTable, sys: DescriptionSystem, t: int) -> list[frozenset[int]]:
    """For each column v, the colors w with C(w|v) < m - t."""
    return [frozenset(to_index(w) for w in profile_set(sys, T.m - t - 1, to_bits(v, T.n), T.m))
            for v in range(T.N)]


@dataclass(frozen=True)
class BadColumnReport:
    columns: frozenset[int]
    rows: frozenset[int]
    padded_size: int
    threshold: float
    color_sets: tuple = field(repr=False)


def bad_column_report(T: ColorTable, sys: DescriptionSystem, t1: int, t: int) -> BadColumnReport:
    rows_bits = profile_set(sys, t1, "", T.n)
    # only |B1'| enters the threshold; it may exceed 2^n, so the set itself is not built
    padded = 1 << (t1 + 1)
    rows = frozenset(to_index(u) for u in rows_bits)
    sets = color_sets(T, sys, t)
    bad = set()
    for v, A in enumerate(sets):
        hits = sum(1 for u in rows if T[u, v] in A)
        # hits >= 2 * padded / 2^t, kept in integers
        if hits << t >= 2 * padded:
            bad.add(v)
    return BadColumnReport(frozenset(bad), rows, padded, 2 * padded / 2 ** t, tuple(sets))


def bad_columns(T: ColorTable, sys: DescriptionSystem, t1: int, t: int) -> frozenset[int]:
    """Columns v whose strip over ``{u : C(u) <= t1}`` has at least
    ``2 |B1'| / 2^t`` cells colored from ``{w : C(w|v) < m - t}``.

    ``|B1'|`` is the padded row-set size ``2^(t1+1)``.
    """
    return bad_column_report(T, sys, t1, t).columns


@dataclass(frozen=True)
class AuditReport:
    hypothesis_i: bool
    hypothesis_ii: bool
    z: str
    cz_given_x: Complexity
    cz_given_y: Complexity
    target: int
    verdict_1: bool
    verdict_2: bool
    c_x: int
    c_y: int
    c_x_given_y: int
    c_y_given_x: int
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "hypothesis_i": self.hypothesis_i,
            "hypothesis_ii": self.hypothesis_ii,
            "c_x": self.c_x, "c_y": self.c_y,
            "c_x_given_y": self.c_x_given_y, "c_y_given_x": self.c_y_given_x,
            "z": format_bits(self.z),
            "c_z_given_x": str(self.cz_given_x),
            "c_z_given_y": str(self.cz_given_y),
            "target": self.target,
            "verdict_1": self.verdict_1,
            "verdict_2": self.verdict_2,
            "notes": "; ".join(self.notes) or "none",
        }


def audit_extraction(sys: DescriptionSystem, T: ColorTable, x: str, y: str,
                     p: ExtractorParams) -> AuditReport:
    """Measure the extractor's hypotheses and conclusions in ``sys``; never asserts."""
    c_x = require(sys, x, "", "C(x)")
    c_y = require(sys, y, "", "C(y)")
    c_xy = require(sys, x, y, "C(x|y)")
    c_yx = require(sys, y, x, "C(y|x)")
    notes = []
    if p.s_n is None or p.alpha is None:
        notes.append("s_n/alpha not given; hypothesis clauses evaluated as false")
        hyp_i = hyp_ii = False
    else:
        hyp_i = c_x >= p.s_n and c_y >= p.s_n
        hyp_ii = c_x - c_xy <= p.alpha and c_y - c_yx <= p.alpha
    z = extract(T, x, y)
    czx = sys.complexity(z, x)
    czy = sys.complexity(z, y)
    target = p.m - p.t
    for label, t1 in (("C(x)", c_x), ("C(y)", c_y)):
        if p.t >= t1 + 2:
            notes.append(f"out of proof range: t={p.t} >= {label}+2={t1 + 2}")
    if czx is BOTTOM or czy is BOTTOM:
        notes.append("C(z|.) undefined counts as above every target")
    return AuditReport(hyp_i, hyp_ii, z, czx, czy, target, czx >= target, czy >= target,
                       c_x, c_y, c_xy, c_yx, tuple(notes))
