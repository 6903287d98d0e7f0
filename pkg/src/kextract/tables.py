"""Color tables ``[N] x [N] -> [M]`` and (S, D)-rainbow balance.

A table is rainbow balanced when, for every S-by-S rectangle and every
assignment of an allowed color set to each of its columns (and, separately,
to each of its rows), at most ``2 m^2 S^2 / D`` of the rectangle's cells
carry a color from their column's (row's) set.

Two verifiers are provided.  The exhaustive one quantifies over color-set
tuples literally.  The decomposed one uses the fact that each set in the
tuple only constrains its own column: the worst tuple picks, per column, the
``max_size`` most frequent colors of that column's strip, so the worst
rectangle for fixed rows is the S columns with the largest such sums.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .core import RainbowParams, is_power_of_two
from .errors import ExhaustedTries, KextractError, NotFoundError, ParseError, SizeLimitError


@dataclass
class Limits:
    """Desk-scale limits; ``KEXTRACT_MAX_WORK`` overrides ``max_work``."""
    max_n_table: int = 12
    max_m_table: int = 16
    max_N_decomposed: int = 256
    max_work: int = 50_000_000
    max_N_exhaustive: int = 8
    max_S_exhaustive: int = 2
    max_exhaustive_work: int = 20_000_000
    max_N_smallest: int = 4
    max_M_smallest: int = 4


def default_limits() -> Limits:
    limits = Limits()
    env = os.environ.get("KEXTRACT_MAX_WORK")
    if env:
        limits.max_work = int(env)
    return limits


class ColorTable:
    """Immutable N-by-N table of colors in ``range(M)``; ``T[u, v]`` is row u, column v."""

    def __init__(self, n: int, m: int, cells):
        cells = np.array(cells, dtype=np.int64)
        N, M = 1 << n, 1 << m
        if cells.shape != (N, N):
            raise KextractError(f"table for n={n} must be {N}x{N}, got shape {cells.shape}")
        if cells.size and (cells.min() < 0 or cells.max() >= M):
            raise KextractError(f"colors must lie in [0, {M})")
        cells.flags.writeable = False
        self.n, self.m = n, m
        self.cells = cells

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def M(self) -> int:
        return 1 << self.m

    def __getitem__(self, uv):
        return int(self.cells[uv])

    def __eq__(self, other):
        return (isinstance(other, ColorTable) and (self.n, self.m) == (other.n, other.m)
                and np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash((self.n, self.m, self.cells.tobytes()))

    def __repr__(self):
        return f"ColorTable(n={self.n}, m={self.m})"

    def dumps(self) -> str:
        lines = [f"table n={self.n} m={self.m}"]
        lines.extend(" ".join(str(int(c)) for c in row) for row in self.cells)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ColorTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty table file", 1)
        header = lines[0].split()
        try:
            if header[0] != "table" or len(header) != 3:
                raise ValueError
            fields = dict(tok.split("=", 1) for tok in header[1:])
            n, m = int(fields["n"]), int(fields["m"])
        except (ValueError, KeyError, IndexError):
            raise ParseError("expected header 'table n=<n> m=<m>'", 1) from None
        N, M = 1 << n, 1 << m
        if len(lines) - 1 != N:
            raise ParseError(f"expected {N} rows, found {len(lines) - 1}", len(lines))
        rows = []
        for i, line in enumerate(lines[1:], start=2):
            try:
                row = [int(tok) for tok in line.split()]
            except ValueError:
                raise ParseError("non-integer color", i) from None
            if len(row) != N or any(c < 0 or c >= M for c in row):
                raise ParseError(f"row must hold {N} colors in [0, {M})", i)
            rows.append(row)
        return cls(n, m, rows)


def constant_table(n: int, m: int, color: int = 0) -> ColorTable:
    N = 1 << n
    return ColorTable(n, m, np.full((N, N), color))


def sum_mod_table(n: int, m: int) -> ColorTable:
    """T(u, v) = (u + v) mod M."""
    N = 1 << n
    u = np.arange(N)
    return ColorTable(n, m, (u[:, None] + u[None, :]) % (1 << m))


def random_table(n: int, m: int, seed: int, limits: Limits | None = None) -> ColorTable:
    """Each cell uniform over ``[M]``, drawn from ``numpy.random.default_rng(seed)``."""
    limits = limits or default_limits()
    if n > limits.max_n_table or m > limits.max_m_table:
        raise SizeLimitError(f"random table n={n}, m={m} exceeds desk limits "
                             f"(n <= {limits.max_n_table}, m <= {limits.max_m_table})")
    rng = np.random.default_rng(seed)
    return _draw(rng, n, m)


def _draw(rng, n, m):
    N = 1 << n
    return ColorTable(n, m, rng.integers(0, 1 << m, size=(N, N)))


@dataclass(frozen=True)
class ColorSetFamily:
    """All color sets A of ``[M]`` with ``min_size <= |A| <= max_size``."""
    M: int
    D: Fraction
    m: int

    def __post_init__(self):
        object.__setattr__(self, "D", Fraction(self.D))

    @classmethod
    def for_table(cls, T: ColorTable, D) -> "ColorSetFamily":
        return cls(T.M, D, T.m)

    @property
    def min_size(self) -> int:
        return math.ceil(Fraction(self.M) / self.D)

    @property
    def max_size(self) -> int:
        return min(self.M, math.floor(Fraction(self.M * self.m ** 2) / self.D))

    @property
    def empty(self) -> bool:
        return self.min_size > self.max_size

    def __contains__(self, A) -> bool:
        return (self.min_size <= len(A) <= self.max_size
                and all(0 <= c < self.M for c in A))

    def members(self) -> Iterator[tuple[int, ...]]:
        for size in range(self.min_size, self.max_size + 1):
            yield from itertools.combinations(range(self.M), size)

    def count(self) -> int:
        if self.empty:
            return 0
        return sum(math.comb(self.M, k) for k in range(self.min_size, self.max_size + 1))


def column_strip_max(T: ColorTable, B1: Iterable[int], v: int, fam: ColorSetFamily) -> int:
    """Most cells of strip ``B1 x {v}`` any single allowed color set can cover.

    Returns 0 when the family is empty (check ``fam.empty``).
    """
    if fam.empty:
        return 0
    freq = [0] * T.M
    for u in B1:
        freq[T.cells[u, v]] += 1
    freq.sort(reverse=True)
    return sum(freq[:fam.max_size])


@dataclass(frozen=True)
class VerifyReport:
    balanced: bool
    worst_count: int
    bound: Fraction
    rectangles_checked: int
    worst_rectangle: tuple | None = None  # (B1, B2, "columns" | "rows")
    empty_family: bool = False
    vacuous: bool = False
    exact: bool = True
    mode: str = "decomposed"

    def as_dict(self) -> dict:
        rect = self.worst_rectangle
        return {
            "balanced": self.balanced,
            "worst_count": self.worst_count,
            "bound": float(self.bound),
            "rectangles_checked": self.rectangles_checked,
            "worst_rows": list(rect[0]) if rect else None,
            "worst_cols": list(rect[1]) if rect else None,
            "worst_orientation": rect[2] if rect else None,
            "empty_family": self.empty_family,
            "vacuous": self.vacuous,
            "exact": self.exact,
            "mode": self.mode,
        }


def rainbow_bound(m: int, size1: int, size2: int, D) -> Fraction:
    return Fraction(2 * m * m * size1 * size2) / Fraction(D)


def _check_S(T, S):
    if not is_power_of_two(S) or S > T.N:
        raise KextractError(f"S must be a power of two not exceeding N={T.N}, got {S}")


def _strip_scores(cells: np.ndarray, rowsets: np.ndarray, M: int, k: int) -> np.ndarray:
    """For each row set, the top-k color frequency sum of every column strip.

    ``cells`` may contain -1 for unassigned cells, which count toward no color.
    """
    strips = cells[rowsets]  # (batch, S, N)
    counts = np.stack([(strips == c).sum(axis=1) for c in range(M)], axis=-1)
    counts = -np.sort(-counts, axis=-1)
    return counts[..., :k].sum(axis=-1)  # (batch, N)


def _worst_decomposed(cells: np.ndarray, S: int, M: int, k: int, batch: int = 4096):
    """Maximum properly colored count over all S x S rectangles, one orientation.

    Ties resolve to the lexicographically first (rows, columns) pair.
    """
    N = cells.shape[0]
    best = (-1, None, None)
    combos = itertools.combinations(range(N), S)
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            break
        rowsets = np.array(chunk, dtype=np.intp).reshape(len(chunk), S)
        scores = _strip_scores(cells, rowsets, M, k)
        order = np.argsort(-scores, axis=1, kind="stable")[:, :S]
        totals = np.take_along_axis(scores, order, axis=1).sum(axis=1)
        i = int(np.argmax(totals))
        if totals[i] > best[0]:
            best = (int(totals[i]), chunk[i], tuple(sorted(int(c) for c in order[i])))
    return best


def _partial_worst(cells: np.ndarray, S: int, M: int, k: int) -> int:
    worst = 0
    for grid in (cells, cells.T):
        worst = max(worst, _worst_decomposed(grid, S, M, k)[0])
    return worst


def _worst_exhaustive(cells: np.ndarray, S: int, fam: ColorSetFamily):
    N = cells.shape[0]
    members = [frozenset(A) for A in fam.members()]
    best = (-1, None, None)
    for B1 in itertools.combinations(range(N), S):
        for B2 in itertools.combinations(range(N), S):
            columns = [[int(cells[u, v]) for u in B1] for v in B2]
            for tup in itertools.product(members, repeat=S):
                count = sum(1 for A, col in zip(tup, columns) for c in col if c in A)
                if count > best[0]:
                    best = (count, B1, B2)
    return best


def verify_rainbow(T: ColorTable, S: int, D, mode: str = "decomposed",
                   limits: Limits | None = None) -> VerifyReport:
    """Check (S, D)-rainbow balance over all S x S rectangles in both orientations."""
    limits = limits or default_limits()
    _check_S(T, S)
    if mode not in ("decomposed", "exhaustive"):
        raise KextractError(f"unknown verification mode {mode!r}")
    fam = ColorSetFamily.for_table(T, D)
    bound = rainbow_bound(T.m, S, S, D)
    n_rect = 2 * math.comb(T.N, S) ** 2
    if fam.empty:
        return VerifyReport(True, 0, bound, 0, empty_family=True, vacuous=True, mode=mode)

    if mode == "exhaustive":
        work = fam.count() ** S * math.comb(T.N, S) ** 2
        if (T.N > limits.max_N_exhaustive or S > limits.max_S_exhaustive
                or work > limits.max_exhaustive_work):
            raise SizeLimitError(
                f"exhaustive verification limited to N <= {limits.max_N_exhaustive}, "
                f"S <= {limits.max_S_exhaustive}; got N={T.N}, S={S}, "
                f"{fam.count()} color sets")
        worst = None
        for orientation, grid in (("columns", T.cells), ("rows", T.cells.T)):
            count, B1, B2 = _worst_exhaustive(grid, S, fam)
            if worst is None or count > worst[0]:
                worst = (count, (B1, B2, orientation))
        return VerifyReport(worst[0] <= bound, worst[0], bound, n_rect,
                            worst_rectangle=worst[1], mode=mode)

    work = math.comb(T.N, S) * T.N * S
    too_big = T.N > limits.max_N_decomposed or work > limits.max_work
    if too_big:
        if bound >= S * S:
            # no rectangle holds more than S^2 cells
            return VerifyReport(True, S * S, bound, 0, vacuous=True, exact=False, mode=mode)
        raise SizeLimitError(
            f"decomposed verification of N={T.N}, S={S} needs ~{work:.3g} cell visits "
            f"(limit {limits.max_work}, N <= {limits.max_N_decomposed})")
    worst = None
    for orientation, grid in (("columns", T.cells), ("rows", T.cells.T)):
        count, B1, B2 = _worst_decomposed(grid, S, T.M, fam.max_size)
        if worst is None or count > worst[0]:
            worst = (count, (B1, B2, orientation))
    return VerifyReport(worst[0] <= bound, worst[0], bound, n_rect,
                        worst_rectangle=worst[1], vacuous=bound >= S * S, mode=mode)


def _check_smallest_limits(p: RainbowParams, limits: Limits):
    if p.N > limits.max_N_smallest or p.M > limits.max_M_smallest:
        raise SizeLimitError(
            f"canonical table search limited to N <= {limits.max_N_smallest}, "
            f"M <= {limits.max_M_smallest}")


def canonical_tables(n: int, m: int) -> Iterator[ColorTable]:
    """All tables in canonical order: row-major cells read as an ascending base-M numeral."""
    N = 1 << n
    for digits in itertools.product(range(1 << m), repeat=N * N):
        yield ColorTable(n, m, np.array(digits).reshape(N, N))


def smallest_rainbow(p: RainbowParams, method: str = "search",
                     limits: Limits | None = None) -> ColorTable:
    """First balanced table in canonical order.

    ``method="brute"`` walks the canonical order table by table.  The default
    ``"search"`` walks the same order depth-first over cells and abandons a
    prefix as soon as its filled cells alone exceed the bound; filling more
    cells never lowers a count, so no balanced table is skipped.
    """
    limits = limits or default_limits()
    _check_smallest_limits(p, limits)
    fam = ColorSetFamily(p.M, p.D, p.m)
    bound = rainbow_bound(p.m, p.S, p.S, p.D)
    if fam.empty or bound >= p.S * p.S:
        return constant_table(p.n, p.m)

    if method == "brute":
        for T in canonical_tables(p.n, p.m):
            if verify_rainbow(T, p.S, p.D, limits=limits).balanced:
                return T
        raise NotFoundError(f"no ({p.S},{p.D})-rainbow balanced table for n={p.n}, m={p.m}")
    if method != "search":
        raise KextractError(f"unknown search method {method!r}")

    N, M, k = p.N, p.M, fam.max_size
    cells = np.full((N, N), -1, dtype=np.int64)

    def extend(pos):
        if pos == N * N:
            return True
        u, v = divmod(pos, N)
        for color in range(M):
            cells[u, v] = color
            if _partial_worst(cells, p.S, M, k) <= bound and extend(pos + 1):
                return True
        cells[u, v] = -1
        return False

    if not extend(0):
        raise NotFoundError(f"no ({p.S},{p.D})-rainbow balanced table for n={p.n}, m={p.m}")
    return ColorTable(p.n, p.m, cells)


@dataclass(frozen=True)
class MonteCarloResult:
    table: ColorTable
    tries: int
    report: VerifyReport = field(compare=False)


def monte_carlo_rainbow(p: RainbowParams, max_tries: int, seed: int,
                        limits: Limits | None = None) -> MonteCarloResult:
    """Draw random tables from one seeded stream until one verifies as balanced.

    Try 1 draws exactly ``random_table(p.n, p.m, seed)``.
    """
    limits = limits or default_limits()
    if p.n > limits.max_n_table or p.m > limits.max_m_table:
        raise SizeLimitError(f"n={p.n}, m={p.m} exceeds desk limits")
    rng = np.random.default_rng(seed)
    for tries in range(1, max_tries + 1):
        T = _draw(rng, p.n, p.m)
        report = verify_rainbow(T, p.S, p.D, limits=limits)
        if report.balanced:
            return MonteCarloResult(T, tries, report)
    raise ExhaustedTries(max_tries)
