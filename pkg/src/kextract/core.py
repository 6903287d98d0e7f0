"""Bitstrings, the pair encoding, and closed-form parameter arithmetic.

Bitstrings are plain ``str`` values over ``'0'``/``'1'``; the empty string is
``''``.  In files and on the command line the empty string is spelled ``.``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

from .errors import KextractError, MalformedEncoding

BORDERLINE = 1e-9

BitString = str


def check_bits(s: str) -> str:
    if any(c not in "01" for c in s):
        raise KextractError(f"not a bitstring: {s!r}")
    return s


def parse_bits(token: str) -> str:
    """Parse a file/CLI token; ``.`` is the empty string."""
    token = token.strip()
    if token == ".":
        return ""
    if not token:
        raise KextractError("empty token (use '.' for the empty string)")
    return check_bits(token)


def format_bits(s: str) -> str:
    return s if s else "."


def to_bits(value: int, length: int) -> str:
    """Big-endian, zero-padded."""
    if value < 0 or value >= 1 << length:
        raise KextractError(f"{value} does not fit in {length} bits")
    return format(value, f"0{length}b") if length else ""


def to_index(s: str) -> int:
    return int(s, 2) if s else 0


def all_strings(length: int) -> Iterator[str]:
    """All strings of the given length in lexicographic order."""
    for bits in itertools.product("01", repeat=length):
        yield "".join(bits)


def strings_upto(length: int) -> Iterator[str]:
    """All strings of length <= ``length``, shortest first, then lexicographic."""
    for k in range(length + 1):
        yield from all_strings(k)


def is_power_of_two(k) -> bool:
    return isinstance(k, int) and k > 0 and k & (k - 1) == 0


def bin_nat(k: int) -> str:
    # bin(0) is "0" so the pair encoding is total
    return format(k, "b")


def encode_pair(x1: str, x2: str) -> str:
    """Self-delimiting encoding ``double(bin(|x2|)) 01 x1 x2``."""
    header = "".join(b + b for b in bin_nat(len(x2)))
    return header + "01" + x1 + x2


def decode_pair(s: str) -> tuple[str, str]:
    check_bits(s)
    digits = []
    i = 0
    while True:
        pair = s[i:i + 2]
        if len(pair) < 2:
            raise MalformedEncoding("length header has no '01' terminator")
        i += 2
        if pair == "01":
            break
        if pair == "10":
            raise MalformedEncoding(f"invalid header pair '10' at offset {i - 2}")
        digits.append(pair[0])
    if not digits:
        raise MalformedEncoding("empty length header")
    if len(digits) > 1 and digits[0] == "0":
        raise MalformedEncoding("length header has a leading zero")
    n2 = int("".join(digits), 2)
    rest = s[i:]
    if len(rest) < n2:
        raise MalformedEncoding(
            f"payload has {len(rest)} bits, second string needs {n2}")
    cut = len(rest) - n2
    return rest[:cut], rest[cut:]


def binom_sum(n: int, m: int) -> int:
    """b(n, m) = C(n,0) + ... + C(n,m)."""
    if m < 0 or n < 0:
        raise KextractError("binom_sum needs non-negative arguments")
    if m > n:
        raise KextractError(f"binom_sum needs m <= n, got m={m} > n={n}")
    return sum(math.comb(n, i) for i in range(m + 1))


def binom_sum_log_bounds(n: int, m: int) -> tuple[float, float]:
    """Lower and upper bounds on log2 b(n, m), valid for 1 <= m < n."""
    base = m * (math.log2(n) - math.log2(m))
    return base, base + m * math.log2(math.e) + math.log2(1 + m)


@dataclass(frozen=True)
class RainbowParams:
    """Table size and balance parameters.

    ``D`` may be any positive rational.  ``D > M * m**2`` is accepted; the
    allowed color-set family is then empty and verification is vacuous.
    """
    n: int
    m: int
    S: int
    D: Fraction

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise KextractError("n and m must be non-negative")
        object.__setattr__(self, "D", Fraction(self.D))
        if self.D <= 0:
            raise KextractError("D must be positive")
        if not is_power_of_two(self.S):
            raise KextractError(f"S must be a power of two, got {self.S}")
        if self.S > self.N:
            raise KextractError(f"S={self.S} exceeds N={self.N}")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def M(self) -> int:
        return 1 << self.m

    @classmethod
    def from_sizes(cls, N: int, M: int, S: int, D, m: int | None = None):
        if not is_power_of_two(N) or not is_power_of_two(M):
            raise KextractError("N and M must be powers of two")
        mm = M.bit_length() - 1
        if m is not None and m != mm:
            raise KextractError(f"m={m} inconsistent with M={M}")
        return cls(n=N.bit_length() - 1, m=mm, S=S, D=D)


class Feasibility(NamedTuple):
    feasible: bool
    margin: float
    rhs: float
    borderline: bool


def rainbow_feasible(p: RainbowParams) -> Feasibility:
    """Check the sufficient condition for a balanced table to exist:
    ``S >= 12D + 3(1 + ln D) M m^2 + 6D ln(N/S)``.
    """
    D = float(p.D)
    rhs = 12 * D + 3 * (1 + math.log(D)) * p.M * p.m ** 2 + 6 * D * math.log(p.N / p.S)
    margin = p.S - rhs
    return Feasibility(margin >= 0, margin, rhs, abs(margin) < BORDERLINE)
