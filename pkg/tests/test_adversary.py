import itertools
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kextract.adversary import (AdvisedFamily, FiniteDistribution, FunctionGrid, Task,
                                amplification_harness, compose, frequent_range, greedy_bound,
                                greedy_range_cover, min_entropy, min_entropy_adversary,
                                most_popular_output, one_source_witness, prefix_grid,
                                random_grid, range_bound_b, range_of, two_source_witness)
from kextract.core import all_strings, binom_sum, strings_upto
from kextract.errors import KextractError, LengthMismatch, ParseError, PartialFunctionError
from kextract.oracle import BOTTOM, DescriptionSystem, literal_system, random_system
from kextract.tables import sum_mod_table


def const(arity, n, value):
    return FunctionGrid.from_function(arity, n, len(value), lambda *a: value)


def undefined(n, m):
    return FunctionGrid(1, n, m, [None] * (1 << n))


def parity(x):
    return str(x.count("1") % 2)


# grids

def test_grid_file_roundtrip():
    f = random_grid(2, 2, 3, seed=4, undefined_rate=0.3)
    text = f.dumps()
    assert text.splitlines()[0] == "func arity=2 n=2 m=3"
    assert "?" in text
    assert FunctionGrid.loads(text) == f
    g = FunctionGrid.from_function(1, 2, 0, lambda x: "")
    assert FunctionGrid.loads(g.dumps()) == g


@pytest.mark.parametrize("text", [
    "", "fun arity=1 n=1 m=1\n0 1\n", "func arity=3 n=1 m=1\n0 1\n",
    "func arity=1 n=1 m=1\n0\n", "func arity=1 n=1 m=1\n0 11\n", "func arity=1 n=1 m=1\n0 2\n",
])
def test_grid_file_errors(text):
    with pytest.raises(ParseError):
        FunctionGrid.loads(text)


def test_random_grid_deterministic():
    assert random_grid(2, 3, 2, 9) == random_grid(2, 3, 2, 9)
    assert random_grid(2, 3, 2, 9) != random_grid(2, 3, 2, 10)


def test_grid_call_and_lengths():
    f = FunctionGrid.from_function(2, 2, 2, lambda x, y: x)
    assert f("10", "01") == "10"
    with pytest.raises(LengthMismatch):
        f("1", "01")


def test_advised_family_size():
    with pytest.raises(KextractError):
        AdvisedFamily(1, [const(1, 2, "0")] * 2)
    fam = AdvisedFamily.random(1, 3, 2, seed=0)
    assert fam.K == 3
    assert AdvisedFamily.random(1, 3, 2, seed=0).functions == fam.functions


# popular outputs

def test_popular_examples():
    assert most_popular_output(const(2, 2, "10")) == ("10", 16)
    f_and = FunctionGrid.from_function(2, 1, 1, lambda x, y: str(int(x) & int(y)))
    assert most_popular_output(f_and) == ("0", 3)
    proj = FunctionGrid.from_function(2, 1, 1, lambda x, y: x)
    assert most_popular_output(proj) == ("0", 2)


def test_popular_rejects_partial():
    with pytest.raises(PartialFunctionError):
        most_popular_output(random_grid(1, 3, 1, 0, undefined_rate=0.5))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 2), st.integers(0, 4), st.integers(0, 4), st.integers(0, 2 ** 32 - 1))
def test_popular_pigeonhole(arity, n, m, seed):
    f = random_grid(arity, n, m, seed)
    z, count = most_popular_output(f)
    counts = Counter(f.entries)
    assert count == counts[z] == max(counts.values())
    assert z == min(v for v in counts if counts[v] == count)
    assert count * (1 << m) >= 1 << (arity * n)


# one-source witness

def test_one_source_constant_f():
    sys = random_system(3, 2)
    w = one_source_witness(const(1, 3, "1"), sys)
    best = max(sys.complexity(x) for x in all_strings(3))
    assert sys.complexity(w.x) == best
    assert w.x == min(x for x in all_strings(3) if sys.complexity(x) == best)


def test_one_source_literal_ties():
    f = FunctionGrid.from_function(1, 2, 1, parity)
    w = one_source_witness(f, literal_system(2))
    assert (w.x, w.z, w.count, w.c_x) == ("00", "0", 2, 2)
    f = FunctionGrid.from_function(1, 3, 2, lambda x: x[1:])
    assert one_source_witness(f, literal_system(3)).x == "000"


def test_one_source_undefined_flag():
    w = one_source_witness(const(1, 2, "0"), DescriptionSystem())
    assert w.undefined and w.x == "00"


# ranges

def test_range_examples():
    assert range_of(AdvisedFamily(0, [undefined(2, 1)]), "01") == frozenset()
    assert range_of(AdvisedFamily(0, [const(1, 2, "0")]), "01") == {"0"}
    fam = AdvisedFamily(1, [const(1, 1, "0"), const(1, 1, "0"), const(1, 1, "1")])
    assert range_of(fam, "1") == {"0", "1"}


def test_frequent_examples():
    assert frequent_range(AdvisedFamily(0, [undefined(3, 1)])) == (frozenset(), 8)
    assert frequent_range(AdvisedFamily(0, [const(1, 2, "0")])) == ({"0"}, 4)
    fam = AdvisedFamily(0, [FunctionGrid.from_function(1, 2, 1, parity)])
    assert frequent_range(fam) == ({"0"}, 2)


def _all_range_values(M, K):
    # every subset of the M strings with at most K elements
    return sum(1 for r in range(min(M, K) + 1) for _ in itertools.combinations(range(M), r))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2), st.integers(1, 6), st.integers(1, 3), st.integers(0, 2 ** 32 - 1),
       st.sampled_from([0.0, 0.3]))
def test_frequent_pigeonhole(k, n, m, seed, rate):
    fam = AdvisedFamily.random(k, n, m, seed, undefined_rate=rate)
    b = range_bound_b(fam)
    assert b == _all_range_values(1 << m, fam.K)
    s, count = frequent_range(fam)
    assert count == sum(1 for x in all_strings(n) if range_of(fam, x) == s)
    assert count >= -(-(1 << n) // b)
    assert len(s) <= fam.K


def test_greedy_examples():
    cover, trace = greedy_range_cover(AdvisedFamily(0, [undefined(3, 1)]), trace=True)
    assert cover == (frozenset(), 8) and trace.stopped == "failed"
    assert greedy_range_cover(AdvisedFamily(0, [const(1, 2, "0")])) == ({"0"}, 4)
    fam = AdvisedFamily.random(1, 8, 2, seed=1)
    cover = greedy_range_cover(fam)
    assert greedy_bound(fam) == Fraction(256, 125)
    assert cover.count >= 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2), st.integers(1, 6), st.integers(1, 3), st.integers(0, 2 ** 32 - 1),
       st.sampled_from([0.0, 0.3]))
def test_greedy_pigeonhole(k, n, m, seed, rate):
    fam = AdvisedFamily.random(k, n, m, seed, undefined_rate=rate)
    (s, count), trace = greedy_range_cover(fam, trace=True)
    assert count >= greedy_bound(fam)
    assert s == frozenset(trace.chosen)
    # telescoping: after i picks at least 2^n / T^i Ranges stay marked
    T = (1 << m) + 1
    for i, size in enumerate(trace.marked_sizes):
        assert size * T ** i >= 1 << n


# two-source witness

def test_two_source_alpha_m_matches_popular():
    f = random_grid(2, 2, 2, 3)
    w = two_source_witness(f, 2, literal_system(4))
    assert (w.a, w.preimage_size) == tuple(most_popular_output(f))


def test_two_source_constant():
    w = two_source_witness(const(2, 2, "01"), 1, literal_system(4))
    assert w.preimage_size == 16 and w.a == "0"


def test_two_source_and_grid():
    def ands(x, y):
        return "".join(str(int(a) & int(b)) for a, b in zip(x, y))
    f = FunctionGrid.from_function(2, 2, 2, ands)
    w = two_source_witness(f, 1, literal_system(4))
    assert w.a == "0" and w.preimage_size == 12
    assert f(w.x, w.y)[0] == "0"


def test_two_source_prefers_complex_pairs():
    sys = DescriptionSystem([("0", "", "0000"), ("10", "", "0111"), ("110", "", "1110")])
    f = const(2, 2, "1")
    w = two_source_witness(f, 1, sys)
    assert (w.x, w.y) == ("11", "10") and w.c_xy == 3


def test_prefix_grid_range():
    with pytest.raises(KextractError):
        prefix_grid(random_grid(2, 1, 1, 0), 2)


# min-entropy

def test_min_entropy_examples():
    m = min_entropy(FiniteDistribution.uniform(all_strings(3)))
    assert m.p_max == Fraction(1, 8) and m.h_infinity == 3
    m = min_entropy(FiniteDistribution({"1": 1}))
    assert m.p_max == 1 and m.h_infinity == 0
    m = min_entropy(FiniteDistribution({"a0": Fraction(1, 2), "b": Fraction(1, 4), "c": Fraction(1, 4)}))
    assert m.p_max == Fraction(1, 2) and m.h_infinity == 1


def test_distribution_validation():
    with pytest.raises(KextractError):
        FiniteDistribution({"0": Fraction(1, 2)})
    with pytest.raises(KextractError):
        FiniteDistribution({"0": 1, "1": 0})


def test_distribution_file_roundtrip():
    d = FiniteDistribution({("", "01"): Fraction(1, 3), ("1", "0"): Fraction(2, 3)})
    text = d.dumps()
    assert text == ".,01 1/3\n1,0 2/3\n"
    assert FiniteDistribution.loads(text) == d
    with pytest.raises(ParseError):
        FiniteDistribution.loads("0 1/2\n")
    with pytest.raises(ParseError):
        FiniteDistribution.loads("0 1/2\n0 1/2\n")


def _check_adversary(f, alpha):
    # independent recount of every inequality from the support
    joint, r = min_entropy_adversary(f, alpha)
    n, m = f.n, f.m
    support = joint.support
    assert len(support) == 1 << (2 * n - alpha)
    assert set(support.values()) == {Fraction(1, len(support))}
    assert all(f(*xy)[:alpha] == r.a for xy in support)
    xs = Counter(x for x, _ in support)
    ys = Counter(y for _, y in support)
    assert Fraction(max(xs.values()), len(support)) <= Fraction(2) ** (alpha - n)
    assert Fraction(max(ys.values()), len(support)) <= Fraction(2) ** (alpha - n)
    hits = sum(1 for xy in support if f(*xy) == r.a + r.b)
    assert hits * (1 << (m - alpha)) >= len(support)
    assert r.ok
    return joint, r


def test_adversary_alpha_m_constant():
    f = FunctionGrid.from_function(2, 1, 0, lambda x, y: "")
    joint, r = _check_adversary(f, 0)
    assert set(joint.support) == {(x, y) for x in "01" for y in "01"}
    assert joint.marginal(0) == FiniteDistribution.uniform("01")
    assert joint.pushforward(lambda xy: f(*xy)).support == {"": 1}


def test_adversary_alpha_equals_m_full_output():
    f = const(2, 1, "1")
    joint, r = _check_adversary(f, 1)
    assert r.pr_designated == 1


def test_adversary_boundary():
    f = random_grid(2, 2, 2, 6)
    joint, r = _check_adversary(f, 2)
    assert r.output_max == 1 and r.output_bound == 1


def test_adversary_exhaustive_small():
    # every total f: {0,1} x {0,1} -> {0,1}^2
    for values in itertools.product(all_strings(2), repeat=4):
        f = FunctionGrid(2, 1, 2, values)
        for alpha in range(3):
            _check_adversary(f, alpha)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 4), st.data())
def test_adversary_random(n, m, data):
    alpha = data.draw(st.integers(0, min(m, 2 * n)))
    f = random_grid(2, n, m, data.draw(st.integers(0, 2 ** 32 - 1)))
    _check_adversary(f, alpha)


def test_adversary_rejects_partial():
    with pytest.raises(PartialFunctionError):
        min_entropy_adversary(random_grid(2, 2, 2, 0, undefined_rate=0.5), 1)


# amplification harness

def _conds(n):
    return list(strings_upto(n))


def test_harness_projection_fails_task_1():
    f1 = FunctionGrid.from_function(2, 2, 2, lambda x, y: x)
    sys = literal_system(4, conditions=_conds(2))
    r = amplification_harness(f1, f1, sum_mod_table(2, 2), sys, Task(1, 0, 0, 2, 0))
    assert r.u == r.v
    assert r.values["dep_uv"] == len(r.u)
    assert r.clauses["task_1"] is False
    assert "task_1" in r.failing


def test_harness_constants_fail_task_2():
    f = const(2, 2, "00")
    sys = literal_system(4, conditions=_conds(2))
    r = amplification_harness(f, f, sum_mod_table(2, 2), sys, Task(1, 1, 0, 2, 2))
    assert r.values["c_u"] == 2 and r.values["complexity_floor"] == 3
    assert r.clauses["task_2"] is False


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 2 ** 32 - 1), st.integers(0, 1000))
def test_harness_consistency(s1, s2, sys_seed):
    f1, f2 = random_grid(2, 2, 2, s1), random_grid(2, 2, 2, s2)
    T = sum_mod_table(2, 2)
    sys = random_system(4, sys_seed, conditions=_conds(2), coverage=0.7)
    r = amplification_harness(f1, f2, T, sys, Task(1, 1.0, 1.0, 2, 1.0))
    assert r.values["consistent"]
    assert compose(f1, f2, T)(r.x, r.y) == r.z
    c = sys.complexity(r.z)
    assert r.values["c_z"] == (None if c is BOTTOM else c)


def test_harness_length_mismatch():
    f = const(2, 2, "000")
    with pytest.raises(LengthMismatch):
        amplification_harness(f, f, sum_mod_table(2, 2), literal_system(2), Task(1, 0, 0, 3, 0))
    with pytest.raises(LengthMismatch):
        amplification_harness(f, f, sum_mod_table(2, 2), literal_system(2), Task(1, 0, 0, 2, 0))


def test_range_bound_caps_at_all_subsets():
    # K = 7 functions but only M = 2 outputs: every subset is a possible Range
    fam = AdvisedFamily.random(2, 3, 1, 0)
    assert range_bound_b(fam) == binom_sum(2, 2) == 4
