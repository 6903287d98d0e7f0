import pytest
from hypothesis import given, settings, strategies as st

from kextract.core import strings_upto
from kextract.errors import DuplicateKey, ParseError, UndefinedComplexity
from kextract.oracle import (BOTTOM, DescriptionSystem, complexity, dep, literal_system,
                             load_system, profile_set, random_system, soi_slack)


def test_load_single_line():
    s = load_system(b"0 | . -> 101")
    assert s.entries == [("0", "", "101")]


def test_load_empty_and_comments():
    assert len(load_system(b"")) == 0
    assert len(load_system("# nothing\n\n   # more\n")) == 0


def test_load_whitespace_tolerant():
    s = load_system("  10|1  ->   .  ")
    assert s.entries == [("10", "1", "")]


def test_load_duplicate_key():
    with pytest.raises(DuplicateKey) as exc:
        load_system("0 | . -> 1\n0 | . -> 11\n")
    assert exc.value.line == 2


@pytest.mark.parametrize("text, line", [
    ("0 | . 101", 1),
    ("# c\n0 -> 1", 2),
    ("0 | 2 -> 1", 1),
    ("0 |  -> 1", 1),
])
def test_load_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        load_system(text)
    assert exc.value.line == line


def test_dumps_roundtrip():
    s = random_system(3, seed=5, conditions=["", "0", "11"])
    assert load_system(s.dumps()) == s


@pytest.mark.parametrize("entries, x, expected", [
    ([("0", "", "101")], "101", 1),
    ([("0", "", "101")], "11", BOTTOM),
    ([("0", "", "1"), ("10", "", "1")], "1", 1),
])
def test_complexity_examples(entries, x, expected):
    assert complexity(DescriptionSystem(entries), x, "") == expected


def test_bottom_ordering():
    assert BOTTOM > 10 ** 9
    assert not BOTTOM < 0
    assert 3 < BOTTOM
    assert BOTTOM >= 5 and not (BOTTOM <= 5)
    assert BOTTOM == BOTTOM


def test_conditional_uses_condition():
    s = DescriptionSystem([("", "1", "0"), ("00", "", "0")])
    assert complexity(s, "0", "1") == 0
    assert complexity(s, "0") == 2
    assert complexity(s, "0", "0") is BOTTOM


def test_dep_example():
    x, y = "01", "10"
    s = DescriptionSystem([("00", "", x), ("11", "", y), ("0", y, x), ("00", x, y)])
    r = dep(s, x, y)
    assert (r.c_x, r.c_x_given_y, r.c_y, r.c_y_given_x) == (2, 1, 2, 2)
    assert r.dep == 1


def test_dep_self():
    x = "101"
    s = DescriptionSystem([("000", "", x), ("", x, x)])
    assert dep(s, x, x).dep == 3


def test_dep_undefined_names_first_missing():
    s = DescriptionSystem([("0", "1", "0")])
    with pytest.raises(UndefinedComplexity) as exc:
        dep(s, "0", "1")
    assert exc.value.quantity == "C(x)"
    s = DescriptionSystem([("0", "", "0"), ("1", "", "1")])
    with pytest.raises(UndefinedComplexity) as exc:
        dep(s, "0", "1")
    assert exc.value.quantity == "C(x|y)"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_dep_symmetric(seed):
    strings = list(strings_upto(2))
    s = random_system(2, seed, conditions=strings)
    for x in strings:
        for y in strings:
            try:
                d1 = dep(s, x, y).dep
            except UndefinedComplexity:
                continue
            assert d1 == dep(s, y, x).dep


def test_profile_examples():
    s = DescriptionSystem([("", "", "0"), ("0", "", "1"), ("1", "", "11")])
    assert len(profile_set(s, 1, "", 1)) <= 3
    assert profile_set(s, 1, "", 1) == {"0", "1"}
    assert profile_set(DescriptionSystem(), 3, "", 2) == frozenset()
    outs = ["000", "001", "010", "011", "100"]
    progs = ["", "0", "1", "00", "01"]
    s = DescriptionSystem([(p, "", o) for p, o in zip(progs, outs)] + [("10", "", "1")])
    assert profile_set(s, 2, "", 3) == set(outs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 5))
def test_profile_counting_and_monotone(seed, max_program):
    s = random_system(4, seed, conditions=["", "1"], max_program=max_program, coverage=0.8)
    for cond in ("", "1"):
        for length in range(5):
            prev = frozenset()
            for t in range(9):
                ps = profile_set(s, t, cond, length)
                assert len(ps) <= 2 ** (t + 1) - 1
                assert prev <= ps
                prev = ps


def test_literal_system():
    s = literal_system(3, conditions=["", "01"])
    for x in strings_upto(3):
        assert complexity(s, x) == len(x)
    assert complexity(s, "01", "01") == 0
    assert complexity(s, "11", "01") == 2
    assert complexity(s, "", "01") is BOTTOM
    plain = literal_system(2, conditions=["", "1"], copy=False)
    assert complexity(plain, "1", "1") == 1


def test_random_system_deterministic():
    a = random_system(3, 42, conditions=["", "0"])
    b = random_system(3, 42, conditions=["", "0"])
    assert a == b and a.dumps() == b.dumps()
    assert a != random_system(3, 43, conditions=["", "0"])


def test_random_system_output_lengths():
    s = random_system(3, 1, output_lengths=[3])
    assert all(len(o) == 3 for _, _, o in s.entries)
    assert len(s) == 8


def test_soi_empty_strings():
    s = DescriptionSystem([("", "", "")])
    r = soi_slack(s, "", "")
    assert (r.a, r.b, r.c) == (0.0, 0.0, 0.0)
    r = soi_slack(s, "", "", const=1.5)
    assert (r.a, r.b) == (1.5, 1.5)


def test_soi_violation_is_reported():
    x, y = "0", "1"
    # C(xy) huge relative to C(y) + C(x|y)
    s = DescriptionSystem([("", "", x), ("0", "", y), ("", y, x), ("", x, y),
                           ("000000000", "", x + y)])
    r = soi_slack(s, x, y)
    assert r.a < 0


def _brute_force_satisfying_system():
    # smallest lengths (cx, cy, cxy, cx|y, cy|x) in [0, 3] satisfying (a)-(c) with x != y
    import itertools
    x, y = "0", "1"
    for cx, cy, cxy, cxgy, cygx in itertools.product(range(4), repeat=5):
        if cx == cy:
            continue  # distinct unconditional programs need distinct lengths here
        s = DescriptionSystem([("0" * cx, "", x), ("0" * cy, "", y), ("1" * cxy + "1", "", x + y),
                               ("0" * cxgy, y, x), ("0" * cygx, x, y)])
        r = soi_slack(s, x, y)
        if min(r.a, r.b, r.c) >= 0:
            return s
    return None


def test_soi_satisfying_instance():
    s = _brute_force_satisfying_system()
    assert s is not None
    r = soi_slack(s, "0", "1")
    assert r.a >= 0 and r.b >= 0 and r.c >= 0


def test_soi_unequal_lengths_skips_c():
    lit = literal_system(3, conditions=["", "0", "01"])
    assert soi_slack(lit, "0", "01").c is None


def test_determinism_of_loaded_systems():
    text = random_system(3, 9, conditions=["", "1"]).dumps()
    a, b = load_system(text), load_system(text.encode())
    for x in strings_upto(3):
        for c in ("", "1"):
            assert complexity(a, x, c) == complexity(b, x, c)
