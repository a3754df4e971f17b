from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullforcing.dyadic_cantor import (
    ClopenEnumeration,
    ClopenSet,
    Dyadic,
    ScaleFunction,
    union_all,
)
from nullforcing.errors import DepthExhausted, PreconditionViolated, ValidationError

# -- oracle: a clopen set as a python set of depth-D address strings ----------

D = 4


def as_strings(X: ClopenSet, depth: int = D) -> frozenset[str]:
    return frozenset(format(a, f"0{depth}b") for a in X.addresses(depth))


clopen_sets = st.integers(0, D).flatmap(
    lambda d: st.integers(0, (1 << (1 << d)) - 1).map(lambda m: ClopenSet.make(d, m))
)
dyadics = st.builds(Dyadic.of, st.integers(-1000, 1000), st.integers(0, 12))


# -- Dyadic ----------------------------------------------------------------------


@given(dyadics, dyadics)
def test_dyadic_arithmetic_matches_fractions(x, y):
    fx, fy = x.to_fraction(), y.to_fraction()
    assert (x + y).to_fraction() == fx + fy
    assert (x - y).to_fraction() == fx - fy
    assert (x * y).to_fraction() == fx * fy
    assert (x < y) == (fx < fy)
    assert (x == y) == (fx == fy)


@given(dyadics, st.integers(-8, 8))
def test_dyadic_scale(x, k):
    assert x.scale(k).to_fraction() == x.to_fraction() * Fraction(2) ** k


@given(dyadics)
def test_dyadic_canonical(x):
    # exponents are non-negative, so even integers keep exponent 0
    assert x.mantissa % 2 == 1 or x.exponent == 0
    if x.mantissa == 0:
        assert x.exponent == 0


def test_dyadic_rejects_non_canonical():
    with pytest.raises(ValidationError):
        Dyadic(2, 3)
    assert str(Dyadic.of(2, 2)) == "1/2"


# -- scale function --------------------------------------------------------------


def test_min_log_values(min_log):
    # h(n) = h(n-1) + ceil(log2(n+1)), computed by hand
    assert [min_log(n) for n in range(10)] == [0, 1, 3, 5, 8, 11, 14, 17, 21, 25]


def test_n_squared_values():
    h = ScaleFunction.n_squared(6)
    assert [h(n) for n in range(7)] == [0, 1, 4, 9, 16, 25, 36]


@pytest.mark.parametrize("h", [ScaleFunction.min_log(200), ScaleFunction.n_squared(200)])
def test_scale_growth_constraint(h):
    for n in range(1, h.n_max + 1):
        assert 2 ** (h(n) - h(n - 1)) >= n + 1
        assert h.measure(n - 1) >= h.measure(n) * (n + 1)


def test_scale_function_validation():
    with pytest.raises(ValidationError):
        ScaleFunction((0, 1, 2))  # 2^(2-1) = 2 < 3
    with pytest.raises(ValidationError):
        ScaleFunction((0, 0))
    with pytest.raises(DepthExhausted):
        ScaleFunction((0, 1))(2)


def test_scale_spec_roundtrip():
    assert ScaleFunction.from_spec("min_log").to_spec() == "min_log"
    assert ScaleFunction.from_spec([0, 1, 3]).to_spec() == [0, 1, 3]
    with pytest.raises(ValidationError):
        ScaleFunction.from_spec("cubic")


# -- clopen algebra ----------------------------------------------------------------


def test_algebra_examples():
    X = ClopenSet.from_strings(["00", "11"])
    c0 = ClopenSet.cylinder("0")
    assert ClopenSet.whole() & X == X
    assert (c0 - c0).is_empty()
    assert not X.issubset(c0)
    assert ClopenSet.whole().measure() == 1
    assert c0.measure() == Dyadic.of(1, 1)
    assert X.measure() == Dyadic.of(1, 1)


@given(clopen_sets, clopen_sets)
def test_algebra_matches_address_sets(X, Y):
    sx, sy = as_strings(X), as_strings(Y)
    assert as_strings(X | Y) == sx | sy
    assert as_strings(X & Y) == sx & sy
    assert as_strings(X - Y) == sx - sy
    assert X.issubset(Y) == (sx <= sy)
    assert X.isdisjoint(Y) == (not sx & sy)
    assert X.measure().to_fraction() == Fraction(len(sx), 1 << D)


@given(clopen_sets)
def test_complement_and_canonical(X):
    assert as_strings(~X) == as_strings(ClopenSet.whole()) - as_strings(X)
    assert ClopenSet.make(X.depth, X.mask) == X
    # refine then canonicalize is the identity
    assert ClopenSet.make(D, X.refined(D)) == X


@given(clopen_sets, clopen_sets)
def test_measure_modularity(X, Y):
    assert (X | Y).measure() + (X & Y).measure() == X.measure() + Y.measure()


def test_non_canonical_rejected():
    with pytest.raises(ValidationError):
        ClopenSet(1, 0b11)  # both halves present: that is the whole space


def test_contains_point():
    X = ClopenSet.from_strings(["01"])
    assert X.contains_point("0110")
    assert not X.contains_point("10")


# -- enumeration -----------------------------------------------------------------


def test_enumeration_examples(tiny_enum):
    strs = [sorted(as_strings(c, 2)) for c in tiny_enum.enumerate(1, 6)]
    assert strs[:2] == [["00", "01"], ["10", "11"]]
    assert [sorted(as_strings(c, 2)) for c in tiny_enum.enumerate(1, 6)[2:]] == [
        ["00", "10"],
        ["00", "11"],
        ["01", "10"],
        ["01", "11"],
    ]
    assert tiny_enum.enumerate(0, 1) == [ClopenSet.whole()]
    with pytest.raises(DepthExhausted):
        tiny_enum.enumerate(0, 2)


def _brute_force_stage(h_n: int, depth: int) -> list[ClopenSet]:
    """Every measure-2^-h_n set with minimal support depth in [h_n, depth],
    in (depth, lexicographic address list) order."""
    out = []
    for d in range(h_n, depth + 1):
        k = 1 << (d - h_n)
        for combo in combinations(range(1 << d), k):
            X = ClopenSet.from_addresses(d, combo)
            if X.depth == d:
                out.append(X)
    return out


def test_enumeration_matches_brute_force(tiny_enum):
    assert tiny_enum.enumerate(1, 2 + 6 + 56) == _brute_force_stage(1, 3)[: 2 + 6 + 56]


def test_enumeration_stage_two_brute_force(enum):
    # h(2) = 3: 8 singletons, then depth-4 pairs that are not sibling pairs
    expected = _brute_force_stage(3, 4)
    assert enum.enumerate(2, len(expected)) == expected


@pytest.mark.parametrize("n", [1, 2, 3])
def test_first_sixteen_distinct_and_inverse(enum, min_log, n):
    sets = enum.enumerate(n, 16)
    assert len(set(sets)) == 16
    assert all(c.measure() == Dyadic.pow2(-min_log(n)) for c in sets)
    assert [enum.index_of(n, c) for c in sets] == list(range(16))


def test_index_of_rejects_wrong_measure(enum):
    with pytest.raises((PreconditionViolated, ValidationError)):
        enum.index_of(1, ClopenSet.from_strings(["000"]))


def test_min_index_inside_examples(tiny_enum):
    assert tiny_enum.min_index_inside(1, ClopenSet.cylinder("1")) == 1
    assert tiny_enum.min_index_inside(0, ClopenSet.whole()) == 0
    assert tiny_enum.min_index_inside(1, ClopenSet.cylinder("0")) == 0
    with pytest.raises(PreconditionViolated):
        tiny_enum.min_index_inside(1, ClopenSet.from_strings(["00"]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 255).map(lambda m: ClopenSet.make(3, m)))
def test_min_index_inside_is_least(X):
    E = ClopenEnumeration(ScaleFunction((0, 1, 3)))
    n = 1 if X.measure() >= Dyadic.of(1, 1) else 2
    if X.measure() < Dyadic.pow2(-E.h(n)):
        return
    i = E.min_index_inside(n, X)
    assert E.clopen(n, i).issubset(X)
    assert not any(E.clopen(n, j).issubset(X) for j in range(i))


def test_union_all():
    parts = [ClopenSet.cylinder("00"), ClopenSet.cylinder("01")]
    assert union_all(parts) == ClopenSet.cylinder("0")
    assert union_all([]).is_empty()
