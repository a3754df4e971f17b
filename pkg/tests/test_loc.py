import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullforcing.errors import PreconditionViolated, ValidationError
from nullforcing.loc import (
    LocCondition,
    LocStarCondition,
    loc_add_function,
    loc_leq,
    loc_link,
    loc_linked_key,
    loc_prolong,
    loc_star_add_function,
    loc_star_generic_run,
    loc_star_leq,
    loc_star_link,
    loc_star_linked_key,
    loc_star_prolong,
)
from nullforcing.names import GroundFunction
from nullforcing.slaloms import PartialSlalom

g = GroundFunction.constant
grounds = st.builds(GroundFunction, st.lists(st.integers(0, 5), max_size=4).map(tuple), st.integers(0, 5))


@st.composite
def loc_star_conditions(draw):
    """Built from the empty condition by density operations only."""
    p = LocStarCondition(PartialSlalom(), 0, frozenset())
    for _ in range(draw(st.integers(0, 6))):
        if draw(st.booleans()):
            p = loc_star_add_function(p, draw(grounds))
        else:
            p = loc_star_prolong(p, len(p.s) + draw(st.integers(0, 3)))
    return p


def test_condition_invariant():
    with pytest.raises(ValidationError):
        LocStarCondition(PartialSlalom.of(()), 2, frozenset())
    with pytest.raises(ValidationError):
        LocStarCondition(PartialSlalom.of((), ()), 1, frozenset({g(0), g(1)}))


def test_leq_examples():
    q = LocStarCondition(PartialSlalom.of(()), 1, {g(0)})
    p = LocStarCondition(PartialSlalom.of((), (0,)), 1, {g(0)})
    assert loc_star_leq(p, p)
    assert loc_star_leq(p, q)
    bad = LocStarCondition(PartialSlalom.of((), (1,)), 1, {g(0)})
    assert not loc_star_leq(bad, q)


def test_prolong_examples():
    p = LocStarCondition(PartialSlalom.of(()), 0, frozenset())
    assert loc_star_prolong(p, 4).s == PartialSlalom.blank(4)
    p = LocStarCondition(PartialSlalom.of(()), 1, {g(5)})
    assert loc_star_prolong(p, 2) == LocStarCondition(PartialSlalom.of((), (5,)), 1, {g(5)})
    assert loc_star_prolong(p, 1) is p


def test_add_function_examples():
    p = LocStarCondition(PartialSlalom.of(()), 1, frozenset())
    assert loc_star_add_function(p, g(0)) == LocStarCondition(PartialSlalom.of((), ()), 2, {g(0)})
    p = LocStarCondition(PartialSlalom.of(()), 1, {g(3)})
    assert loc_star_add_function(p, g(7)) == LocStarCondition(PartialSlalom.of((), (3,)), 2, {g(3), g(7)})
    q = loc_star_add_function(p, g(3))
    assert g(3) in q.F and loc_star_leq(q, p)


def test_linked_key_examples():
    s = PartialSlalom.of((), ())
    assert loc_star_linked_key(LocStarCondition(s, 2, {g(0)})) == (s, 2)
    assert loc_star_linked_key(LocStarCondition(s, 1, {g(0)})) is None
    s4 = PartialSlalom.blank(4)
    p, q = LocStarCondition(s4, 4, {g(0)}), LocStarCondition(s4, 4, {g(1)})
    r = loc_star_link(p, q)
    assert r.F == {g(0), g(1)} and loc_star_leq(r, p) and loc_star_leq(r, q)
    with pytest.raises(PreconditionViolated):
        loc_star_link(p, LocStarCondition(s4, 3, {g(1)}))


@settings(max_examples=100, deadline=None)
@given(loc_star_conditions(), st.integers(0, 10), grounds)
def test_density(p, n, f):
    q = loc_star_prolong(p, n)
    assert loc_star_leq(q, p) and len(q.s) >= n
    q = loc_star_add_function(p, f)
    assert loc_star_leq(q, p) and f in q.F


@settings(max_examples=100, deadline=None)
@given(loc_star_conditions(), st.lists(st.tuples(st.booleans(), grounds, st.integers(0, 3)), max_size=6))
def test_order_laws_on_chains(p, steps):
    chain = [p]
    for add, f, k in steps:
        cur = chain[-1]
        chain.append(loc_star_add_function(cur, f) if add else loc_star_prolong(cur, len(cur.s) + k))
    for i, x in enumerate(chain):
        assert loc_star_leq(x, x)
        for y in chain[:i]:
            assert loc_star_leq(x, y)


@settings(max_examples=60, deadline=None)
@given(loc_star_conditions(), grounds)
def test_linkedness(p, f):
    # pad the width so both sides lie in the linked dense set
    w = max(p.w, 2 * (len(p.F) + 1))
    base = loc_star_prolong(LocStarCondition(p.s, p.w, p.F), w)
    p1 = LocStarCondition(base.s, w, base.F)
    p2 = LocStarCondition(base.s, w, frozenset({f}))
    assert loc_star_linked_key(p1) == loc_star_linked_key(p2) is not None
    r = loc_star_link(p1, p2)
    assert r.F == p1.F | {f}
    assert loc_star_leq(r, p1) and loc_star_leq(r, p2)


def test_generic_run_captures_functions():
    fs = [GroundFunction((3, 1, 4), 1), g(2), GroundFunction((0, 0, 0, 5), 0)]
    run = loc_star_generic_run([(0, fs[0]), (2, fs[1]), (5, fs[2])], 20)
    assert len(run.phi) >= 20
    for f in fs:
        assert run.captured(f)
        assert all(f(n) in run.phi[n] for n in range(run.thresholds[f], len(run.phi)))
    for a, b in zip(run.chain[1:], run.chain):
        assert loc_star_leq(a, b)


# -- plain LOC ---------------------------------------------------------------------


def test_plain_loc():
    p = LocCondition(PartialSlalom.of(()), frozenset())
    q = loc_add_function(p, g(4))
    assert loc_leq(q, p) and g(4) in q.F
    r = loc_prolong(q, 5)
    assert loc_leq(r, q) and loc_leq(r, p) and all(4 in r.s[n] for n in range(2, 5))
    assert loc_linked_key(r) == r.s
    assert loc_linked_key(LocCondition(PartialSlalom.of((), ()), {g(0)})) == PartialSlalom.of((), ())
    a, b = LocCondition(r.s, {g(4)}), LocCondition(r.s, {g(1)})
    c = loc_link(a, b)
    assert c.F == {g(1), g(4)}
    with pytest.raises(ValidationError):
        LocCondition(PartialSlalom.of(()), {g(0), g(1)})
