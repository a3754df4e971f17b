import random

from hypothesis import given, settings
from hypothesis import strategies as st

from nullforcing.generators import random_ops, random_poset
from nullforcing.names import CheckName, GroundFunction, RSlalomName, decide, name_from_json
from nullforcing.nq_forcing import Entry, NQCondition, NQForcing
from nullforcing.slaloms import PartialSlalom, r_phi


def test_ground_function():
    g = GroundFunction((1, 2, 0, 0), 0)
    assert g.prefix == (1, 2)
    assert [g(n) for n in range(4)] == [1, 2, 0, 0]
    assert g == GroundFunction((1, 2), 0)
    assert repr(GroundFunction.constant(5)) == "g≡5"


def test_decide_examples(chain2, tiny_enum):
    assert decide(CheckName(GroundFunction.constant(4)), NQCondition(), 9, tiny_enum) == 4
    assert decide(RSlalomName("a"), NQCondition(), 0, tiny_enum) is None
    c = NQCondition({"a": Entry(PartialSlalom.of((), (0,)), 0, frozenset())})
    assert decide(RSlalomName("a"), c, 1, tiny_enum) == 1
    assert decide(RSlalomName("a"), c, 2, tiny_enum) is None


def test_support(chain2):
    assert CheckName(GroundFunction()).support(chain2) == frozenset()
    assert RSlalomName("a").support(chain2) == {"a"}
    assert RSlalomName("b").support(chain2) == {"a", "b"}


def test_json():
    ground = {"g": GroundFunction((1,), 2)}
    assert name_from_json("g", ground) == CheckName(GroundFunction((1,), 2))
    n = RSlalomName("x")
    assert name_from_json(n.to_json()) == n
    c = CheckName(GroundFunction((3, 4), 1))
    assert name_from_json(c.to_json()) == c


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_decision_monotone_along_extensions(enum, seed):
    rng = random.Random(seed)
    P = random_poset(rng)
    N = NQForcing(P, enum)
    chain = random_ops(N, NQCondition(), rng, 6)
    names = [RSlalomName(x) for x in P]
    for i, c in enumerate(chain):
        for later in chain[i:]:
            for f in names:
                for n in range(8):
                    v = decide(f, c, n, enum)
                    if v is not None:
                        assert decide(f, later, n, enum) == v
        for x in c:
            s = c[x].s
            if len(s):
                assert [decide(RSlalomName(x), c, n, enum) for n in range(len(s))] == list(r_phi(s, enum).values)
