import pytest

from nullforcing.dyadic_cantor import ClopenEnumeration, ScaleFunction
from nullforcing.ranked_poset import RankedPoset


@pytest.fixture(scope="session")
def min_log():
    return ScaleFunction.min_log()


@pytest.fixture(scope="session")
def enum(min_log):
    return ClopenEnumeration(min_log)


@pytest.fixture(scope="session")
def tiny_enum():
    # h = [0, 1]
    return ClopenEnumeration(ScaleFunction((0, 1)))


@pytest.fixture
def chain2():
    return RankedPoset(["a", "b"], [("a", "b")], ["a", "b"])


@pytest.fixture
def antichain2():
    return RankedPoset(["a", "b"], [], ["a", "b"])


@pytest.fixture
def two_chains():
    return RankedPoset(["a0", "a1", "b0", "b1"], [("a0", "a1"), ("b0", "b1")], ["a0", "a1", "b1"])
