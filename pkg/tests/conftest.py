import pytest

from compensation import FactorCode, MPWOrder, ShiftSpace


@pytest.fixture
def e1():
    """Full 3-shift with a, b -> 0 and c -> 1, ordered a < b < c."""
    space = ShiftSpace.full("abc")
    return space, FactorCode({"a": "0", "b": "0", "c": "1"}), MPWOrder(("a", "b", "c"))


@pytest.fixture
def golden():
    return ShiftSpace.from_forbidden_pairs("01", ["11"])


@pytest.fixture
def full2():
    return ShiftSpace.full("01")


@pytest.fixture
def even_edges():
    """Edge shift of the standard even-shift graph; e1 is the 1-loop, e2/e3 the 0-path."""
    space = ShiftSpace(("e1", "e2", "e3"),
                       frozenset([("e1", "e1"), ("e1", "e2"), ("e2", "e3"), ("e3", "e1"), ("e3", "e2")]))
    return space, FactorCode({"e1": "1", "e2": "0", "e3": "0"})
