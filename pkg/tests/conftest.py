import sys
from pathlib import Path

import pytest

from weightglue import CoefficientRing, Poset, build_glued_ws, chain_poset, constant_sheaf, singleton_stratification

sys.path.insert(0, str(Path(__file__).parent))

ZZ_RING = CoefficientRing.integers()


def diamond() -> Poset:
    return Poset(["a", "b", "c", "d"], [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


class S2Objects:
    """The two-point space z < u with its standard sheaves."""

    def __init__(self, ring=ZZ_RING):
        self.ring = ring
        self.P = chain_poset(["z", "u"])
        self.CONST = constant_sheaf(self.P, ring, name="CONST")
        self.ZZ = constant_sheaf(self.P, ring, {"z"}, name="ZZ")
        self.ZU = constant_sheaf(self.P, ring, {"u"}, name="ZU")
        self.w = build_glued_ws(singleton_stratification(self.P), ring)


@pytest.fixture(scope="session")
def s2():
    return S2Objects()


@pytest.fixture(scope="session")
def s2_mod4():
    return S2Objects(CoefficientRing.integers_mod(4))


@pytest.fixture(scope="session")
def chain3():
    return chain_poset("abc")


@pytest.fixture(scope="session")
def diamond_poset():
    return diamond()


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
