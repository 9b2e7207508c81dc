from fractions import Fraction

import numpy as np
import pytest

from orbifold_index.geometry import Circle, Domain
from orbifold_index.group_action import GroupElement, close_group, rotation_matrix
from orbifold_index.scenario import hexagonal_disk
from orbifold_index.simplicial import QuotientPresentation, trivial_presentation


def rim_perm(shift: int) -> tuple[int, ...]:
    return (0,) + tuple(1 + (k + shift) % 6 for k in range(6))


@pytest.fixture
def disk():
    return hexagonal_disk()


@pytest.fixture
def unit_domain(disk):
    return Domain.with_circles(disk, [Circle([0.0, 0.0], 1.0, 1)])


@pytest.fixture
def z3(disk):
    G = close_group([GroupElement(rotation_matrix(Fraction(1, 3)), rim_perm(2))])
    return QuotientPresentation(disk, G)


@pytest.fixture
def z2(disk):
    G = close_group([GroupElement(-np.eye(2), rim_perm(3))])
    return QuotientPresentation(disk, G)


@pytest.fixture
def trivial(disk):
    return trivial_presentation(disk)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
