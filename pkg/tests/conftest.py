import numpy as np
import pytest

from skewconley import build_grid, build_transition, enumerate_pairs, make_builtin, morse, sample_base
from skewconley.digraph import Digraph


def graph(n, edges):
    return Digraph.from_edges(n, edges)


@pytest.fixture(scope="session")
def double_well():
    return make_builtin("double-well")


@pytest.fixture(scope="session")
def dw_graph(double_well):
    """Double-well on [-2, 2] at depth 6, T = 0.5, no padding."""
    grid = build_grid([-2.0], [2.0], [6])
    g = build_transition(double_well, grid, sample_base(double_well.base, 1, 0.5), eps_pad=0.0)
    md = morse(g)
    return g, md, enumerate_pairs(g, md)


@pytest.fixture(scope="session")
def growth_graph():
    sys = make_builtin("example-5-1")
    grid = build_grid([-2.0], [2.0], [8])
    g = build_transition(sys, grid, sample_base(sys.base, 8), eps_pad=0.0)
    md = morse(g)
    return g, md, enumerate_pairs(g, md)


def box_near(grid, x):
    return int(grid.box_of(np.atleast_1d(float(x))))
