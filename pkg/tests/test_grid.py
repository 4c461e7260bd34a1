import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewconley import IncompatibleSampling, TooManyBoxes, build_grid, sample_base, shift, subdivide
from skewconley import base


def test_four_boxes_on_line():
    g = build_grid([-2.0], [2.0], [2])
    lo, hi = g.bounds(np.arange(4))
    assert lo[:, 0].tolist() == [-2, -1, 0, 1]
    assert hi[:, 0].tolist() == [-1, 0, 1, 2]


def test_box_of_half():
    assert build_grid([-2.0], [2.0], [2]).box_of(np.array([0.5])) == 2


def test_right_edge_belongs_to_last_box():
    assert build_grid([-2.0], [2.0], [2]).box_of(np.array([2.0])) == 3


def test_outside_window_is_minus_one():
    assert build_grid([-2.0], [2.0], [2]).box_of(np.array([2.5])) == -1


def test_unit_square_quarters():
    g = build_grid([0.0, 0.0], [1.0, 1.0], [1, 1])
    c = g.center(np.arange(4))
    assert sorted(map(tuple, c.tolist())) == [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]
    assert g.diameter == pytest.approx(math.sqrt(0.5))


def test_row_major_order():
    g = build_grid([0.0, 0.0], [4.0, 2.0], [2, 1])
    assert g.multi_index(np.arange(8)).tolist()[:3] == [[0, 0], [0, 1], [1, 0]]


def test_too_many_boxes():
    with pytest.raises(TooManyBoxes):
        build_grid([0.0, 0.0], [1.0, 1.0], [14, 14])


def test_bad_window():
    with pytest.raises(ValueError):
        build_grid([1.0], [1.0], [2])


def test_subdivide_children():
    g = build_grid([-2.0], [2.0], [2])
    f = subdivide(g)
    assert f.n_boxes == 8
    assert sorted(g.children([2], [0]).ravel().tolist()) == [4, 5]
    assert (f.lo, f.hi) == (g.lo, g.hi)


def test_two_subdivisions_compose():
    g = build_grid([0.0, -1.0], [3.0, 1.0], [2, 3])
    twice = subdivide(subdivide(g))
    direct = build_grid(g.lo, g.hi, [4, 5])
    assert twice == direct
    boxes = np.arange(twice.n_boxes)
    once = subdivide(g)
    assert np.array_equal(twice.parent(boxes, g), once.parent(twice.parent(boxes, once), g))


def test_children_tile_parent_exactly():
    g = build_grid([0.0, 0.0], [1.0, 2.0], [2, 2])
    f = subdivide(g, [1])
    for b in range(g.n_boxes):
        kids = np.asarray(g.children([b], [1])).ravel()
        lo, hi = f.bounds(kids)
        plo, phi = g.bounds([b])
        assert np.allclose(lo.min(axis=0), plo[0]) and np.allclose(hi.max(axis=0), phi[0])
        assert np.all(f.parent(kids, g) == b)


@settings(max_examples=30, deadline=None)
@given(depth=st.lists(st.integers(0, 4), min_size=1, max_size=3),
       lo=st.floats(-5, 0), width=st.floats(0.5, 10))
def test_tiling_and_round_trip(depth, lo, width):
    d = len(depth)
    g = build_grid([lo] * d, [lo + width] * d, depth)
    boxes = np.arange(g.n_boxes)
    assert np.array_equal(g.box_of(g.center(boxes)), boxes)
    blo, bhi = g.bounds(boxes)
    # equal widths and total volume = window volume
    assert np.allclose(bhi - blo, g.widths)
    assert np.prod(g.widths) * g.n_boxes == pytest.approx(width ** d)
    # corners of boxes sit on the lattice, so interiors are disjoint
    idx = g.multi_index(boxes)
    assert len({tuple(r) for r in idx.tolist()}) == g.n_boxes
    assert np.allclose(np.linalg.norm(bhi - blo, axis=1), g.diameter)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-2, 2))
def test_point_lies_in_its_box(x):
    g = build_grid([-2.0], [2.0], [6])
    b = g.box_of(np.array([x]))
    lo, hi = g.bounds([b])
    assert lo[0, 0] <= x <= hi[0, 0]


# base sampling ---------------------------------------------------------------


def test_periodic_sampling():
    s = sample_base(base.periodic(1.0), 4)
    assert list(s.samples) == [0.0, 0.25, 0.5, 0.75]
    assert s.T == 0.25
    assert s.perm == (1, 2, 3, 0)


def test_trivial_sampling_needs_T():
    with pytest.raises(IncompatibleSampling):
        sample_base(base.trivial(), 1)
    s = sample_base(base.trivial(), 1, 0.5)
    assert s.samples == (0.0,) and s.perm == (0,) and s.T == 0.5


def test_finite_sampling_uses_shift():
    s = sample_base(base.cyclic_shift(3), 3)
    assert s.perm == (1, 2, 0)


def test_finite_sampling_size_mismatch():
    with pytest.raises(IncompatibleSampling):
        sample_base(base.cyclic_shift(3), 2)


def test_line_window_sampling():
    s = sample_base(base.line((-2.0, 2.0)), 8)
    assert s.T == 0.5 and s.samples[0] == -2.0 and s.samples[-1] == 1.5


@pytest.mark.parametrize("m", [1, 3, 7, 16, 100])
def test_shift_permutes_periodic_samples(m):
    b = base.periodic(2 * math.pi)
    s = sample_base(b, m)
    for i, p in enumerate(s.samples):
        q = shift(b, p, s.T)
        j = s.perm[i]
        d = abs(q - s.samples[j])
        assert min(d, 2 * math.pi - d) <= 1e-12
    assert m * s.T == pytest.approx(2 * math.pi, rel=1e-15)
