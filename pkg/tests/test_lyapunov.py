import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import box_near, graph
from skewconley import (attractor_from_seed, build_grid, complete_lyapunov, enumerate_pairs, lambda_ratio,
                        lyapunov_l, morse, pair_function, sup_g)
from skewconley.conley import make_pair


def test_cycle_with_tail():
    g = graph(4, [(0, 1), (1, 2), (2, 0), (3, 0)])
    md = morse(g)
    (pair,) = enumerate_pairs(g, md)
    l, rmax = pair_function(g, md, pair)
    assert l.tolist() == [0.0, 0.0, 0.0, 0.5] and rmax == 1
    assert not pair.R.any()


def test_transient_chain_ranks():
    # d2 -> d1 -> a (self loop)
    g = graph(3, [(0, 0), (1, 0), (2, 1)])
    md = morse(g)
    (pair,) = enumerate_pairs(g, md)
    l, rmax = pair_function(g, md, pair)
    assert l[1] == pytest.approx(1 / 3) and l[2] == pytest.approx(2 / 3) and rmax == 2


def test_two_point_cycles_values():
    p, q = 0, 1
    g = graph(2, [(p, p), (q, q)])
    md = morse(g)
    pairs = enumerate_pairs(g, md)
    assert pairs[0].A.tolist() == [True, False]
    f = complete_lyapunov(g, md, pairs)
    assert f.L[p] == pytest.approx(2 / 9) and f.L[q] == pytest.approx(2 / 3)


def test_single_sink_cycle_zero():
    g = graph(4, [(0, 1), (1, 2), (2, 1), (3, 0)])
    md = morse(g)
    f = complete_lyapunov(g, md, enumerate_pairs(g, md))
    assert f.L[1] == 0.0 and f.L[2] == 0.0
    assert f.report["ok"]


def test_double_well_pair_near_one(dw_graph):
    g, md, _ = dw_graph
    # seed the cyclic box just below 1, which the orbits from (0, 1) enter
    A = attractor_from_seed(g, md, int(md.scc_id[box_near(g.grid, 0.97)]))
    pair = make_pair(g, md, A)
    l, _ = pair_function(g, md, pair)
    assert l[box_near(g.grid, 0.97)] == 0.0
    assert l[box_near(g.grid, -1.0)] == 1.0 and l[box_near(g.grid, -1.5)] == 1.0
    S = pair.B & ~pair.A
    assert S[box_near(g.grid, 0.5)] and 0.0 < l[box_near(g.grid, 0.5)] < 1.0
    for v in np.nonzero(S)[0]:
        assert np.all(l[g.successors(v)] < l[v])


def test_double_well_field(dw_graph):
    g, md, pairs = dw_graph
    f = complete_lyapunov(g, md, pairs)
    r = f.report
    assert r["ok"] and r["monotone_violations"] == 0 and r["float_monotone_violations"] == 0
    vals = {c: f.L[md.members(c)[0]] for c in md.cyclic_ids}
    assert len(set(vals.values())) == len(vals)
    # one value per cluster at least: near -1, 0 and 1
    near = [f.L[box_near(g.grid, x)] for x in (-1.03, 0.03, 1.03)]
    assert len(set(near)) == 3
    e = g.edges()
    between = md.scc_id[e[:, 0]] != md.scc_id[e[:, 1]]
    transient_src = ~md.recurrent[e[:, 0]]
    assert np.all(f.L[e[between & transient_src, 1]] < f.L[e[between & transient_src, 0]])


def _ternary_digits(x, n):
    out = []
    for _ in range(n):
        x *= 3
        d = int(math.floor(x + 1e-9))
        out.append(d)
        x -= d
    return out


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=20))))
def test_field_properties_on_random_graphs(data):
    n, edges = data
    g = graph(n, edges)
    md = morse(g)
    pairs = enumerate_pairs(g, md)
    f = complete_lyapunov(g, md, pairs)
    assert f.report["ok"]
    e = g.edges()
    assert np.all(f.L[e[:, 1]] <= f.L[e[:, 0]] + 1e-15)
    same = md.scc_id[e[:, 0]] == md.scc_id[e[:, 1]]
    assert np.all(f.L[e[same, 1]] == f.L[e[same, 0]])
    for v in np.nonzero(md.recurrent)[0]:
        assert set(_ternary_digits(f.L[v], len(pairs))) <= {0, 2}
        for lk in f.l:
            assert lk[v] in (0.0, 1.0)
    for k, p in enumerate(pairs):
        assert np.all(f.l[k][p.A] == 0.0) and np.all(f.l[k][~p.B] == 1.0)
        S = p.B & ~p.A
        assert np.all((f.l[k][S] > 0) & (f.l[k][S] < 1))


# trajectory version -----------------------------------------------------------------


@pytest.fixture(scope="module")
def line_grid():
    return build_grid([-2.0], [2.0], [6])


def boxes_between(grid, a, b):
    lo, hi = grid.bounds(np.arange(grid.n_boxes))
    return np.nonzero((lo[:, 0] >= a - 1e-12) & (hi[:, 0] <= b + 1e-12))[0]


def test_lambda_zero_on_A():
    grid = build_grid([-2.0], [2.0], [4])
    A = boxes_between(grid, 0.75, 1.25)
    assert lambda_ratio([1.0], A, boxes_between(grid, -1.25, -0.75), grid) == 0.0


def test_lambda_empty_sets():
    grid = build_grid([-2.0], [2.0], [4])
    assert lambda_ratio([0.3], [], [], grid) == 0.5


def test_lambda_symmetric_point():
    grid = build_grid([-2.0], [2.0], [4])  # width 0.25; [0.75, 1.25] are two boxes
    lam = lambda_ratio([0.0], boxes_between(grid, 0.75, 1.25), boxes_between(grid, -1.25, -0.75), grid)
    assert lam == pytest.approx(0.5)


def test_lambda_uses_box_union_distance():
    grid = build_grid([-2.0], [2.0], [4])
    A = boxes_between(grid, 0.75, 1.25)
    R = boxes_between(grid, -1.25, -0.75)
    assert lambda_ratio([0.25], A, R, grid) == pytest.approx(0.5 / (0.5 + 1.0))


def test_lambda_wraps_on_circle():
    grid = build_grid([0.0], [2 * math.pi], [3], [True])
    A = [0]      # [0, pi/4)
    R = [4]      # [pi, 5pi/4)
    x = 2 * math.pi - 0.1
    assert lambda_ratio([x], A, R, grid) == pytest.approx(0.1 / (0.1 + (x - 1.25 * math.pi)))


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-2, 2))
def test_lambda_in_unit_interval(x):
    grid = build_grid([-2.0], [2.0], [6])
    lam = lambda_ratio([x], boxes_between(grid, 0.9375, 1.0625), boxes_between(grid, -1.0625, -0.9375), grid)
    assert 0.0 <= lam <= 1.0


@pytest.fixture(scope="module")
def wells(line_grid):
    return boxes_between(line_grid, 0.9375, 1.0625), boxes_between(line_grid, -1.0625, -0.9375)


def test_sup_g_on_repeller(double_well, line_grid, wells):
    A, R = wells
    assert sup_g(double_well, 0.0, [-1.0], 5.0, 0.05, A, R, line_grid) == 1.0


def test_sup_g_on_attractor(double_well, line_grid, wells):
    A, R = wells
    assert sup_g(double_well, 0.0, [1.0], 5.0, 0.05, A, R, line_grid) == 0.0


def test_sup_g_attained_at_start(double_well, line_grid, wells):
    A, R = wells
    lam0 = lambda_ratio([0.5], A, R, line_grid)
    assert sup_g(double_well, 0.0, [0.5], 10.0, 0.01, A, R, line_grid) == pytest.approx(lam0, abs=1e-15)


def test_sup_g_dominates_lambda(double_well, line_grid, wells):
    A, R = wells
    X = np.linspace(-1.9, 1.9, 9)[:, None]
    g = sup_g(double_well, 0.0, X, 3.0, 0.05, A, R, line_grid)
    assert np.all(g >= lambda_ratio(X, A, R, line_grid))


def test_l_on_repeller(double_well, line_grid, wells):
    A, R = wells
    r = lyapunov_l(double_well, 0.0, [-1.0], 20.0, 0.01, A, R, line_grid)
    assert r["tail_bound"] == pytest.approx(math.exp(-20))
    assert r["value"] == pytest.approx(1 - math.exp(-20), abs=1e-5)


def test_l_on_attractor(double_well, line_grid, wells):
    A, R = wells
    assert lyapunov_l(double_well, 0.0, [1.0], 20.0, 0.01, A, R, line_grid)["value"] == 0.0


def test_l_orders_points_along_orbit(double_well, line_grid, wells):
    A, R = wells
    vals = lyapunov_l(double_well, 0.0, np.array([[0.2], [0.5], [0.8]]), 20.0, 0.01, A, R, line_grid)["value"]
    assert vals[0] > vals[1] > vals[2]
    assert np.all((vals >= 0) & (vals <= 1 + math.exp(-20)))


def test_l_trace_columns(double_well, line_grid, wells):
    A, R = wells
    r = lyapunov_l(double_well, 0.0, [0.5], 2.0, 0.1, A, R, line_grid, trace=True)
    tr = r["trace"]
    assert len(tr["t"]) == 21 and tr["lambda"].shape == (21, 1)
    assert tr["l_partial"][-1, 0] == pytest.approx(r["value"])
    assert np.all(np.diff(tr["g"][:, 0]) <= 1e-15)
