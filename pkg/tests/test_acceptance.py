"""Acceptance criteria, one printed PASS/FAIL line each.

Run with ``pytest -v tests/test_acceptance.py``; every test prints its
verdict before asserting, so failing criteria still report their numbers.
"""

import math
import time

import numpy as np
import pytest

from skewconley import (attractor_from_seed, build_grid, build_transition, check_energy_conditions,
                        cocycle_residual, complete_lyapunov, enumerate_pairs, evolve, lyapunov_l, make_builtin,
                        morse, pullback_attractor, pullback_convergence, sample_base,
                        verify_decomposition)
from skewconley.cli import GRAPH_FILE, main
from skewconley.conley import make_pair
from skewconley.oracle import check_graph, run_suite
from skewconley.pipeline import boxes_in, fiber_boxes
from skewconley.systems import shifted_lorenz_spec

from test_cli import BUILTINS, GOLDEN


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def _build(name, depth, m=None, T=None, eps_pad=None):
    sys = make_builtin(name)
    grid = build_grid(sys.lo, sys.hi, depth, sys.circular or None)
    if m is None:
        m = 1 if sys.base.kind == "trivial" else 8
    g = build_transition(sys, grid, sample_base(sys.base, m, T), eps_pad=eps_pad)
    md = morse(g)
    return g, md, enumerate_pairs(g, md)


@pytest.fixture(scope="module")
def builtin_graphs():
    """One graph per builtin at the resolutions the criteria name (Lorenz at a coarse depth)."""
    t = time.perf_counter()
    graphs = {
        "example-5-1": _build("example-5-1", [8], 8, eps_pad=0.0),
        "example-5-2-circle": _build("example-5-2-circle", [8], 16),
        "double-well": _build("double-well", [6], T=0.5, eps_pad=0.0),
        "forced-lorenz": _build("forced-lorenz", [3, 3, 3], 4, eps_pad=0.0),
    }
    graphs["_seconds"] = time.perf_counter() - t
    return graphs


def test_1_linear_growth_recurrence(verdict):
    t = time.perf_counter()
    g, md, _ = _build("example-5-1", [8], 8, eps_pad=0.0)
    seconds = time.perf_counter() - t
    nb = g.grid.n_boxes
    lo, hi = g.grid.bounds(np.arange(nb))
    hits_zero = np.nonzero((lo[:, 0] <= 0.0) & (hi[:, 0] >= 0.0))[0]
    allowed = set(range(hits_zero.min() - 1, hits_zero.max() + 2))
    counts, bad = [], []
    for i, p in enumerate(g.sampling.samples):
        cr = fiber_boxes(g, md.recurrent, i)
        counts.append(len(cr))
        if not (set(hits_zero) <= set(cr.tolist()) and set(cr.tolist()) <= allowed and len(cr) <= 3):
            bad.append(p)
    ok = not bad and seconds <= 10.0
    verdict(1, ok, f"CR boxes per fiber {counts} (boxes meeting 0: {hits_zero.tolist()}); "
                   f"fibers out of bounds at p={bad}; {seconds:.2f} s")


def test_2_linear_growth_pullback(verdict):
    t = time.perf_counter()
    sys = make_builtin("example-5-1")
    grid = build_grid([-2.0], [2.0], [8])
    U = boxes_in(grid, -1.0, 1.0)
    sched = [1.0, 2.0, 3.0, 4.0, 5.0]
    res = pullback_attractor(sys, grid, 0.0, U, sched)
    lo, hi = grid.bounds(res.A_approx)
    reach = float(max(abs(lo.min()), abs(hi.max())))
    # A = {0} at box resolution: the half-open box that holds 0
    dist = pullback_convergence(sys, grid, 0.0, U, [grid.box_of(np.array([0.0]))], sched)
    env = np.exp(-np.array(sched[:2]) ** 2) * 1.0
    rel = np.abs(dist[:2] - env) / env
    seconds = time.perf_counter() - t
    ok = res.converged and reach <= grid.diameter and bool(np.all(rel <= 0.10)) and seconds <= 5.0
    verdict(2, ok, f"converged={res.converged}, covering reaches {reach:.4g} (diameter {grid.diameter:.4g}), "
                   f"d(1)={dist[0]:.5g} d(2)={dist[1]:.5g} vs envelope {env[0]:.5g} {env[1]:.5g} "
                   f"(rel {rel.max():.2%}); {seconds:.2f} s")


def test_3_circle_recurrence(verdict):
    t = time.perf_counter()
    g, md, pairs = _build("example-5-2-circle", [8], 16)
    seconds = time.perf_counter() - t
    frac = float(md.recurrent.mean())
    with_R = sum(bool(p.R_coarse.any()) for p in pairs)
    ok = frac == 1.0 and with_R == 0 and seconds <= 30.0
    verdict(3, ok, f"cyclic fraction {frac:.4f}, {with_R} of {len(pairs)} pairs with nonempty coarse repeller; "
                   f"{seconds:.2f} s")


def test_4_decomposition_identities(verdict, builtin_graphs):
    t = time.perf_counter()
    suite = run_suite(500, seed=0, max_nodes=8)
    notes = []
    for name in BUILTINS:
        g, md, pairs = builtin_graphs[name]
        rep = verify_decomposition(g, md, pairs)
        problems = check_graph(g, exhaustive=False)
        if not rep["ok"] or problems:
            notes.append(f"{name}: {problems or rep}")
    seconds = time.perf_counter() - t
    ok = suite["ok"] and not notes and seconds <= 20.0
    verdict(4, ok, f"{suite['graphs']} random graphs, {len(suite['failures'])} failures; builtin graphs "
                   f"{'clean' if not notes else notes}; {seconds:.2f} s")


def test_5_complete_lyapunov(verdict, builtin_graphs):
    lines, ok = [], True
    for name in BUILTINS:
        g, md, pairs = builtin_graphs[name]
        t = time.perf_counter()
        r = complete_lyapunov(g, md, pairs).report
        seconds = time.perf_counter() - t
        good = r["ok"] and r["monotone_violations"] == 0 and seconds <= 10.0
        ok &= good
        lines.append(f"{name} a={r['a_constant_on_scc']} b={r['b_monotone']} c={r['c_cantor']} "
                     f"d={r['d_distinct']} violations={r['monotone_violations']} ({seconds:.2f} s)")
    verdict(5, ok, "; ".join(lines))


def test_6_continuous_lyapunov(verdict, builtin_graphs):
    t = time.perf_counter()
    g, md, _ = builtin_graphs["double-well"]
    sys, grid = make_builtin("double-well"), g.grid
    # A: everything forward of the cyclic boxes around -1 and 1, so the repeller is the middle
    A = np.zeros(g.n_nodes, dtype=bool)
    for x in (-1.03, -0.97, 0.97, 1.03):
        A |= attractor_from_seed(g, md, int(md.scc_id[grid.box_of(np.array([x]))]))
    pair = make_pair(g, md, A)
    A_boxes, R_boxes = fiber_boxes(g, pair.A, 0), fiber_boxes(g, pair.R_coarse, 0)
    horizon, dt = 20.0, 0.01
    slack = math.exp(-horizon) + 2 * dt
    X = np.random.default_rng(0).uniform(-2.0, 2.0, size=(50, 1))
    l0 = lyapunov_l(sys, 0.0, X, horizon, dt, A_boxes, R_boxes, grid)["value"]
    l1 = lyapunov_l(sys, 0.0, evolve(sys, 0.0, X, 1.0), horizon, dt, A_boxes, R_boxes, grid)["value"]
    inner = (np.abs(X[:, 0]) > 0.1) & (np.abs(X[:, 0]) < 0.9)
    passed = (l1 <= l0 + slack) & (~inner | (l0 - l1 > slack))
    seconds = time.perf_counter() - t
    misses = [f"x={x:.3f} l {a:.4f}->{b:.4f}" for x, a, b in zip(X[~passed, 0], l0[~passed], l1[~passed])]
    ok = passed.sum() >= 49 and seconds <= 10.0
    verdict(6, ok, f"{int(passed.sum())}/50 starts pass with slack {slack:.4g} (misses: {misses}); {seconds:.2f} s")


def test_7_cocycle_law(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(7)
    lines, ok = [], True
    for name in BUILTINS:
        sys = make_builtin(name)
        lo, hi = np.array(sys.lo), np.array(sys.hi)
        worst = 0.0
        # 10 base points with 10 states each
        for _ in range(10):
            if sys.base.kind == "line":
                p = rng.uniform(*sys.base.window)
            elif sys.base.kind == "periodic":
                p = rng.uniform(0.0, sys.base.period)
            else:
                p = 0.0
            X = rng.uniform(lo, hi, size=(10, len(lo)))
            s, u = rng.uniform(0.0, 1.0, size=2)
            worst = max(worst, cocycle_residual(sys, p, X, s, u))
        tol = 0.0 if sys.exact else 1e-5
        ok &= worst <= tol
        lines.append(f"{name} max {worst:.3g} (tol {tol:g})")
    seconds = time.perf_counter() - t
    ok &= seconds <= 5.0
    verdict(7, ok, "; ".join(lines) + f"; {seconds:.2f} s")


def test_8_forced_lorenz(verdict):
    t = time.perf_counter()
    energy = check_energy_conditions(shifted_lorenz_spec(), [0.0, 0.25, 0.5, 0.75], probes=200)
    g, md, pairs = _build("forced-lorenz", [6, 6, 6], 4, eps_pad=0.0)
    real = np.ones(g.n_nodes, dtype=bool)
    if g.outside >= 0:
        real[g.outside] = False
    global_pairs = [k for k, p in enumerate(pairs) if p.B[real].all()]
    seconds = time.perf_counter() - t
    ok = (energy["antisymmetry_defect"] <= 1e-10 and md.recurrent.any() and bool(global_pairs)
          and seconds <= 300.0)
    verdict(8, ok, f"antisymmetry defect {energy['antisymmetry_defect']:.3g}; {g.n_nodes} nodes, "
                   f"{g.n_edges} edges, {int(md.recurrent.sum())} recurrent nodes in {int(md.cyclic.sum())} "
                   f"cyclic components; full-lift basins at pairs {global_pairs}; {seconds:.1f} s")


def test_9_determinism(verdict, tmp_path):
    differ = []
    for name in BUILTINS:
        cfg = GOLDEN / f"{name}.cfg"
        outs = []
        for run, workers in enumerate((1, 1, 2)):
            out = tmp_path / f"{name}-{run}"
            assert main(["build-map", "--config", str(cfg), "--out", str(out), "--workers", str(workers),
                         "--seed", "11"]) == 0
            main(["conley", str(out / GRAPH_FILE)])
            main(["lyapunov", str(out / GRAPH_FILE)])
            outs.append(out)
        for f in (GRAPH_FILE, "conley.json", "lyapunov.json", "nodes.csv", "lyapunov.csv", "condensation.dot"):
            blobs = {(o / f).read_bytes() for o in outs}
            if len(blobs) != 1:
                differ.append(f"{name}/{f}")
    verdict(9, not differ, f"{len(BUILTINS)} configs x 3 runs (workers 1, 1, 2): "
                           f"{'all outputs byte-identical' if not differ else 'differences in ' + ', '.join(differ)}")
