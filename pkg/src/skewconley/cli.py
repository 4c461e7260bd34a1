"""Command-line front end.

Exit codes: 0 success, 1 usage/config/verification failure, 2 resource cap,
3 numeric divergence, 4 graph file format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as _config
from . import pipeline
from .conley import chain_exists, chain_tolerance
from .errors import NotNested, SkewConleyError
from .lyapunov import complete_lyapunov, lyapunov_l
from .oracle import check_graph, run_suite
from .pullback import pullback_attractor, pullback_convergence
from .transition import load_graph, save_graph

GRAPH_FILE = "graph.cnds"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _dump_json(obj) -> str:
    return json.dumps(pipeline.json_ready(obj), indent=2, sort_keys=True) + "\n"


def _config_from(args) -> dict:
    cfg = _config.load_config(args.config) if args.config else _config.loads_config("")
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        cfg["workers"] = args.workers
    return cfg


def _out_dir(args, cfg=None) -> Path:
    if args.out:
        return Path(args.out)
    return Path(cfg["output.dir"] if cfg else ".")


def cmd_build_map(args) -> int:
    cfg = _config_from(args)
    g = pipeline.build_from_config(cfg, cfg["workers"])
    path = save_graph(g, _out_dir(args, cfg) / GRAPH_FILE)
    print(f"{path}: {g.n_nodes} nodes, {g.n_edges} edges, {int(g.escaped.sum())} escaped "
          f"({g.build_seconds:.2f} s)")
    return 0


def cmd_conley(args) -> int:
    g = load_graph(args.graph)
    md, pairs, report = pipeline.decompose(g)
    out = _out_dir(args) if args.out else Path(args.graph).parent
    summary = pipeline.conley_summary(g, md, pairs, report)
    _write(out, "nodes.csv", pipeline.node_table(g, md, pairs))
    _write(out, "condensation.dot", pipeline.condensation_dot(md))
    _write(out, "conley.json", _dump_json(summary))
    print(f"{summary['cyclic_scc_count']} cyclic components, {summary['pair_count']} pairs, "
          f"cyclic fraction {summary['cyclic_fraction']:.4f}, identities "
          f"{'ok' if summary['identities_ok'] else 'FAILED'}")
    return 0 if summary["identities_ok"] else 1


def _traces(cfg: dict, g, pairs) -> str | None:
    starts = cfg["lyapunov.trace_starts"]
    if not starts or not pairs:
        return None
    k = int(cfg["lyapunov.trace_pair"])
    if not 0 <= k < len(pairs):
        raise _config.ConfigError(f"lyapunov.trace_pair {k} out of range (0..{len(pairs) - 1})")
    sys_ = pipeline.system_from_config(cfg)
    pair = pairs[k]

    def at(mask):
        return lambda q: pipeline.fiber_boxes(g, mask, pipeline.nearest_sample(g.sampling, q))

    p = g.sampling.samples[0]
    X = np.asarray(starts, dtype=float).reshape(len(starts), -1)
    res = lyapunov_l(sys_, p, X, cfg["lyapunov.horizon"], cfg["lyapunov.dt"], at(pair.A), at(pair.R_coarse),
                     g.grid, trace=True)
    tr = res["trace"]
    rows = ["start,t,lambda,g,l_partial"]
    for j in range(len(X)):
        for t, lam, gv, lp in zip(tr["t"], tr["lambda"][:, j], tr["g"][:, j], tr["l_partial"][:, j]):
            rows.append(f"{j},{t:.10g},{lam:.17g},{gv:.17g},{lp:.17g}")
    return "\n".join(rows) + "\n"


def cmd_lyapunov(args) -> int:
    g = load_graph(args.graph)
    md, pairs, _ = pipeline.decompose(g)
    field = complete_lyapunov(g, md, pairs)
    out = _out_dir(args) if args.out else Path(args.graph).parent
    _write(out, "lyapunov.csv", pipeline.node_table(g, md, pairs, field))
    _write(out, "lyapunov.json", _dump_json({"meta_hash": g.meta_hash(), **field.report}))
    if args.config:
        text = _traces(_config_from(args), g, pairs)
        if text:
            _write(out, "lyapunov_traces.csv", text)
    r = field.report
    print(f"(a) {r['a_constant_on_scc']} (b) {r['b_monotone']} (c) {r['c_cantor']} (d) {r['d_distinct']}; "
          f"{r['monotone_violations']} monotonicity violations over {r['edges']} edges")
    return 0 if r["ok"] else 1


def cmd_pullback(args) -> int:
    cfg = _config_from(args)
    sys_ = pipeline.system_from_config(cfg)
    grid = pipeline.grid_from_config(cfg, sys_)
    U_lo = grid.lo if cfg["pullback.U_lo"] is None else cfg["pullback.U_lo"]
    U_hi = grid.hi if cfg["pullback.U_hi"] is None else cfg["pullback.U_hi"]
    U = pipeline.boxes_in(grid, U_lo, U_hi)
    sched = _config.schedule(cfg)
    p = float(cfg["pullback.p"])
    try:
        res = pullback_attractor(sys_, grid, p, U, sched, cfg["pullback.tol"], cfg["transition.scheme"],
                                 cfg["pullback.eps_pad"])
        summary = res.summary()
        A = res.A_approx
    except NotNested as exc:
        summary = {"p": p, "schedule": sched, "nested": False, "nested_from": None, "converged": False,
                   "reason": str(exc)}
        A = np.zeros(0, dtype=np.int64)
    if cfg["pullback.A_lo"] is not None:
        A = pipeline.boxes_in(grid, cfg["pullback.A_lo"], cfg["pullback.A_hi"])
    dist = pullback_convergence(sys_, grid, p, U, A, sched, cfg["transition.scheme"])
    summary.update({
        "system": sys_.name,
        "U_boxes": int(len(U)),
        "box_diameter": grid.diameter,
        "distances": dist.tolist(),
        "final_distance": float(dist[-1]) if len(dist) else 0.0,
    })
    if len(A):
        lo, hi = grid.bounds(A)
        summary["A_bounds"] = [lo.min(axis=0).tolist(), hi.max(axis=0).tolist()]
    out = _out_dir(args, cfg)
    _write(out, "pullback.json", _dump_json(summary))
    sizes = summary.get("covering_sizes", [""] * len(sched))
    rows = ["s,distance,covering_size"] + [f"{s:.10g},{d:.17g},{c}" for s, d, c in zip(sched, dist, sizes)]
    _write(out, "pullback.csv", "\n".join(rows) + "\n")
    print(f"nested={summary['nested']} converged={summary['converged']} final distance {summary['final_distance']:.3g}")
    return 0


def _node(g, text: str) -> int:
    if ":" in text:
        i, b = (int(t) for t in text.split(":", 1))
        if not (0 <= i < g.sampling.m and 0 <= b < g.grid.n_boxes):
            raise UsageError(f"node {text} out of range")
        return g.node(i, b)
    v = int(text)
    if not 0 <= v < g.n_nodes:
        raise UsageError(f"node {text} out of range")
    return v


def cmd_chain(args) -> int:
    g = load_graph(args.graph)
    res = chain_exists(g, _node(g, args.source), _node(g, args.target))
    if not res["reachable"]:
        print("not found")
        return 0
    base, box = g.split(np.array(res["chain"]))
    print(" -> ".join(f"{i}:{b}" for i, b in zip(base.tolist(), box.tolist())))
    print(f"{len(res['chain']) - 1} steps, jump tolerance {chain_tolerance(g):.6g}")
    return 0


def cmd_verify(args) -> int:
    if args.target == "oracle":
        seed = 0 if args.seed is None else args.seed
        rep = run_suite(args.count, seed, args.max_nodes)
        print(f"{rep['graphs']} random graphs (seed {seed}): {len(rep['failures'])} failures")
        for f in rep["failures"][:5]:
            print(f"  graph {f['graph']}: {'; '.join(f['problems'])}")
        return 0 if rep["ok"] else 1
    g = load_graph(args.target)
    problems = check_graph(g, exhaustive=g.n_nodes <= 12)
    print("ok" if not problems else "\n".join(problems))
    return 0 if not problems else 1


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="skewconley", description=__doc__.splitlines()[0])
    ap.add_argument("--print-defaults", action="store_true", help="print the default configuration and exit")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="run configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="parallel fibers for the transition build")
        p.add_argument("--seed", type=int)
        return p

    p = common(sub.add_parser("build-map", help="build and save the transition graph"))
    p.set_defaults(func=cmd_build_map)
    p = common(sub.add_parser("conley", help="decomposition: nodes.csv, condensation.dot, conley.json"), False)
    p.add_argument("graph")
    p.set_defaults(func=cmd_conley)
    p = common(sub.add_parser("lyapunov", help="complete Lyapunov function and property report"))
    p.add_argument("graph")
    p.set_defaults(func=cmd_lyapunov)
    p = common(sub.add_parser("pullback", help="pullback attractor approximation"))
    p.set_defaults(func=cmd_pullback)
    p = common(sub.add_parser("chain", help="shortest chain between two nodes ('i:box' or node id)"), False)
    p.add_argument("graph")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.set_defaults(func=cmd_chain)
    p = common(sub.add_parser("verify", help="oracle cross-checks on a graph file or on random graphs"), False)
    p.add_argument("target", help="graph file or the word 'oracle'")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--max-nodes", type=int, default=8)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
        if args.print_defaults:
            sys.stdout.write(_config.dumps_config(_config.DEFAULTS))
            return 0
        if not args.command:
            raise UsageError("a subcommand is required")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SkewConleyError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
