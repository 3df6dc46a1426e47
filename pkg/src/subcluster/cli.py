"""Command-line surface: generation, learning, querying, reconstruction,
verification, and sublinearity audits.

Exit codes: 0 success, 1 domain failure (e.g. learning failed under
--strict), 2 usage error.  All randomness flows from --seed; the
SUBCLUSTER_PROFILE environment variable overrides --profile.  Output is
one result per line with stable field order; --json switches each line
to a JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .generators import gen_clusterable, load_partition, perturb, store_partition
from .graph_core import load_graph, outer_conductance, store_graph
from .oracle import ClusterOracle, OracleParams, OracleState, learn_core
from .reconstructor import from_state, materialize_gprime, new_neighbors
from .rng import philox
from .verify import (
    check_cluster_spectral,
    induced_cluster_quality,
    merge_for_outer,
    mixing_profile,
    stochastic_complement,
    write_mixing_csv,
)
from .walks import transition_matrix

_PROFILE_ENV = "SUBCLUSTER_PROFILE"


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _resolve_profile(args) -> str:
    return os.environ.get(_PROFILE_ENV, args.profile)


def _build_params(n: int, args) -> OracleParams:
    profile = _resolve_profile(args)
    common = dict(n=n, k=args.k, phi=args.phi, eps=args.eps, master_seed=args.seed)
    if profile == "paper":
        return OracleParams.paper(**common)
    if profile != "practical":
        raise SystemExit(f"unknown profile {profile!r}")
    extras = {}
    for flag in ("beta", "kappa", "theta0", "delta0", "c_sample", "c_big", "trials", "min_core"):
        val = getattr(args, flag, None)
        if val is not None:
            extras[flag] = val
    return OracleParams.practical(**common, **extras)


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True, help="maximum number of clusters")
    p.add_argument("--phi", type=float, required=True, help="inner-conductance target")
    p.add_argument("--eps", type=float, required=True, help="perturbation budget")
    p.add_argument("--profile", choices=("practical", "paper"), default="practical")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--beta", type=float, default=None, help="walk length factor (practical)")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--delta0", type=float, default=None)
    p.add_argument("--c-sample", dest="c_sample", type=float, default=None)
    p.add_argument("--c-big", dest="c_big", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--min-core", dest="min_core", type=int, default=None)


def _load_state_oracle(args):
    g = load_graph(args.graph)
    state = OracleState.load(args.state)
    return g, ClusterOracle(g, state)


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    inst = gen_clusterable(args.n, args.k, args.d, args.inter, args.seed)
    if args.eps > 0:
        inst = perturb(inst, args.eps, args.mode, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    store_graph(inst.graph, out / "graph.txt")
    store_partition(inst.parts, out / "partition.txt")
    _emit(
        args,
        {"n": inst.graph.n, "edges": inst.graph.num_edges, "edits": inst.edits_used,
         "out": str(out)},
        f"generated n={inst.graph.n} m={inst.graph.num_edges} edits={inst.edits_used} -> {out}",
    )
    return 0


def cmd_learn(args) -> int:
    g = load_graph(args.graph)
    params = _build_params(g.n, args)
    state = learn_core(g, params)
    state.save(args.out)
    if state.failed:
        _emit(args, {"failed": True, "reason": state.fail_reason, "out": args.out},
              f"FAILED {state.fail_reason} -> {args.out}")
        return 1 if args.strict else 0
    _emit(
        args,
        {"failed": False, "cores": len(state.cores), "sample": int(state.sample.size),
         "out": args.out},
        f"learned cores={len(state.cores)} sample={state.sample.size} -> {args.out}",
    )
    return 0


def _answer_text(op: str, ans) -> str:
    if op == "which-cluster":
        return "OUTLIER" if ans is None else str(ans)
    return "YES" if ans else "NO"


def cmd_query(args) -> int:
    g, oracle = _load_state_oracle(args)
    pairs_needed = args.op == "same-cluster"
    queries: list[tuple[int, ...]] = []
    if args.batch:
        for line in Path(args.batch).read_text().splitlines():
            line = line.strip()
            if line:
                queries.append(tuple(int(x) for x in line.split()))
    else:
        if args.u is None:
            raise SystemExit("query requires --u or --batch")
        queries.append((args.u, args.v) if pairs_needed else (args.u,))
    for q in queries:
        if pairs_needed:
            if len(q) != 2:
                raise SystemExit("same-cluster queries need two vertices")
            ans = oracle.same_cluster(q[0], q[1])
            payload = {"op": args.op, "u": q[0], "v": q[1], "answer": bool(ans)}
        else:
            if len(q) != 1:
                raise SystemExit(f"{args.op} queries take one vertex")
            ans = oracle.is_outlier(q[0]) if args.op == "is-outlier" else oracle.which_cluster(q[0])
            payload = {"op": args.op, "u": q[0], "answer": ans}
        _emit(args, payload, _answer_text(args.op, ans))
    return 0


def cmd_reconstruct(args) -> int:
    g = load_graph(args.graph)
    if args.state:
        state = OracleState.load(args.state)
    else:
        state = learn_core(g, _build_params(g.n, args))
    rs = from_state(g, state)
    if args.materialize:
        gp = materialize_gprime(rs)
        store_graph(gp, args.out)
        added = gp.num_edges - g.num_edges
        outliers = rs.outlier_count()
        _emit(
            args,
            {"out": args.out, "added_edges": added, "outliers": outliers,
             "max_degree": int(gp.deg.max()), "failed": rs.failed},
            f"materialized -> {args.out} added={added} outliers={outliers} "
            f"max_degree={int(gp.deg.max())}",
        )
        return 0
    if args.vertex is None:
        raise SystemExit("reconstruct needs --vertex or --materialize")
    nbrs = new_neighbors(rs, args.vertex)
    _emit(
        args,
        {"vertex": args.vertex, "neighbors": [int(x) for x in nbrs]},
        " ".join(str(int(x)) for x in nbrs),
    )
    return 0


def cmd_verify(args) -> int:
    g = load_graph(args.graph)
    if args.what == "spectral":
        parts = load_partition(args.partition, g.n)
        chk = check_cluster_spectral(g, parts)
        _emit(
            args,
            {"ok": chk.ok, "lambda_h": chk.lambda_h, "lambda_h1": chk.lambda_h1,
             "phi_out": chk.phi_out, "phi_in": chk.phi_in},
            f"ok={chk.ok} lambda_h={chk.lambda_h:.6g} lambda_h1={chk.lambda_h1:.6g} "
            f"phi_out={chk.phi_out:.6g} phi_in={chk.phi_in:.6g}",
        )
        return 0 if chk.ok else 1
    if args.what == "mixing":
        parts = load_partition(args.partition, g.n)
        prof = mixing_profile(g, parts, args.t, kernel=args.kernel)
        if args.csv:
            write_mixing_csv(args.csv, prof)
        for i in range(len(parts)):
            frac = prof.part_fraction_below(i, args.tv_threshold)
            _emit(
                args,
                {"part": i, "fraction_below": frac, "threshold": args.tv_threshold},
                f"part {i}: fraction_tv<={args.tv_threshold:g} = {frac:.4f}",
            )
        return 0
    if args.what == "complement":
        dset = np.array([int(x) for x in Path(args.dset).read_text().split()])
        P = transition_matrix(g).toarray()
        Pp = stochastic_complement(P, dset)
        rows = float(np.abs(Pp.sum(axis=1) - 1.0).max())
        uni = np.full(dset.size, 1.0 / dset.size)
        stat_tv = float(0.5 * np.abs(uni @ Pp - uni).sum())
        _emit(
            args,
            {"row_residual": rows, "stationary_tv": stat_tv, "states": int(dset.size)},
            f"states={dset.size} row_residual={rows:.3g} stationary_tv={stat_tv:.3g}",
        )
        return 0
    if args.what == "merge":
        parts = load_partition(args.partition, g.n)
        rep = merge_for_outer(g, parts, args.nu)
        bound = min(len(parts) * args.nu, 1.0)
        ok = all(v <= bound + 1e-12 for v in rep.outer)
        _emit(
            args,
            {"parts": len(rep.parts), "merges": rep.merges, "outer": rep.outer,
             "bound": bound, "ok": ok},
            rep.summary() + f"\nbound={bound:.6g} ok={ok}",
        )
        return 0 if ok else 1
    raise SystemExit(f"unknown verify target {args.what!r}")


def cmd_audit(args) -> int:
    sizes = [int(x) for x in args.graph_sizes.split(",")]
    rows = []
    for n in sizes:
        inst = gen_clusterable(n, 1, args.d, 0.0, args.seed)
        g = inst.graph
        params = OracleParams.practical(
            n, 1, args.phi, args.eps, master_seed=args.seed, delta0=args.delta0
        )
        oracle = ClusterOracle.learn(g, params)
        if oracle.state.failed:
            print(f"learning failed at n={n}", file=sys.stderr)
            return 1
        rng = philox(args.seed, "audit-queries", n)
        qs = rng.choice(n, size=args.queries + 1, replace=False)
        oracle.which_cluster(int(qs[0]))  # warm the sample-side cache
        counts = []
        for q in qs[1:]:
            before = g.queries.count
            oracle.which_cluster(int(q))
            counts.append(g.queries.count - before)
        rows.append((n, float(np.mean(counts))))
        _emit(args, {"n": n, "mean_queries": rows[-1][1]},
              f"{n},{rows[-1][1]:.1f}")
    slope = float(
        np.polyfit(np.log([r[0] for r in rows]), np.log([r[1] for r in rows]), 1)[0]
    )
    _emit(args, {"slope": slope}, f"slope,{slope:.4f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("n,mean_queries\n")
            for n, m in rows:
                fh.write(f"{n},{m:.6g}\n")
            fh.write(f"slope,{slope:.6g}\n")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subcluster", description=__doc__)
    ap.add_argument("--threads", type=int, default=None, help="numba worker threads")
    ap.add_argument("--json", action="store_true", help="JSON output, one object per line")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a planted clusterable instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--inter", type=float, default=0.0, help="crossing-edge fraction")
    g.add_argument("--eps", type=float, default=0.0, help="perturbation budget")
    g.add_argument("--mode", default="delete-random",
                   choices=("delete-random", "delete-targeted-cut", "insert-random", "mixed"))
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    l = sub.add_parser("learn", help="learn a clustering oracle state")
    l.add_argument("--graph", required=True)
    l.add_argument("--out", required=True, help="oracle state file")
    l.add_argument("--strict", action="store_true", help="exit 1 when learning fails")
    _add_param_flags(l)
    l.set_defaults(func=cmd_learn)

    q = sub.add_parser("query", help="answer clustering queries from a state file")
    q.add_argument("--graph", required=True)
    q.add_argument("--state", required=True)
    q.add_argument("--op", required=True, choices=("is-outlier", "which-cluster", "same-cluster"))
    q.add_argument("--u", type=int)
    q.add_argument("--v", type=int)
    q.add_argument("--batch", help="file with one query per line")
    q.set_defaults(func=cmd_query)

    r = sub.add_parser("reconstruct", help="local filter / materialized G'")
    r.add_argument("--graph", required=True)
    r.add_argument("--state", help="reuse a learned state instead of learning")
    r.add_argument("--vertex", type=int)
    r.add_argument("--materialize", action="store_true")
    r.add_argument("--out", help="output graph file for --materialize")
    _add_param_flags(r)
    for a in r._actions:  # state may replace the learning flags
        if a.dest in ("k", "phi", "eps", "seed"):
            a.required = False
            if a.dest == "k":
                a.default = 2
            elif a.dest == "seed":
                a.default = 1
            else:
                a.default = 0.3 if a.dest == "phi" else 0.01
    r.set_defaults(func=cmd_reconstruct)

    v = sub.add_parser("verify", help="exact desk-scale verification")
    v.add_argument("what", choices=("spectral", "mixing", "complement", "merge"))
    v.add_argument("--graph", required=True)
    v.add_argument("--partition")
    v.add_argument("--dset", help="file of state ids (complement)")
    v.add_argument("--t", type=int, default=100, help="walk length (mixing)")
    v.add_argument("--kernel", choices=("p", "pbar"), default="pbar")
    v.add_argument("--tv-threshold", dest="tv_threshold", type=float, default=0.25)
    v.add_argument("--nu", type=float, default=0.3, help="merge threshold factor")
    v.add_argument("--csv", help="per-vertex mixing CSV output")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("audit", help="sublinearity audit: queries per clustering query")
    a.add_argument("--graph-sizes", dest="graph_sizes", required=True,
                   help="comma-separated instance sizes")
    a.add_argument("--queries", type=int, default=50)
    a.add_argument("--profile", choices=("practical", "paper"), default="practical")
    a.add_argument("--seed", type=int, default=1)
    a.add_argument("--d", type=int, default=16)
    a.add_argument("--phi", type=float, default=0.45)
    a.add_argument("--eps", type=float, default=0.01)
    a.add_argument("--delta0", type=float, default=0.07,
                   help="estimator accuracy; sets the x = sqrt(n)/delta0^2 walk budget")
    a.add_argument("--out", help="CSV output path")
    a.set_defaults(func=cmd_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads:
        import numba

        numba.set_num_threads(max(1, args.threads))
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
