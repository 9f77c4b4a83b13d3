"""Command-line interface: ``fappr {run,oracle,eval,precompute,stats}``."""
from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from pathlib import Path

from . import serialize
from .alias import DEFAULT_BLOCK_SIZE
from .engine import DEFAULT_BIGMOVE_D, DEFAULT_MEMORY, RunConfig, Samplers, run_fappr
from .estimate import read_scores, write_scores, write_store, write_text
from .graph import WEIGHTINGS, degree_stats, load_edge_list
from .metrics import evaluate, write_report
from .oracle import DEFAULT_TOL, exact_ppr

log = logging.getLogger("fappr")


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _unit(value: str) -> float:
    x = float(value)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError(f"{value} is not in (0, 1)")
    return x


def _positive_int(value: str) -> int:
    x = int(value)
    if x < 1:
        raise argparse.ArgumentTypeError(f"{value} is not a positive integer")
    return x


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="edge list: src dst [weight] per line")
    p.add_argument("--weighting", choices=WEIGHTINGS, default=None,
                   help="edge weights (default: given if every line has a weight, else uniform)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="log progress")
    parser = argparse.ArgumentParser(prog="fappr", description=__doc__, parents=[common])
    parser.set_defaults(verbose=False)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="estimate PPR for all pairs with pipelined random walks")
    _graph_args(run)
    run.add_argument("--alpha", type=_unit, default=0.5, help="termination probability")
    run.add_argument("--eps", type=_unit, default=0.5, help="relative accuracy")
    run.add_argument("--delta", type=_unit, default=0.5, help="PPR threshold")
    run.add_argument("--pf", type=_unit, default=None, help="failure probability (default 1/n)")
    run.add_argument("--omega", type=_positive_int, default=None, help="walks per source (default derived)")
    run.add_argument("--gamma", type=_positive_int, default=None, help="walks per node per pipeline (default autotuned)")
    run.add_argument("--mem", type=_positive_int, default=DEFAULT_MEMORY, help="memory budget in bytes")
    run.add_argument("--d", type=_positive_int, default=DEFAULT_BLOCK_SIZE, help="alias tree block size")
    run.add_argument("--bigmove-d", type=_positive_int, default=DEFAULT_BIGMOVE_D, help="big-move size threshold")
    run.add_argument("--bm", type=_on_off, default=True, metavar="on|off", help="use big moves for small nodes")
    run.add_argument("--alias-tree", type=_on_off, default=True, metavar="on|off", help="use alias trees for large nodes")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    run.add_argument("--out", required=True, help="result TSV (.gz to compress)")
    run.add_argument("--telemetry", default=None, help="per-round TSV (default: <out>.telemetry.tsv)")
    run.add_argument("--id-map", default=None, help="write internal_id<TAB>original_id here")

    orc = sub.add_parser("oracle", parents=[common], help="exact PPR by truncated power series")
    _graph_args(orc)
    orc.add_argument("--alpha", type=_unit, default=0.5)
    orc.add_argument("--tol", type=_unit, default=DEFAULT_TOL)
    orc.add_argument("--out", required=True)

    ev = sub.add_parser("eval", parents=[common], help="NDCG and MAP of estimated rankings against reference scores")
    ev.add_argument("--est", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--k", type=_positive_int, default=1000)
    ev.add_argument("--out", required=True)

    pre = sub.add_parser("precompute", parents=[common], help="write alias trees and big-move tables")
    _graph_args(pre)
    pre.add_argument("--d", type=_positive_int, default=DEFAULT_BLOCK_SIZE)
    pre.add_argument("--bigmove-d", type=_positive_int, default=DEFAULT_BIGMOVE_D)
    pre.add_argument("--alpha", type=_unit, default=0.5)
    pre.add_argument("--out", required=True, help="output directory")

    st = sub.add_parser("stats", parents=[common], help="node and degree statistics")
    _graph_args(st)
    return parser


def _load(args):
    weighting = args.weighting
    data = Path(args.graph).read_bytes()
    if weighting is None:
        rows = [l.split() for l in data.decode("utf-8").splitlines() if l.strip() and not l.lstrip().startswith("#")]
        weighting = "given" if rows and all(len(r) == 3 for r in rows) else "uniform"
    return load_edge_list(data, weighting)


def cmd_run(args) -> int:
    g = _load(args)
    cfg = RunConfig(
        alpha=args.alpha, eps=args.eps, delta=args.delta, p_f=args.pf,
        omega=args.omega, gamma=args.gamma, memory=args.mem, d=args.d,
        bigmove_d=args.bigmove_d, big_moves=args.bm, alias_tree=args.alias_tree,
        seed=args.seed, workers=args.workers,
    )
    result = run_fappr(g, cfg)
    write_store(result.store, args.out, g.labels)
    buf = io.StringIO()
    result.write_telemetry(buf)
    write_text(args.telemetry or f"{args.out}.telemetry.tsv", buf.getvalue())
    if args.id_map:
        with open(args.id_map, "w", encoding="utf-8") as fh:
            g.write_id_map(fh)
    c = result.config
    log.info("omega=%d gamma=%d pipelines=%d rounds=%d events=%d", c.omega, c.gamma,
             result.pipelines, result.rounds, result.sampling_events)
    return 0


def cmd_oracle(args) -> int:
    g = _load(args)
    ppr = exact_ppr(g, args.alpha, args.tol)
    rows = {s: {t: float(v) for t, v in enumerate(ppr.matrix[s]) if v > 0} for s in range(g.n)}
    buf = io.StringIO()
    write_scores(rows, buf, g.labels)
    write_text(args.out, buf.getvalue())
    return 0


def cmd_eval(args) -> int:
    est = read_scores(args.est)
    truth = read_scores(args.truth)
    rows = evaluate(est, truth, args.k)
    buf = io.StringIO()
    mean_nd, mean_ap = write_report(rows, buf)
    write_text(args.out, buf.getvalue())
    print(f"mean ndcg={mean_nd:.6f} map={mean_ap:.6f}")
    return 0


def cmd_precompute(args) -> int:
    g = _load(args)
    cfg = RunConfig(alpha=args.alpha, d=args.d, bigmove_d=args.bigmove_d, omega=1, gamma=1)
    samplers = Samplers.build(g, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "alias_trees.bin", "wb") as fh:
        serialize.dump_trees(samplers.trees, fh)
    with open(out / "big_moves.bin", "wb") as fh:
        serialize.dump_big_moves(samplers.big_moves, fh)
    print(f"alias trees: {len(samplers.trees)}  big-move nodes: {len(samplers.big_moves)}")
    return 0


def cmd_stats(args) -> int:
    g = _load(args)
    st = degree_stats(g)
    n = max(g.n, 1)
    print(f"n\t{g.n}")
    print(f"edges\t{g.n_edges}")
    print(f"d_avg\t{st.d_avg:.6g}")
    print(f"d_max\t{st.d_max}")
    print(f"small_fraction\t{len(st.small_nodes) / n:.6g}")
    print(f"large_fraction\t{len(st.large_nodes) / n:.6g}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "oracle": cmd_oracle,
    "eval": cmd_eval,
    "precompute": cmd_precompute,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"fappr {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
