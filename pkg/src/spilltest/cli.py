"""Command-line interface.

Subcommands:
  test        p-value for one observed dataset (edge list + id,z,y table)
  simulate    rejection-rate sweep over networks x effect sizes
  cluster     emit the hop-radius clustering of a graph
  sample-null emit null-class graph draws for inspection
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__
from .designs import epsilon_net_clusters
from .graph import read_edge_list
from .harness import (
    NULL_SAMPLER_STREAM,
    _stream_rng,
    config_from_flat,
    emit_results,
    load_config_file,
    read_treatment_outcome_csv,
    run_simulation,
    run_single_test,
)
from .null_samplers import SwapChainConfig, make_null_sampler
from .statistics import STATISTICS

_STAT_CHOICES = sorted(STATISTICS)
_NULL_CHOICES = ["degseq", "iso", "blockiso", "er", "er-hat"]


def _add_chain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--burn-in-mult", type=float, default=100.0,
                   help="swap-chain burn-in, as a multiple of |E| (default 100)")
    p.add_argument("--thin-mult", type=float, default=10.0,
                   help="swaps between chain samples, as a multiple of |E| (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spilltest",
        description="Quasi-randomization tests for network spillover effects.",
    )
    parser.add_argument("--version", action="version", version=f"spilltest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="test one observed dataset")
    p_test.add_argument("--edges", required=True, help="edge-list file")
    p_test.add_argument("--data", required=True, help="CSV with header id,z,y")
    p_test.add_argument("--stat", choices=_STAT_CHOICES, default="tbond")
    p_test.add_argument("--null-class", choices=_NULL_CHOICES, default="degseq")
    p_test.add_argument("--samples", type=int, default=1000, help="null draws (default 1000)")
    p_test.add_argument("--estimator", choices=["raw", "plus-one"], default="raw")
    p_test.add_argument("--er-p", type=float, default=None,
                        help="edge probability for --null-class er")
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--out", default=None, help="write the JSON report here (default stdout)")
    _add_chain_flags(p_test)

    p_sim = sub.add_parser("simulate", help="rejection-rate sweep")
    p_sim.add_argument("--config", default=None, help="TOML run-config file")
    p_sim.add_argument("--network", action="append", default=None,
                       choices=["smallworld", "sbm", "er"],
                       help="repeatable; overrides the config file")
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--sw-k", type=int, default=None)
    p_sim.add_argument("--sw-p-rewire", type=float, default=None)
    p_sim.add_argument("--sbm-blocks", default=None, help="comma list of block sizes")
    p_sim.add_argument("--sbm-pdiag", default=None, help="comma list of within-block probs")
    p_sim.add_argument("--sbm-poff", type=float, default=None, help="between-block prob")
    p_sim.add_argument("--er-p", type=float, default=None)
    p_sim.add_argument("--er-m", type=int, default=None)
    p_sim.add_argument("--design", choices=["cre", "cluster"], default=None)
    p_sim.add_argument("--n-treated", type=int, default=None)
    p_sim.add_argument("--epsilon", type=int, default=None, help="cluster hop radius (default 3)")
    p_sim.add_argument("--cluster-p", type=float, default=None,
                       help="cluster treatment probability (default 0.5)")
    p_sim.add_argument("--outcome", default=None,
                       choices=["proportion-degree", "proportion", "indicator"])
    p_sim.add_argument("--tau-direct", default=None, help="scalar or comma list")
    p_sim.add_argument("--tau-spill", default=None, help="scalar or comma list")
    p_sim.add_argument("--beta-deg", default=None, help="scalar or comma list")
    p_sim.add_argument("--noise-sd", type=float, default=None)
    p_sim.add_argument("--stat", action="append", default=None, choices=_STAT_CHOICES,
                       help="repeatable; statistics share each replicate's null draws")
    p_sim.add_argument("--null-class", choices=_NULL_CHOICES, default=None)
    p_sim.add_argument("--samples", type=int, default=None, help="null draws per replicate")
    p_sim.add_argument("--reps", type=int, default=None, help="replicates per cell")
    p_sim.add_argument("--alpha", type=float, default=None)
    p_sim.add_argument("--estimator", choices=["raw", "plus-one"], default=None)
    p_sim.add_argument("--burn-in-mult", type=float, default=None)
    p_sim.add_argument("--thin-mult", type=float, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--format", choices=["csv", "json"], default="csv")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--quiet", action="store_true")

    p_clu = sub.add_parser("cluster", help="emit the hop-radius clustering")
    p_clu.add_argument("--edges", required=True)
    p_clu.add_argument("--epsilon", type=int, default=3)
    p_clu.add_argument("--out", default=None, help="CSV output (default stdout)")

    p_nul = sub.add_parser("sample-null", help="emit null-class draws")
    p_nul.add_argument("--edges", required=True)
    p_nul.add_argument("--data", default=None, help="id,z,y CSV (needed for blockiso)")
    p_nul.add_argument("--null-class", choices=_NULL_CHOICES, default="degseq")
    p_nul.add_argument("--samples", type=int, default=5)
    p_nul.add_argument("--er-p", type=float, default=None)
    p_nul.add_argument("--seed", type=int, default=0)
    p_nul.add_argument("--out-dir", required=True, help="one edge-list file per draw")
    _add_chain_flags(p_nul)

    return parser


def _csv_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


_SIM_KEY_MAP = {
    "n": "n", "sw_k": "sw_k", "sw_p_rewire": "sw_p_rewire",
    "er_p": "er_p", "er_m": "er_m", "design": "design", "n_treated": "n_treated",
    "epsilon": "epsilon", "cluster_p": "cluster_p", "outcome": "outcome",
    "noise_sd": "noise_sd", "null_class": "null_class", "samples": "samples",
    "reps": "reps", "alpha": "alpha", "estimator": "estimator",
    "burn_in_mult": "burn_in_mult", "thin_mult": "thin_mult", "seed": "seed",
}


def _simulate_flat_config(args: argparse.Namespace) -> dict:
    flat = dict(load_config_file(args.config)) if args.config else {}
    for attr, key in _SIM_KEY_MAP.items():
        val = getattr(args, attr, None)
        if val is not None:
            flat[key] = val
    if args.network:
        flat["network"] = args.network
    if args.stat:
        flat["stats"] = args.stat
    if args.sbm_blocks is not None:
        flat["sbm_block_sizes"] = [int(t) for t in args.sbm_blocks.split(",") if t.strip()]
    if args.sbm_pdiag is not None:
        flat["sbm_pref_diag"] = _csv_floats(args.sbm_pdiag)
    if args.sbm_poff is not None:
        flat["sbm_pref_offdiag"] = args.sbm_poff
    for key in ("tau_direct", "tau_spill", "beta_deg"):
        val = getattr(args, key)
        if val is not None:
            flat[key] = _csv_floats(val) if isinstance(val, str) else val
    return flat


def _cmd_test(args) -> int:
    report = run_single_test(
        args.edges, args.data,
        stat=args.stat, null_class=args.null_class, n_samples=args.samples,
        estimator=args.estimator, burn_in_mult=args.burn_in_mult,
        thin_mult=args.thin_mult, er_p=args.er_p, master_seed=args.seed,
    )
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"p-value {report.p_value:.6g} (report written to {args.out})", file=sys.stderr)
    else:
        print(text)
    return 0


def _cmd_simulate(args) -> int:
    config = config_from_flat(_simulate_flat_config(args))
    progress = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    table = run_simulation(config, threads=args.threads, progress=progress)
    emit_results(table, args.format, args.out)
    if not args.quiet:
        print(f"wrote {len(table.rows)} rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_cluster(args) -> int:
    g = read_edge_list(args.edges)
    clustering = epsilon_net_clusters(g, args.epsilon)
    lines = ["vertex,cluster,center,is_center"]
    for ci, members in enumerate(clustering.clusters):
        center = clustering.centers[ci]
        for v in members:
            lines.append(f"{v},{ci},{center},{int(v == center)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"{clustering.k} clusters written to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sample_null(args) -> int:
    from .graph import write_edge_list
    from .harness import read_edge_list_with_ids

    z = None
    if args.data is not None:
        ids, z, _ = read_treatment_outcome_csv(args.data)
        g = read_edge_list_with_ids(args.edges, {uid: k for k, uid in enumerate(ids)})
    else:
        g = read_edge_list(args.edges)
    if args.null_class == "blockiso" and z is None:
        print("error: --null-class blockiso needs --data for the treatment vector",
              file=sys.stderr)
        return 2
    swap_cfg = SwapChainConfig.from_multipliers(g.edge_count, args.burn_in_mult, args.thin_mult)
    sampler = make_null_sampler(args.null_class, g, z_obs=z, swap_config=swap_cfg, er_p=args.er_p)
    rng = _stream_rng(args.seed, 0, NULL_SAMPLER_STREAM)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(args.samples - 1)))
    for k in range(args.samples):
        draw = sampler.draw(rng)
        write_edge_list(draw, out_dir / f"draw_{k:0{width}d}.edgelist")
    print(f"wrote {args.samples} draws to {out_dir}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "test": _cmd_test,
        "simulate": _cmd_simulate,
        "cluster": _cmd_cluster,
        "sample-null": _cmd_sample_null,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
