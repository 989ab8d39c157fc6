"""Simulation harness and single-dataset workflow.

run_simulation sweeps rejection-rate cells (network x effect sizes), with a
deterministic per-replicate seeding contract so results are byte-identical
regardless of worker count. run_single_test ingests an observed dataset
(edge list + id,z,y table) and produces one audited p-value report.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ._version import __version__
from .designs import (
    ClusterBernoulliDesign,
    CompletelyRandomizedDesign,
    TreatmentAssignment,
    assign_cluster_bernoulli,
    assign_completely_randomized,
    epsilon_net_clusters,
)
from .errors import InvalidSpec, LengthMismatch, ParseError
from .generators import (
    ErdosRenyiSpec,
    NetworkSpec,
    SbmSpec,
    SmallWorldSpec,
    generate_network,
)
from .graph import Graph
from .null_samplers import SwapChainConfig, make_null_sampler
from .outcomes import OUTCOME_MODELS, OutcomeParams
from .pvalue import PValueReport, pvalue_mc, pvalue_mc_multi
from .statistics import STATISTICS

__all__ = [
    "GRAPH_STREAM",
    "ASSIGNMENT_STREAM",
    "NOISE_STREAM",
    "NULL_SAMPLER_STREAM",
    "derive_replicate_seed",
    "SimulationConfig",
    "CellResult",
    "RejectionRateTable",
    "run_simulation",
    "run_single_test",
    "emit_results",
    "parse_results",
    "read_treatment_outcome_csv",
    "read_edge_list_with_ids",
    "load_config_file",
]

GRAPH_STREAM = "graph"
ASSIGNMENT_STREAM = "assignment"
NOISE_STREAM = "noise"
NULL_SAMPLER_STREAM = "null-sampler"


def derive_replicate_seed(master_seed: int, replicate_index: int, stream_tag: str) -> int:
    """Collision-resistant 128-bit seed from (master, replicate, stream)."""
    payload = f"{int(master_seed)}\x1f{int(replicate_index)}\x1f{stream_tag}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=16).digest(), "little")


def _stream_rng(master_seed: int, replicate_index: int, stream_tag: str) -> np.random.Generator:
    return np.random.default_rng(derive_replicate_seed(master_seed, replicate_index, stream_tag))


# -- configuration -----------------------------------------------------------

_DESIGNS = ("cre", "cluster")
_NULL_CLASSES = ("degseq", "iso", "blockiso", "er", "er-hat")


@dataclass(frozen=True)
class SimulationConfig:
    """One sweep: cells are the cross of networks x tau_direct x tau_spill x
    beta_deg, each evaluated for every statistic against shared null draws."""

    networks: tuple[NetworkSpec, ...]
    design: CompletelyRandomizedDesign | ClusterBernoulliDesign
    outcome_model: str
    tau_direct: tuple[float, ...]
    tau_spill: tuple[float, ...]
    beta_deg: tuple[float, ...]
    noise_sd: float
    stats: tuple[str, ...]
    null_class: str
    n_samples: int
    n_replicates: int
    alpha: float
    estimator: str
    burn_in_mult: float
    thin_mult: float
    master_seed: int

    def __post_init__(self):
        if not self.networks:
            raise InvalidSpec("at least one network spec required")
        if self.n_replicates < 1:
            raise InvalidSpec("need at least one replicate")
        if self.n_samples < 1:
            raise InvalidSpec("need at least one null sample")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidSpec(f"alpha must lie in [0,1], got {self.alpha}")
        if self.outcome_model not in OUTCOME_MODELS:
            raise InvalidSpec(f"unknown outcome model {self.outcome_model!r}")
        if self.null_class not in _NULL_CLASSES:
            raise InvalidSpec(f"unknown null class {self.null_class!r}")
        for s in self.stats:
            if s not in STATISTICS:
                raise InvalidSpec(f"unknown statistic {s!r}")
        if self.null_class == "er":
            ok = all(isinstance(nw, ErdosRenyiSpec) and nw.p is not None for nw in self.networks)
            if not ok:
                raise InvalidSpec("null class 'er' needs ER networks with a known p")

    def to_dict(self) -> dict:
        return {
            "networks": [_network_to_dict(nw) for nw in self.networks],
            "design": _design_to_dict(self.design),
            "outcome_model": self.outcome_model,
            "tau_direct": list(self.tau_direct),
            "tau_spill": list(self.tau_spill),
            "beta_deg": list(self.beta_deg),
            "noise_sd": self.noise_sd,
            "stats": list(self.stats),
            "null_class": self.null_class,
            "n_samples": self.n_samples,
            "n_replicates": self.n_replicates,
            "alpha": self.alpha,
            "estimator": self.estimator,
            "burn_in_mult": self.burn_in_mult,
            "thin_mult": self.thin_mult,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        return cls(
            networks=tuple(_network_from_dict(x) for x in d["networks"]),
            design=_design_from_dict(d["design"]),
            outcome_model=d.get("outcome_model", "proportion-degree"),
            tau_direct=_as_float_tuple(d.get("tau_direct", 0.0)),
            tau_spill=_as_float_tuple(d.get("tau_spill", 0.0)),
            beta_deg=_as_float_tuple(d.get("beta_deg", 0.0)),
            noise_sd=float(d.get("noise_sd", 1.0)),
            stats=tuple(d.get("stats", ("tbond", "tquant"))),
            null_class=d.get("null_class", "degseq"),
            n_samples=int(d.get("n_samples", 200)),
            n_replicates=int(d.get("n_replicates", 500)),
            alpha=float(d.get("alpha", 0.05)),
            estimator=d.get("estimator", "raw"),
            burn_in_mult=float(d.get("burn_in_mult", 100.0)),
            thin_mult=float(d.get("thin_mult", 10.0)),
            master_seed=int(d.get("master_seed", 0)),
        )


def _as_float_tuple(x) -> tuple[float, ...]:
    if isinstance(x, (int, float)):
        return (float(x),)
    return tuple(float(v) for v in x)


def _network_to_dict(nw: NetworkSpec) -> dict:
    if isinstance(nw, SmallWorldSpec):
        return {"kind": "smallworld", "n": nw.n, "k": nw.k, "p_rewire": nw.p_rewire}
    if isinstance(nw, SbmSpec):
        return {
            "kind": "sbm",
            "block_sizes": list(nw.block_sizes),
            "pref_matrix": [list(r) for r in nw.pref_matrix],
        }
    if isinstance(nw, ErdosRenyiSpec):
        return {"kind": "er", "n": nw.n, "p": nw.p, "m": nw.m}
    raise InvalidSpec(f"unknown network spec {type(nw).__name__}")


def _network_from_dict(d: dict) -> NetworkSpec:
    kind = d["kind"]
    if kind == "smallworld":
        return SmallWorldSpec(int(d["n"]), int(d["k"]), float(d["p_rewire"]))
    if kind == "sbm":
        return SbmSpec(
            tuple(int(s) for s in d["block_sizes"]),
            tuple(tuple(float(x) for x in row) for row in d["pref_matrix"]),
        )
    if kind == "er":
        p = d.get("p")
        m = d.get("m")
        return ErdosRenyiSpec(int(d["n"]), p=None if p is None else float(p),
                              m=None if m is None else int(m))
    raise InvalidSpec(f"unknown network kind {kind!r}")


def _design_to_dict(design) -> dict:
    if isinstance(design, CompletelyRandomizedDesign):
        return {"kind": "cre", "n_treated": design.n_treated}
    return {"kind": "cluster", "epsilon": design.epsilon, "p_treat": design.p_treat}


def _design_from_dict(d: dict):
    if d["kind"] == "cre":
        return CompletelyRandomizedDesign(int(d["n_treated"]))
    if d["kind"] == "cluster":
        return ClusterBernoulliDesign(int(d.get("epsilon", 3)), float(d.get("p_treat", 0.5)))
    raise InvalidSpec(f"unknown design kind {d['kind']!r}")


def network_label(nw: NetworkSpec) -> str:
    return _network_to_dict(nw)["kind"]


# -- results -----------------------------------------------------------------


@dataclass
class CellResult:
    """Rejection rate for one (network, effects, statistic) cell."""

    network: str
    design: str
    outcome_model: str
    tau_direct: float
    tau_spill: float
    beta_deg: float
    stat: str
    null_class: str
    alpha: float
    n_samples: int
    n_replicates: int
    n_rejections: int
    n_failed: int
    rate: Optional[float]
    mc_se: Optional[float]
    status: str  # "ok" | "aborted"
    p_values: list[Optional[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "CellResult":
        return cls(**d)


@dataclass
class RejectionRateTable:
    """All cell rows plus everything needed to re-run them exactly."""

    config: dict
    master_seed: int
    tool_version: str
    rows: list[CellResult]

    def to_dict(self) -> dict:
        return {
            "tool": "spilltest",
            "tool_version": self.tool_version,
            "master_seed": self.master_seed,
            "config": self.config,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RejectionRateTable":
        return cls(
            config=d["config"],
            master_seed=d["master_seed"],
            tool_version=d["tool_version"],
            rows=[CellResult.from_dict(r) for r in d["rows"]],
        )

    def find(self, **keys) -> list[CellResult]:
        out = []
        for r in self.rows:
            if all(getattr(r, k) == v for k, v in keys.items()):
                out.append(r)
        return out


# -- replicate execution -------------------------------------------------------


@dataclass(frozen=True)
class _CellContext:
    network: NetworkSpec
    design: CompletelyRandomizedDesign | ClusterBernoulliDesign
    outcome_model: str
    params: OutcomeParams
    stats: tuple[str, ...]
    null_class: str
    n_samples: int
    estimator: str
    burn_in_mult: float
    thin_mult: float
    master_seed: int
    tag: str


def _assign(ctx: _CellContext, g: Graph, rng) -> TreatmentAssignment:
    if isinstance(ctx.design, CompletelyRandomizedDesign):
        return assign_completely_randomized(g.n, ctx.design.n_treated, rng)
    clustering = epsilon_net_clusters(g, ctx.design.epsilon)
    return assign_cluster_bernoulli(clustering, ctx.design.p_treat, rng)


def _build_sampler(ctx: _CellContext, g: Graph, z: np.ndarray):
    swap_cfg = SwapChainConfig.from_multipliers(g.edge_count, ctx.burn_in_mult, ctx.thin_mult)
    er_p = ctx.network.p if isinstance(ctx.network, ErdosRenyiSpec) else None
    return make_null_sampler(ctx.null_class, g, z_obs=z, swap_config=swap_cfg, er_p=er_p)


def _run_replicate(ctx: _CellContext, rep: int) -> dict[str, tuple[Optional[float], Optional[str]]]:
    """One replicate: generate, assign, realize outcomes, test every statistic
    against a shared stream of null draws. Failures are captured, not raised."""
    try:
        g = generate_network(ctx.network, _stream_rng(ctx.master_seed, rep, f"{ctx.tag}/{GRAPH_STREAM}"))
        za = _assign(ctx, g, _stream_rng(ctx.master_seed, rep, f"{ctx.tag}/{ASSIGNMENT_STREAM}"))
        y = OUTCOME_MODELS[ctx.outcome_model](
            g, za.z, ctx.params, _stream_rng(ctx.master_seed, rep, f"{ctx.tag}/{NOISE_STREAM}")
        )
        sampler = _build_sampler(ctx, g, za.z)
        reports, failures = pvalue_mc_multi(
            g, za.z, y, {s: STATISTICS[s] for s in ctx.stats}, sampler,
            ctx.n_samples, estimator=ctx.estimator,
            rng=_stream_rng(ctx.master_seed, rep, f"{ctx.tag}/{NULL_SAMPLER_STREAM}"),
        )
    except Exception as exc:  # per-replicate failure is recorded, not fatal
        return {s: (None, f"{type(exc).__name__}: {exc}") for s in ctx.stats}
    out: dict[str, tuple[Optional[float], Optional[str]]] = {}
    for s in ctx.stats:
        if s in reports:
            out[s] = (reports[s].p_value, None)
        else:
            out[s] = (None, failures[s])
    return out


_ABORT_FAILURE_SHARE = 0.05


def run_simulation(
    config: SimulationConfig,
    threads: int = 1,
    progress: Callable[[str], None] | None = None,
) -> RejectionRateTable:
    """Run the full sweep; bit-reproducible for a given master seed
    regardless of ``threads``."""
    cells = []
    for nw in config.networks:
        for td in config.tau_direct:
            for ts in config.tau_spill:
                for bd in config.beta_deg:
                    cells.append((nw, td, ts, bd))

    rows: list[CellResult] = []
    design_name = _design_to_dict(config.design)["kind"]
    r_total = config.n_replicates
    executor = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for ci, (nw, td, ts, bd) in enumerate(cells):
            ctx = _CellContext(
                network=nw,
                design=config.design,
                outcome_model=config.outcome_model,
                params=OutcomeParams(td, ts, bd, config.noise_sd),
                stats=config.stats,
                null_class=config.null_class,
                n_samples=config.n_samples,
                estimator=config.estimator,
                burn_in_mult=config.burn_in_mult,
                thin_mult=config.thin_mult,
                master_seed=config.master_seed,
                tag=f"cell{ci}",
            )
            task = partial(_run_replicate, ctx)
            if executor is not None:
                chunk = max(1, r_total // (threads * 4))
                outcomes = list(executor.map(task, range(r_total), chunksize=chunk))
            else:
                outcomes = [task(rep) for rep in range(r_total)]

            for stat in config.stats:
                p_values = [outcomes[rep][stat][0] for rep in range(r_total)]
                n_failed = sum(1 for p in p_values if p is None)
                n_reject = sum(1 for p in p_values if p is not None and p <= config.alpha)
                aborted = n_failed > _ABORT_FAILURE_SHARE * r_total
                rate = None if aborted else n_reject / r_total
                rows.append(
                    CellResult(
                        network=network_label(nw),
                        design=design_name,
                        outcome_model=config.outcome_model,
                        tau_direct=td,
                        tau_spill=ts,
                        beta_deg=bd,
                        stat=stat,
                        null_class=config.null_class,
                        alpha=config.alpha,
                        n_samples=config.n_samples,
                        n_replicates=r_total,
                        n_rejections=n_reject,
                        n_failed=n_failed,
                        rate=rate,
                        mc_se=None if aborted else float(np.sqrt(rate * (1 - rate) / r_total)),
                        status="aborted" if aborted else "ok",
                        p_values=p_values,
                    )
                )
                if progress is not None:
                    shown = "aborted" if aborted else f"{rate:.3f}"
                    progress(
                        f"[{len(rows)}/{len(cells) * len(config.stats)}] "
                        f"{network_label(nw)} {design_name} td={td} ts={ts} bd={bd} "
                        f"{stat}: rate={shown} (failed={n_failed})"
                    )
    finally:
        if executor is not None:
            executor.shutdown()
    return RejectionRateTable(
        config=config.to_dict(),
        master_seed=config.master_seed,
        tool_version=__version__,
        rows=rows,
    )


# -- emission ------------------------------------------------------------------

_CSV_FIELDS = [
    "network", "design", "outcome_model", "tau_direct", "tau_spill", "beta_deg",
    "stat", "null_class", "alpha", "n_samples", "n_replicates", "n_rejections",
    "n_failed", "rate", "mc_se", "status", "master_seed", "tool_version",
]


def emit_results(table: RejectionRateTable, fmt: str, path) -> None:
    """Write the table; JSON is lossless (p-value vectors included), CSV is
    the delimited per-cell summary."""
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(table.to_dict(), indent=2) + "\n", encoding="utf-8")
        return
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
            writer.writeheader()
            for r in table.rows:
                d = r.to_dict()
                d["master_seed"] = table.master_seed
                d["tool_version"] = table.tool_version
                d["rate"] = "" if r.rate is None else repr(r.rate)
                d["mc_se"] = "" if r.mc_se is None else repr(r.mc_se)
                writer.writerow({k: d[k] for k in _CSV_FIELDS})
        return
    raise ValueError(f"unknown format {fmt!r}; choose csv or json")


def parse_results(path) -> RejectionRateTable:
    """Read back a JSON table written by emit_results."""
    return RejectionRateTable.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- single-dataset workflow -----------------------------------------------------


def read_treatment_outcome_csv(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Read the id,z,y table; row order defines internal vertex indices."""
    ids: list[str] = []
    z: list[int] = []
    y: list[float] = []
    seen: set[str] = set()
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        for needed in ("id", "z", "y"):
            if needed not in cols:
                raise ParseError(f"missing column {needed!r} in {path}", 1)
        for line_no, row in enumerate(reader, start=2):
            uid = (row["id"] or "").strip()
            if not uid:
                raise ParseError("empty id", line_no)
            if uid in seen:
                raise ParseError(f"duplicate id {uid!r}", line_no)
            seen.add(uid)
            zval = (row["z"] or "").strip()
            if zval not in ("0", "1"):
                raise ParseError(f"treatment must be 0 or 1, got {zval!r}", line_no)
            try:
                yval = float((row["y"] or "").strip())
            except ValueError:
                raise ParseError(f"non-numeric outcome {row['y']!r}", line_no) from None
            ids.append(uid)
            z.append(int(zval))
            y.append(yval)
    return ids, np.asarray(z, dtype=np.int8), np.asarray(y, dtype=np.float64)


def read_edge_list_with_ids(path, id_to_index: dict[str, int]) -> Graph:
    """Edge list whose endpoint tokens may be unit ids from the data table or
    plain 0-based indices. First line is the vertex count and must match."""
    n = len(id_to_index)
    declared = None
    pairs: list[tuple[int, int]] = []

    def resolve(token: str, line_no: int) -> int:
        if token in id_to_index:
            return id_to_index[token]
        try:
            v = int(token)
        except ValueError:
            raise ParseError(f"unknown unit id {token!r}", line_no) from None
        if not 0 <= v < n:
            raise ParseError(f"vertex index {v} outside [0, {n})", line_no)
        return v

    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if declared is None:
                try:
                    declared = int(line)
                except ValueError:
                    raise ParseError(f"expected vertex count, got {line!r}", line_no) from None
                if declared != n:
                    raise LengthMismatch(
                        f"edge list declares {declared} vertices, data table has {n}"
                    )
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected two endpoints, got {line!r}", line_no)
            i = resolve(parts[0], line_no)
            j = resolve(parts[1], line_no)
            pairs.append((i, j))
    if declared is None:
        raise ParseError("empty edge-list file: missing vertex count", 1)
    return Graph(n, pairs)


def run_single_test(
    edge_list_path,
    treatment_outcome_path,
    stat: str = "tbond",
    null_class: str = "degseq",
    n_samples: int = 1000,
    estimator: str = "raw",
    burn_in_mult: float = 100.0,
    thin_mult: float = 10.0,
    er_p: float | None = None,
    master_seed: int = 0,
) -> PValueReport:
    """The observed-dataset workflow: ingest, sample the null, report."""
    ids, z, y = read_treatment_outcome_csv(treatment_outcome_path)
    id_to_index = {uid: k for k, uid in enumerate(ids)}
    g = read_edge_list_with_ids(edge_list_path, id_to_index)
    swap_cfg = SwapChainConfig.from_multipliers(g.edge_count, burn_in_mult, thin_mult)
    sampler = make_null_sampler(null_class, g, z_obs=z, swap_config=swap_cfg, er_p=er_p)
    rng = _stream_rng(master_seed, 0, NULL_SAMPLER_STREAM)
    report = pvalue_mc(
        g, z, y, STATISTICS[stat], sampler, n_samples,
        estimator=estimator, rng=rng, statistic_name=stat,
        seed_info={
            "master_seed": master_seed,
            "replicate_index": 0,
            "stream_tag": NULL_SAMPLER_STREAM,
            "derived_seed": str(derive_replicate_seed(master_seed, 0, NULL_SAMPLER_STREAM)),
            "burn_in_mult": burn_in_mult,
            "thin_mult": thin_mult,
        },
    )
    return report


def load_config_file(path) -> dict:
    """Flat TOML run-config; returns the raw key/value dict."""
    import tomli

    with open(path, "rb") as fh:
        return tomli.load(fh)


def config_from_flat(d: dict) -> SimulationConfig:
    """Build a SimulationConfig from the flat run-config keys (file or CLI)."""
    kinds = d.get("network", "smallworld")
    if isinstance(kinds, str):
        kinds = [kinds]
    networks: list[NetworkSpec] = []
    for kind in kinds:
        if kind == "smallworld":
            networks.append(
                SmallWorldSpec(int(d["n"]), int(d.get("sw_k", 10)), float(d.get("sw_p_rewire", 0.1)))
            )
        elif kind == "sbm":
            if "sbm_pref_matrix" in d:
                spec = SbmSpec(
                    tuple(int(s) for s in d["sbm_block_sizes"]),
                    tuple(tuple(float(x) for x in row) for row in d["sbm_pref_matrix"]),
                )
            else:
                spec = SbmSpec.from_diag(
                    d["sbm_block_sizes"], d["sbm_pref_diag"], d["sbm_pref_offdiag"]
                )
            networks.append(spec)
        elif kind == "er":
            p = d.get("er_p")
            m = d.get("er_m")
            networks.append(
                ErdosRenyiSpec(int(d["n"]), p=None if p is None else float(p),
                               m=None if m is None else int(m))
            )
        else:
            raise InvalidSpec(f"unknown network kind {kind!r}")
    design_kind = d.get("design", "cre")
    if design_kind == "cre":
        design = CompletelyRandomizedDesign(int(d["n_treated"]))
    elif design_kind == "cluster":
        design = ClusterBernoulliDesign(int(d.get("epsilon", 3)), float(d.get("cluster_p", 0.5)))
    else:
        raise InvalidSpec(f"unknown design {design_kind!r}; choose from {_DESIGNS}")
    stats = d.get("stats", ["tbond", "tquant"])
    if isinstance(stats, str):
        stats = [stats]
    return SimulationConfig(
        networks=tuple(networks),
        design=design,
        outcome_model=d.get("outcome", "proportion-degree"),
        tau_direct=_as_float_tuple(d.get("tau_direct", 0.0)),
        tau_spill=_as_float_tuple(d.get("tau_spill", 0.0)),
        beta_deg=_as_float_tuple(d.get("beta_deg", 0.0)),
        noise_sd=float(d.get("noise_sd", 1.0)),
        stats=tuple(stats),
        null_class=d.get("null_class", "degseq"),
        n_samples=int(d.get("samples", 200)),
        n_replicates=int(d.get("reps", 500)),
        alpha=float(d.get("alpha", 0.05)),
        estimator=d.get("estimator", "raw"),
        burn_in_mult=float(d.get("burn_in_mult", 100.0)),
        thin_mult=float(d.get("thin_mult", 10.0)),
        master_seed=int(d.get("seed", 0)),
    )
