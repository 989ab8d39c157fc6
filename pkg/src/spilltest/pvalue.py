"""Monte Carlo and exact p-value engines.

Both engines hold the observed outcome vector fixed and re-evaluate the test
statistic on null graphs (the statistic is imputable under the no-spillover
null conditional on treatment and per-unit degrees), compare with a strict
">", and report ties and undefined draws rather than hiding them. The raw
estimator is the plain exceedance share; the plus-one estimator adds one
phantom exceedance for guaranteed finite-sample validity under Monte Carlo
approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .designs import as_z_array
from .errors import ExcessiveDegeneracy, ObservedStatisticUndefined
from .graph import Graph
from .null_samplers import NullClassMode, enumerate_null_class
from .statistics import StatisticFn

__all__ = ["PValueReport", "pvalue_mc", "pvalue_mc_multi", "pvalue_exact", "ESTIMATORS"]

ESTIMATORS = ("raw", "plus-one")

_MAX_UNDEFINED_SHARE = 0.10


@dataclass
class PValueReport:
    """Everything needed to audit one test: the observed statistic, the null
    draws, the p-value under the declared estimator, degeneracy counts, and
    seed provenance."""

    statistic: str
    mode: str
    estimator: str
    t_obs: float
    p_value: float
    n_draws: int
    n_defined: int
    n_undefined: int
    n_ties: int
    n_exceed: int
    null_draws: list[Optional[float]]
    multiplicities: Optional[list[int]] = None
    seed_info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "mode": self.mode,
            "estimator": self.estimator,
            "t_obs": self.t_obs,
            "p_value": self.p_value,
            "n_draws": self.n_draws,
            "n_defined": self.n_defined,
            "n_undefined": self.n_undefined,
            "n_ties": self.n_ties,
            "n_exceed": self.n_exceed,
            "null_draws": self.null_draws,
            "multiplicities": self.multiplicities,
            "seed_info": self.seed_info,
        }


def _estimate(estimator: str, n_exceed: int, n_defined: int) -> float:
    if estimator == "raw":
        return n_exceed / n_defined
    if estimator in ("plus-one", "plus_one"):
        return (1 + n_exceed) / (n_defined + 1)
    raise ValueError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")


def pvalue_mc_multi(
    g_obs: Graph,
    z_obs,
    y_obs,
    stats: Mapping[str, StatisticFn],
    sampler,
    n_samples: int,
    estimator: str = "raw",
    rng: np.random.Generator | None = None,
    seed_info: dict | None = None,
) -> tuple[dict[str, PValueReport], dict[str, str]]:
    """Evaluate several statistics against one shared stream of null draws.

    Returns (reports, failures): statistics whose observed value is undefined
    or whose null draws are excessively degenerate land in ``failures`` with
    a reason string instead of raising, so sweep replicates can record and
    move on. ``pvalue_mc`` is the raising single-statistic wrapper.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    _estimate(estimator, 0, 1)  # reject unknown estimator names up front
    if rng is None:
        rng = np.random.default_rng()
    z = as_z_array(z_obs)
    y = np.asarray(y_obs, dtype=np.float64)

    failures: dict[str, str] = {}
    live: dict[str, float] = {}
    for name, fn in stats.items():
        t_obs = fn(g_obs, z, y)
        if t_obs is None:
            failures[name] = "observed statistic undefined"
        else:
            live[name] = float(t_obs)

    draws: dict[str, list[Optional[float]]] = {name: [] for name in live}
    for _ in range(n_samples):
        g_null = sampler.draw(rng)
        for name in live:
            t = stats[name](g_null, z, y)
            draws[name].append(None if t is None else float(t))

    reports: dict[str, PValueReport] = {}
    for name, t_obs in live.items():
        vals = draws[name]
        defined = [v for v in vals if v is not None]
        n_undefined = n_samples - len(defined)
        if n_undefined > _MAX_UNDEFINED_SHARE * n_samples:
            failures[name] = (
                f"excessive degeneracy: {n_undefined}/{n_samples} null draws undefined"
            )
            continue
        arr = np.asarray(defined)
        n_exceed = int((arr > t_obs).sum())
        n_ties = int((arr == t_obs).sum())
        reports[name] = PValueReport(
            statistic=name,
            mode=getattr(sampler, "name", type(sampler).__name__),
            estimator=estimator,
            t_obs=t_obs,
            p_value=_estimate(estimator, n_exceed, len(defined)),
            n_draws=n_samples,
            n_defined=len(defined),
            n_undefined=n_undefined,
            n_ties=n_ties,
            n_exceed=n_exceed,
            null_draws=vals,
            seed_info=dict(seed_info or {}),
        )
    return reports, failures


def pvalue_mc(
    g_obs: Graph,
    z_obs,
    y_obs,
    stat: StatisticFn,
    sampler,
    n_samples: int,
    estimator: str = "raw",
    rng: np.random.Generator | None = None,
    statistic_name: str = "statistic",
    seed_info: dict | None = None,
) -> PValueReport:
    """Monte Carlo p-value for one statistic; raises on degeneracy."""
    reports, failures = pvalue_mc_multi(
        g_obs, z_obs, y_obs, {statistic_name: stat}, sampler, n_samples,
        estimator=estimator, rng=rng, seed_info=seed_info,
    )
    if statistic_name in failures:
        reason = failures[statistic_name]
        if reason.startswith("observed"):
            raise ObservedStatisticUndefined(reason)
        raise ExcessiveDegeneracy(reason)
    return reports[statistic_name]


def pvalue_exact(
    g_obs: Graph,
    z_obs,
    y_obs,
    stat: StatisticFn,
    mode: str | NullClassMode,
    statistic_name: str = "statistic",
) -> PValueReport:
    """Exact class-average p-value over the enumerated null class.

    Image multiplicities weight the average for the isomorphism classes.
    Undefined class members are excluded from the denominator and counted,
    mirroring the Monte Carlo convention.
    """
    mode = NullClassMode(mode)
    z = as_z_array(z_obs)
    y = np.asarray(y_obs, dtype=np.float64)
    t_obs = stat(g_obs, z, y)
    if t_obs is None:
        raise ObservedStatisticUndefined("observed statistic undefined")
    t_obs = float(t_obs)

    graphs, mult = enumerate_null_class(
        g_obs, mode,
        z_obs=z if mode is NullClassMode.BLOCK_DEGREE_ISOMORPHISM else None,
    )
    vals: list[Optional[float]] = []
    exceed_w = 0
    tie_w = 0
    defined_w = 0
    undefined_w = 0
    for g_null, w in zip(graphs, mult):
        t = stat(g_null, z, y)
        vals.append(None if t is None else float(t))
        if t is None:
            undefined_w += int(w)
            continue
        defined_w += int(w)
        if t > t_obs:
            exceed_w += int(w)
        elif t == t_obs:
            tie_w += int(w)
    total = defined_w + undefined_w
    if defined_w == 0 or undefined_w > _MAX_UNDEFINED_SHARE * total:
        raise ExcessiveDegeneracy(
            f"excessive degeneracy: {undefined_w}/{total} class members undefined"
        )
    return PValueReport(
        statistic=statistic_name,
        mode=mode.value,
        estimator="exact",
        t_obs=t_obs,
        p_value=exceed_w / defined_w,
        n_draws=total,
        n_defined=defined_w,
        n_undefined=undefined_w,
        n_ties=tie_w,
        n_exceed=exceed_w,
        null_draws=vals,
        multiplicities=[int(w) for w in mult],
    )
