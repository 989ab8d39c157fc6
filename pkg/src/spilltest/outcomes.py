"""Potential-outcome models for the simulation study.

Three additive models share the same skeleton: a direct treatment term, a
spillover term driven by the treated share (or presence) among neighbors,
and i.i.d. Normal(0, noise_sd^2) baseline noise. The noise vector is always
the single RNG consumption, so regenerating with a different graph but the
same stream yields identical outcomes whenever the graph terms vanish —
exactly the sharp-null regime the validity tests exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .designs import as_z_array
from .errors import DegenerateGraph
from .graph import Graph
from .statistics import treated_neighbor_counts

__all__ = [
    "OutcomeParams",
    "outcome_proportion_degree",
    "outcome_proportion",
    "outcome_indicator",
    "OUTCOME_MODELS",
]


@dataclass(frozen=True)
class OutcomeParams:
    tau_direct: float = 0.0
    tau_spill: float = 0.0
    beta_deg: float = 0.0
    noise_sd: float = 1.0

    def __post_init__(self):
        if not self.noise_sd > 0:
            raise ValueError(f"noise_sd must be positive, got {self.noise_sd}")


def _base(g: Graph, z, params: OutcomeParams, rng: np.random.Generator):
    zf = as_z_array(z)
    if zf.shape[0] != g.n:
        raise ValueError(f"treatment length {zf.shape[0]} != n {g.n}")
    noise = rng.normal(0.0, params.noise_sd, g.n)
    y = params.tau_direct * zf.astype(np.float64) + noise
    return zf, y


def outcome_proportion_degree(
    g: Graph, z, params: OutcomeParams, rng: np.random.Generator
) -> np.ndarray:
    """Spillover proportional to the treated share among neighbors, plus a
    degree term normalized by the maximum degree. Isolated vertices get the
    direct term and noise only."""
    zf, y = _base(g, z, params, rng)
    deg = g.degrees
    max_deg = int(deg.max()) if g.n else 0
    if params.beta_deg != 0.0 and max_deg == 0:
        raise DegenerateGraph("degree term requested on a graph with no edges")
    connected = deg > 0
    if connected.any():
        t = treated_neighbor_counts(g, zf)
        y[connected] += params.tau_spill * t[connected] / deg[connected]
        if params.beta_deg != 0.0:
            y[connected] += params.beta_deg * deg[connected] / max_deg
    return y


def outcome_proportion(g: Graph, z, params: OutcomeParams, rng: np.random.Generator) -> np.ndarray:
    """The proportion model with no degree term (beta_deg forced to 0)."""
    stripped = OutcomeParams(params.tau_direct, params.tau_spill, 0.0, params.noise_sd)
    return outcome_proportion_degree(g, z, stripped, rng)


def outcome_indicator(g: Graph, z, params: OutcomeParams, rng: np.random.Generator) -> np.ndarray:
    """Flat spillover bump for any unit with at least one treated neighbor."""
    zf, y = _base(g, z, params, rng)
    t = treated_neighbor_counts(g, zf)
    y += params.tau_spill * (t > 0)
    return y


OUTCOME_MODELS = {
    "proportion-degree": outcome_proportion_degree,
    "proportion": outcome_proportion,
    "indicator": outcome_indicator,
}
