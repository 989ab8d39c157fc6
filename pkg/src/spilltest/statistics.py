"""Test statistics for spillover detection.

Every statistic is a pure function of (graph, treatment vector, outcome
vector) returning a float, or None when a required sub-population is empty
(the undefined case the p-value engines count and exclude). All three
families are invariant under simultaneous relabeling of (g, z, y) and under
adding a constant to y.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .designs import as_z_array
from .errors import EmptyInput
from .graph import Graph

__all__ = [
    "treated_neighbor_counts",
    "quantile_nearest_rank",
    "neighbor_exposure_contrast",
    "exposure_quantile_contrast",
    "edge_weighted_contrast",
    "StatisticFn",
    "STATISTICS",
    "make_statistic",
]

StatisticFn = Callable[[Graph, np.ndarray, np.ndarray], Optional[float]]


def treated_neighbor_counts(g: Graph, z) -> np.ndarray:
    """Per-vertex count of treated neighbors (float vector)."""
    zf = as_z_array(z).astype(np.float64)
    e = g.edge_array
    if e.shape[0] == 0:
        return np.zeros(g.n)
    out = np.bincount(e[:, 0], weights=zf[e[:, 1]], minlength=g.n)
    out += np.bincount(e[:, 1], weights=zf[e[:, 0]], minlength=g.n)
    return out


def quantile_nearest_rank(values, q: float) -> float:
    """Nearest-rank quantile: the ceil(q*m)-th smallest of m values."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise EmptyInput("quantile of an empty collection")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    # tiny slack keeps exact products like 0.75*4 == 3.0 from rounding up
    rank = max(1, math.ceil(q * vals.size - 1e-12))
    return float(np.partition(vals, rank - 1)[rank - 1])


def _arm_masks(z: np.ndarray, arm: str) -> np.ndarray:
    if arm == "control":
        return z == 0
    if arm == "treated":
        return z == 1
    raise ValueError(f"unknown arm {arm!r}")


def _combine_arms(z: np.ndarray, control: Optional[float], treated: Optional[float]):
    if control is None or treated is None:
        return None
    n = z.shape[0]
    n_t = int(z.sum())
    return ((n - n_t) * control + n_t * treated) / n


def _exposure_arm(t: np.ndarray, mask: np.ndarray, y: np.ndarray) -> Optional[float]:
    exposed = mask & (t > 0)
    unexposed = mask & (t == 0)
    if not exposed.any() or not unexposed.any():
        return None
    return float(y[exposed].mean() - y[unexposed].mean())


def neighbor_exposure_contrast(g: Graph, z, y, arm: str = "weighted") -> Optional[float]:
    """Mean outcome of arm members with at least one treated neighbor minus
    the mean over arm members with none.

    The weighted form combines the control- and treated-arm contrasts with
    weights N_c/N and N_t/N; it is undefined whenever either arm contrast is.
    """
    z = as_z_array(z)
    y = np.asarray(y, dtype=np.float64)
    t = treated_neighbor_counts(g, z)
    if arm == "weighted":
        return _combine_arms(z, _exposure_arm(t, z == 0, y), _exposure_arm(t, z == 1, y))
    return _exposure_arm(t, _arm_masks(z, arm), y)


def _quantile_arm(share: np.ndarray, members: np.ndarray, y: np.ndarray) -> Optional[float]:
    if not members.any():
        return None
    sh = share[members]
    hi = sh >= quantile_nearest_rank(sh, 0.75)
    lo = sh <= quantile_nearest_rank(sh, 0.25)
    if not hi.any() or not lo.any():
        return None
    ym = y[members]
    return float(ym[hi].mean() - ym[lo].mean())


def exposure_quantile_contrast(g: Graph, z, y, arm: str = "weighted") -> Optional[float]:
    """Mean outcome over arm members whose treated-neighbor share reaches the
    75% nearest-rank quantile minus the mean over those at or below the 25%
    quantile. Isolated vertices carry no share and are excluded; the quantiles
    are taken within the (non-isolated) arm."""
    z = as_z_array(z)
    y = np.asarray(y, dtype=np.float64)
    deg = g.degrees
    connected = deg > 0
    share = np.zeros(z.shape[0])
    t = treated_neighbor_counts(g, z)
    np.divide(t, deg, out=share, where=connected)
    if arm == "weighted":
        return _combine_arms(
            z,
            _quantile_arm(share, (z == 0) & connected, y),
            _quantile_arm(share, (z == 1) & connected, y),
        )
    return _quantile_arm(share, _arm_masks(z, arm) & connected, y)


def edge_weighted_contrast(g: Graph, z, y) -> Optional[float]:
    """Average outcome over ordered adjacent pairs (i, j) with j treated,
    minus the average over pairs with j in control."""
    z = as_z_array(z)
    y = np.asarray(y, dtype=np.float64)
    t = treated_neighbor_counts(g, z)
    c = g.degrees - t
    den_t = t.sum()
    den_c = c.sum()
    if den_t == 0 or den_c == 0:
        return None
    return float(np.dot(y, t) / den_t - np.dot(y, c) / den_c)


def _fix_arm(fn, arm):
    def stat(g, z, y):
        return fn(g, z, y, arm)

    return stat


STATISTICS: dict[str, StatisticFn] = {
    "tbond": edge_weighted_contrast,
    "ti": _fix_arm(neighbor_exposure_contrast, "weighted"),
    "ti-control": _fix_arm(neighbor_exposure_contrast, "control"),
    "ti-treated": _fix_arm(neighbor_exposure_contrast, "treated"),
    "tquant": _fix_arm(exposure_quantile_contrast, "weighted"),
    "tquant-control": _fix_arm(exposure_quantile_contrast, "control"),
    "tquant-treated": _fix_arm(exposure_quantile_contrast, "treated"),
}


def make_statistic(name: str) -> StatisticFn:
    try:
        return STATISTICS[name]
    except KeyError:
        raise ValueError(f"unknown statistic {name!r}; choose from {sorted(STATISTICS)}") from None
