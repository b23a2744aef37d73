"""Pareto-front quality indicators: IGD, spacing, hypervolume, pure diversity, spread.

All functions take fronts as (n_points, n_objectives) float arrays of finite
values under minimization.  The hypervolume is exact (dimension-sweep
recursion), intended for up to four objectives.
"""

from __future__ import annotations

import warnings

import numpy as np


class DimensionMismatchError(ValueError):
    """Front, reference set or reference point dimensions disagree."""


class TooFewPointsError(ValueError):
    """The indicator needs more points than were supplied."""


class DegenerateDenominatorWarning(RuntimeWarning):
    """The spread denominator vanished; the indicator defaults to 0."""


def _as_front(points, name: str = "front") -> np.ndarray:
    out = np.asarray(points, dtype=float)
    if out.ndim != 2 or out.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty 2-D array")
    if not np.isfinite(out).all():
        raise ValueError(f"{name} contains non-finite values")
    return out


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def igd(p: np.ndarray, p_star: np.ndarray) -> float:
    """Mean distance from each reference-set point to its nearest front point."""
    p = _as_front(p, "p")
    p_star = _as_front(p_star, "p_star")
    if p.shape[1] != p_star.shape[1]:
        raise DimensionMismatchError("p and p_star must share the objective dimension")
    return float(_pairwise_distances(p_star, p).min(axis=1).mean())


def _nearest_neighbor_distances(p: np.ndarray) -> np.ndarray:
    d = _pairwise_distances(p, p)
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def spacing(p: np.ndarray) -> float:
    """Standard deviation of the nearest-neighbor distances within the front."""
    p = _as_front(p, "p")
    if p.shape[0] < 2:
        raise TooFewPointsError("spacing needs at least two points")
    d = _nearest_neighbor_distances(p)
    return float(np.sqrt(((d.mean() - d) ** 2).sum() / (p.shape[0] - 1)))


def nondominated_filter(points: np.ndarray) -> np.ndarray:
    """Deduplicated nondominated subset, rows sorted lexicographically."""
    pts = np.unique(_as_front(points, "points"), axis=0)
    less_eq = (pts[:, None, :] <= pts[None, :, :]).all(axis=-1)
    strictly = (pts[:, None, :] < pts[None, :, :]).any(axis=-1)
    dominated = (less_eq & strictly).any(axis=0)
    return pts[~dominated]


def build_reference_set(runs) -> np.ndarray:
    """Pooled nondominated subset across several fronts (the surrogate optimum)."""
    fronts = [_as_front(r, "run front") for r in runs]
    if not fronts:
        raise ValueError("need at least one run")
    return nondominated_filter(np.vstack(fronts))


def hypervolume(p: np.ndarray, ref: np.ndarray) -> float:
    """Exact Lebesgue measure of the union of boxes between the front and ``ref``.

    Points not strictly below the reference in every coordinate contribute
    nothing and are discarded up front.
    """
    p = _as_front(p, "p")
    ref = np.asarray(ref, dtype=float).reshape(-1)
    if p.shape[1] != ref.shape[0]:
        raise DimensionMismatchError("reference point dimension mismatch")
    keep = (p < ref).all(axis=1)
    pts = np.unique(p[keep], axis=0)
    if pts.shape[0] == 0:
        return 0.0
    return _hv_sweep(_nondominated_rows(pts), ref)


def _nondominated_rows(pts: np.ndarray) -> np.ndarray:
    less_eq = (pts[:, None, :] <= pts[None, :, :]).all(axis=-1)
    strictly = (pts[:, None, :] < pts[None, :, :]).any(axis=-1)
    return pts[~(less_eq & strictly).any(axis=0)]

def _hv_sweep(pts: np.ndarray, ref: np.ndarray) -> float:
    """Dimension sweep: slice along the last objective, recurse on the rest."""
    if ref.shape[0] == 1:
        return float(ref[0] - pts[:, 0].min())
    order = np.argsort(pts[:, -1], kind="stable")
    pts = pts[order]
    levels = np.append(pts[1:, -1], ref[-1])
    total = 0.0
    for i in range(pts.shape[0]):
        thickness = levels[i] - pts[i, -1]
        if thickness > 0.0:
            slab = _nondominated_rows(pts[: i + 1, :-1])
            total += thickness * _hv_sweep(slab, ref[:-1])
    return total


def pure_diversity(p: np.ndarray) -> float:
    """Accumulated dissimilarity: greedily remove the member farthest from its
    nearest remaining neighbor, summing that distance at each removal."""
    p = _as_front(p, "p")
    n = p.shape[0]
    if n <= 1:
        return 0.0
    dist = _pairwise_distances(p, p)
    np.fill_diagonal(dist, np.inf)
    active = list(range(n))
    total = 0.0
    while len(active) > 1:
        sub = dist[np.ix_(active, active)]
        nearest = sub.min(axis=1)
        pick = int(np.argmax(nearest))
        total += float(nearest[pick])
        active.pop(pick)
    return total


def _min_distance_excluding_equal(point: np.ndarray, p: np.ndarray) -> float:
    d = np.sqrt(((p - point) ** 2).sum(axis=1))
    mask = (p != point).any(axis=1)
    if not mask.any():
        return 0.0
    return float(d[mask].min())


def spread(p: np.ndarray, p_star: np.ndarray) -> float:
    """Extreme-point slack plus nearest-neighbor distance variation, normalized.

    Extremes are the per-objective argmax rows of the reference set.  The mean
    gap term averages, over reference points, the distance to the nearest
    front point (excluding exact coincidences, so shared points measure their
    true neighbor gap rather than zero).
    """
    p = _as_front(p, "p")
    p_star = _as_front(p_star, "p_star")
    if p.shape[1] != p_star.shape[1]:
        raise DimensionMismatchError("p and p_star must share the objective dimension")
    m = p.shape[1]
    extreme_gap = 0.0
    for j in range(m):
        e_j = p_star[int(np.argmax(p_star[:, j]))]
        extreme_gap += float(np.sqrt(((p - e_j) ** 2).sum(axis=1)).min())
    if p.shape[0] >= 2:
        nn = _nearest_neighbor_distances(p)
    else:
        nn = np.zeros(1)
    d_bar = float(
        np.mean([_min_distance_excluding_equal(chi, p) for chi in p_star])
    )
    numerator = extreme_gap + float(np.abs(nn - d_bar).sum())
    denominator = extreme_gap + p.shape[0] * d_bar
    if denominator == 0.0:
        warnings.warn(
            "spread denominator is zero; returning 0", DegenerateDenominatorWarning
        )
        return 0.0
    return numerator / denominator
