"""Two-point tables and susceptibilities."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from ..lattice import PERIODIC, LatticeGraph
from .records import EstimateRecord, SusceptibilityRecord


def spins_of(samples) -> np.ndarray:
    """``(n, V)`` spin array from a stream, an array or a list of configurations."""
    s = getattr(samples, "spins", samples)
    s = np.asarray(s)
    if s.ndim == 1:
        s = s[None, :]
    if s.ndim != 2 or s.shape[0] == 0:
        raise ValueError("empty or malformed sample stream")
    return s


def _seed(samples):
    meta = getattr(samples, "metadata", None) or {}
    return meta.get("seed")


def two_point_table(samples, pairs: Iterable[tuple[int, int]]) -> dict[tuple[int, int], EstimateRecord]:
    """Sample means of ``s_x s_y`` with batch-means errors, keyed by pair."""
    S = spins_of(samples)
    seed = _seed(samples)
    out = {}
    for x, y in pairs:
        prod = S[:, x].astype(np.int64) * S[:, y]
        out[(x, y)] = EstimateRecord.from_series(prod, seed)
    return out


def box_sites(g: LatticeGraph, n: int | None) -> np.ndarray:
    """Vertices with sup-norm at most ``n`` (all vertices when ``n`` is None)."""
    if n is None:
        return np.arange(g.n_vertices)
    return np.nonzero(np.all(np.abs(g.coords) <= n, axis=1))[0]


def _field_of(samples) -> float:
    params = getattr(samples, "params", None)
    return 0.0 if params is None else float(params.field)


def _pair_table(source):
    if isinstance(source, Mapping):
        return source
    values = getattr(source, "values", None)
    return values if isinstance(values, dict) else None


def susceptibility(source, g: LatticeGraph, n: int | None = None, beta: float | None = None,
                   truncated: bool = False) -> SusceptibilityRecord:
    """``chi_n = sum_{x,y in box} <s_x s_y> / |box|``.

    ``source`` is either a sample stream (estimated as ``<M_box^2>/|box|``)
    or an exact pair table mapping ``frozenset({x, y})`` to the correlation.
    Streams at nonzero field are rejected unless ``truncated=True``, which
    subtracts ``<M_box>^2``.
    """
    sites = box_sites(g, n)
    B = len(sites)
    radius = n if n is not None else (g.radii[0] if g.radii else None)
    params = getattr(source, "params", None)
    if beta is None and params is not None:
        beta = params.beta
    table = _pair_table(source)
    if table is not None:
        total = 0.0
        for i in sites:
            for j in sites:
                total += 1.0 if i == j else table[frozenset((int(i), int(j)))]
        return SusceptibilityRecord(radius, beta, g.bc, EstimateRecord.exact(total / B))
    if _field_of(source) != 0.0 and not truncated:
        raise ValueError("susceptibility of a nonzero-field stream needs truncated=True")
    S = spins_of(source)
    M = S[:, sites].sum(axis=1, dtype=np.int64).astype(np.float64)
    rec = EstimateRecord.from_series(M**2 / B, _seed(source))
    if truncated:
        mean_m = M.mean()
        # delta method: d/dm of m^2 is 2m, so subtract the mean's contribution
        m_rec = EstimateRecord.from_series(M, _seed(source))
        value = rec.value - mean_m**2 / B
        err = float(np.hypot(rec.std_error, 2 * abs(mean_m) * m_rec.std_error / B))
        rec = EstimateRecord(value, err, rec.n_samples, rec.tau, rec.seed, {"truncated": True})
    return SusceptibilityRecord(radius, beta, g.bc, rec)


def chi_pair_sum(samples, sites) -> float:
    """``sum_{x,y} mean(s_x s_y) / |sites|``; equals ``mean(M^2)/|sites|`` on the same samples."""
    S = spins_of(samples)[:, sites].astype(np.float64)
    C = S.T @ S / S.shape[0]
    return float(C.sum() / len(sites))


def bulk_pairs(g: LatticeGraph, n: int) -> np.ndarray:
    """Pairs ``(x, x + n e_a)`` with both ends in the box of radius ``n``, over all axes.

    On a periodic graph the shift wraps around.
    """
    C = g.coords
    inner = np.all(np.abs(C) <= n, axis=1)
    lower = np.asarray(g.lower)
    shape = np.asarray(g.shape)
    strides = np.asarray(g.strides)
    out = []
    for a in range(g.dim):
        if g.bc == PERIODIC:
            xs = np.nonzero(inner)[0]
        else:
            xs = np.nonzero(inner & (C[:, a] <= 0))[0]
        yc = C[xs] - lower
        yc[:, a] = yc[:, a] + n
        if g.bc == PERIODIC:
            yc[:, a] %= shape[a]
        ys = yc @ strides
        out.append(np.stack([xs, ys], axis=1))
    return np.concatenate(out).astype(np.int64)
