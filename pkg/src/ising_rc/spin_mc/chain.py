"""Model parameters, chain state and single update steps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..lattice import LatticeGraph
from . import kernels

# numba reseeds from 32 bits
SEED_BOUND = 2**32
# clusters used to estimate the mean cluster size before freezing clusters-per-sweep
CALIBRATION_CLUSTERS = 64

RULES = {"heatbath": kernels.HEATBATH, "metropolis": kernels.METROPOLIS}


@dataclass(frozen=True)
class ModelParams:
    """Inverse temperature, external field and lattice spacing.

    ``lattice_spacing`` is bookkeeping for the near-critical scaling
    ``H = h * a^((d+2)/2)``; the sampler only looks at ``beta`` and ``field``.
    """

    beta: float
    field: float = 0.0
    lattice_spacing: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if not np.isfinite(self.field):
            raise ValueError("field must be finite")
        if not self.lattice_spacing > 0:
            raise ValueError(f"lattice spacing must be > 0, got {self.lattice_spacing}")

    @classmethod
    def near_critical(cls, beta: float, h: float, a: float, d: int) -> "ModelParams":
        return cls(beta, h * a ** ((d + 2) / 2), a)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "field": self.field, "lattice_spacing": self.lattice_spacing}


def check_configuration(spins, g: LatticeGraph) -> np.ndarray:
    s = np.asarray(spins)
    if s.shape != (g.n_vertices,):
        raise ValueError(f"configuration has shape {s.shape}, graph has {g.n_vertices} vertices")
    if not np.all((s == 1) | (s == -1)):
        raise ValueError("spins must be +1 or -1")
    return s.astype(np.int8)


def energy_terms(spins, g: LatticeGraph) -> tuple[float, int]:
    """``(sum_{xy} J_xy s_x s_y, sum_x s_x)``.

    The unnormalised weight of the configuration is
    ``exp(beta * bond_sum + H * magnetization)``.
    """
    s = check_configuration(spins, g).astype(np.int64)
    if g.n_edges:
        prod = s[g.edges[:, 0]] * s[g.edges[:, 1]]
        bond = float(np.dot(g.couplings, prod))
    else:
        bond = 0.0
    return bond, int(s.sum())


@dataclass
class ChainState:
    """Spins, generator and sweep count of one Markov chain.

    Update functions mutate the state in place and return it.  Each update
    draws a fresh kernel seed from ``rng``, so two chains built from equal
    seeds follow identical trajectories.
    """

    spins: np.ndarray
    rng: np.random.Generator
    sweeps: int = 0
    clusters_per_sweep: int | None = None
    _mark: np.ndarray | None = field(default=None, repr=False)
    _stamp: int = field(default=0, repr=False)

    @classmethod
    def new(cls, g: LatticeGraph, seed=None, start: str = "random") -> "ChainState":
        rng = np.random.default_rng(seed)
        if start == "random":
            spins = (2 * rng.integers(0, 2, g.n_vertices) - 1).astype(np.int8)
        elif start == "plus":
            spins = np.ones(g.n_vertices, np.int8)
        elif start == "minus":
            spins = -np.ones(g.n_vertices, np.int8)
        else:
            raise ValueError(f"unknown start {start!r}")
        return cls(spins, rng)

    def next_seed(self) -> int:
        return int(self.rng.integers(0, SEED_BOUND))

    def marks(self) -> np.ndarray:
        if self._mark is None or self._mark.shape[0] != self.spins.shape[0]:
            self._mark = np.zeros(self.spins.shape[0], np.int64)
            self._stamp = 0
        return self._mark


def metropolis_sweep(s: ChainState, g: LatticeGraph, p: ModelParams, n_sweeps: int = 1,
                     rule: str = "heatbath") -> ChainState:
    """Sequential single-site sweeps.

    ``rule="heatbath"`` accepts a flip with probability ``1/(1+e^dE)`` and
    ``rule="metropolis"`` with ``min(1, e^-dE)``; both satisfy detailed
    balance.  Heat bath is the default because the plain Metropolis rule
    flips deterministically at ``beta=0, H=0`` and so does not mix there.
    """
    indptr, nbr, cpl = g.csr
    kernels.single_site_sweeps(s.spins, indptr, nbr, cpl, float(p.beta), float(p.field),
                               RULES[rule], int(n_sweeps), s.next_seed())
    s.sweeps += n_sweeps
    return s


def wolff_update(s: ChainState, g: LatticeGraph, p: ModelParams, n_clusters: int = 1) -> ChainState:
    """Build and (unless pinned by the field) flip ``n_clusters`` Wolff clusters."""
    if g.n_edges and np.any(g.couplings < 0):
        raise ValueError("cluster updates need nonnegative couplings")
    indptr, nbr, cpl = g.csr
    mark = s.marks()
    _, _, s._stamp = kernels.wolff_clusters(s.spins, indptr, nbr, cpl, float(p.beta), float(p.field),
                                            int(n_clusters), 0, s.next_seed(), mark, s._stamp)
    return s


def wolff_sweep(s: ChainState, g: LatticeGraph, p: ModelParams, n_sweeps: int = 1) -> ChainState:
    """Clusters covering about ``V`` sites per sweep on average.

    Stopping after a site count is reached would make the stopping time
    depend on the state and bias the samples, so the mean cluster count is
    estimated once from a calibration run and frozen on the state.  The
    count actually used is Poisson with that mean: it stays independent of
    the spins, and a fixed count would make the chain periodic at small
    beta (each sweep would flip a fixed number of single sites).
    """
    indptr, nbr, cpl = g.csr
    mark = s.marks()
    if s.clusters_per_sweep is None:
        built, visited, s._stamp = kernels.wolff_clusters(
            s.spins, indptr, nbr, cpl, float(p.beta), float(p.field), CALIBRATION_CLUSTERS, 0,
            s.next_seed(), mark, s._stamp)
        s.clusters_per_sweep = max(1, round(g.n_vertices * built / visited))
    n_clusters = int(s.rng.poisson(int(n_sweeps) * s.clusters_per_sweep))
    _, _, s._stamp = kernels.wolff_clusters(s.spins, indptr, nbr, cpl, float(p.beta), float(p.field),
                                            n_clusters, 0, s.next_seed(), mark, s._stamp)
    s.sweeps += n_sweeps
    return s


def swendsen_wang_sweep(s: ChainState, g: LatticeGraph, p: ModelParams, n_sweeps: int = 1,
                        labels: np.ndarray | None = None) -> np.ndarray:
    """Swendsen-Wang updates; returns the FK cluster labels of the last one."""
    if labels is None:
        labels = np.empty(g.n_vertices, np.int64)
    kernels.sw_sweeps(s.spins, g.edges, np.ascontiguousarray(g.couplings, np.float64),
                      float(p.beta), float(p.field), int(n_sweeps), s.next_seed(), labels)
    s.sweeps += n_sweeps
    return labels


def hybrid_sweep(s: ChainState, g: LatticeGraph, p: ModelParams, n_sweeps: int = 1) -> ChainState:
    for _ in range(n_sweeps):
        wolff_sweep(s, g, p)
        metropolis_sweep(s, g, p)
        s.sweeps -= 1
    return s


SAMPLERS = {
    "metropolis": metropolis_sweep,
    "metropolis-classic": lambda s, g, p, k: metropolis_sweep(s, g, p, k, rule="metropolis"),
    "wolff": wolff_sweep,
    "sw": lambda s, g, p, k: (swendsen_wang_sweep(s, g, p, k), s)[1],
    "hybrid": hybrid_sweep,
}
