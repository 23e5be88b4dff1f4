"""Brute-force sums over all 2^V spin configurations."""

from __future__ import annotations

import math
from typing import Callable, Iterable, Iterator

import numpy as np

from ..lattice import LatticeGraph

VERTEX_BUDGET = 24
_CHUNK_BITS = 16


class EnumerationBudgetExceeded(RuntimeError):
    """The graph has too many vertices for exhaustive enumeration."""


def _check_budget(g: LatticeGraph, budget: int) -> None:
    if g.n_vertices > budget:
        raise EnumerationBudgetExceeded(
            f"{g.n_vertices} vertices exceeds the enumeration budget of {budget}"
        )


def _low_block(bits: int) -> np.ndarray:
    codes = np.arange(1 << bits, dtype=np.int64)
    # bit set -> spin -1; vertex 0 is the least significant bit
    return (1 - 2 * ((codes[:, None] >> np.arange(bits)) & 1)).astype(np.int8)


def iter_configurations(g: LatticeGraph, beta: float, H: float = 0.0,
                        budget: int = VERTEX_BUDGET) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(spins, weights)`` chunks covering every configuration once.

    Weights are ``exp(beta*sum J s s + H*sum s - shift)`` with a fixed shift
    equal to the largest possible exponent, so every weight lies in (0, 1].
    """
    _check_budget(g, budget)
    V = g.n_vertices
    lo = min(V, _CHUNK_BITS)
    low = _low_block(lo)
    hi_bits = V - lo
    u, v = g.edges[:, 0], g.edges[:, 1]
    K = beta * g.couplings
    shift = float(K.sum()) + abs(H) * V
    for code in range(1 << hi_bits):
        hi = (1 - 2 * ((code >> np.arange(hi_bits)) & 1)).astype(np.int8)
        spins = np.empty((len(low), V), np.int8)
        spins[:, :lo] = low
        spins[:, lo:] = hi
        logw = (spins[:, u] * spins[:, v]).astype(np.float64) @ K
        if H:
            logw += H * spins.sum(axis=1, dtype=np.int64)
        yield spins, np.exp(logw - shift)


def log_partition(g: LatticeGraph, beta: float, H: float = 0.0, budget: int = VERTEX_BUDGET) -> float:
    parts = []
    shift = float(beta * g.couplings.sum()) + abs(H) * g.n_vertices
    for _, w in iter_configurations(g, beta, H, budget):
        parts.append(float(w.sum()))
    return math.log(math.fsum(parts)) + shift


def expectation(g: LatticeGraph, beta: float, H: float,
                fn: Callable[[np.ndarray], np.ndarray], budget: int = VERTEX_BUDGET) -> np.ndarray:
    """Exact ``<fn(sigma)>``; ``fn`` maps a (C, V) spin block to (C,) or (C, k) values."""
    num, z = [], []
    for spins, w in iter_configurations(g, beta, H, budget):
        vals = np.asarray(fn(spins), dtype=np.float64)
        num.append(np.tensordot(w, vals, axes=(0, 0)))
        z.append(float(w.sum()))
    total = np.sum(np.stack(num), axis=0)
    return total / math.fsum(z)


def correlations(g: LatticeGraph, beta: float, H: float, subsets: Iterable[Iterable[int]],
                 budget: int = VERTEX_BUDGET) -> list[float]:
    subsets = [sorted(set(A)) for A in subsets]

    def fn(s):
        out = np.ones((len(s), len(subsets)))
        for j, A in enumerate(subsets):
            if A:
                out[:, j] = np.prod(s[:, A], axis=1, dtype=np.int64)
        return out

    return [float(x) for x in expectation(g, beta, H, fn, budget)]


def correlation_matrix(g: LatticeGraph, beta: float, H: float = 0.0,
                       budget: int = VERTEX_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """``(<sigma_i>, <sigma_i sigma_j>)`` for all vertices."""
    V = g.n_vertices
    first = np.zeros(V)
    second = np.zeros((V, V))
    z = []
    for spins, w in iter_configurations(g, beta, H, budget):
        s = spins.astype(np.float64)
        first += w @ s
        second += (s * w[:, None]).T @ s
        z.append(float(w.sum()))
    Z = math.fsum(z)
    return first / Z, second / Z


def probabilities(g: LatticeGraph, beta: float, H: float = 0.0, budget: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """All configurations and their exact probabilities (small graphs only)."""
    _check_budget(g, budget)
    blocks, ws = [], []
    for spins, w in iter_configurations(g, beta, H, budget):
        blocks.append(spins)
        ws.append(w)
    spins = np.concatenate(blocks)
    w = np.concatenate(ws)
    return spins, w / w.sum()


def exact_samples(g: LatticeGraph, beta: float, H: float, n: int, rng: np.random.Generator,
                  budget: int = 16) -> np.ndarray:
    """``n`` independent draws from the Ising measure, as an (n, V) int8 array."""
    spins, p = probabilities(g, beta, H, budget)
    idx = rng.choice(len(p), size=n, p=p)
    return spins[idx]
