"""Exact Ising expectations on small graphs, by enumeration or transfer matrix."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..lattice import LatticeGraph
from . import enumeration as _enum
from .enumeration import VERTEX_BUDGET, EnumerationBudgetExceeded
from .transfer import TransferOracle, transfer_applicable

METHODS = ("auto", "enumerate", "transfer")


def _pick(g: LatticeGraph, method: str) -> str:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if method != "auto":
        return method
    if g.n_vertices <= 16:
        return "enumerate"
    if transfer_applicable(g):
        return "transfer"
    if g.n_vertices <= VERTEX_BUDGET:
        return "enumerate"
    raise EnumerationBudgetExceeded(
        f"{g!r}: more than {VERTEX_BUDGET} vertices and no transfer-matrix route"
    )


def log_partition(g: LatticeGraph, beta: float, H: float = 0.0, method: str = "auto") -> float:
    """``log sum_sigma exp(beta sum J s s + H sum s)``."""
    if _pick(g, method) == "transfer":
        return TransferOracle(g, beta, H).log_partition()
    return _enum.log_partition(g, beta, H)


def exact_correlation(g: LatticeGraph, beta: float, H: float, A: Iterable[int],
                      method: str = "auto") -> float:
    """``<prod_{x in A} sigma_x>`` under the Ising measure on ``g``.

    Refuses (raises :class:`EnumerationBudgetExceeded`) rather than truncating
    when the graph is too large for both routes.
    """
    A = list(A)
    if _pick(g, method) == "transfer":
        return TransferOracle(g, beta, H).correlation(A)
    return _enum.correlations(g, beta, H, [A])[0]


def correlation_matrix(g: LatticeGraph, beta: float, H: float = 0.0,
                       method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    if _pick(g, method) == "transfer":
        return TransferOracle(g, beta, H).correlation_matrix()
    return _enum.correlation_matrix(g, beta, H)


@dataclass
class CorrelationTable:
    fingerprint: str
    beta: float
    H: float
    values: dict = field(default_factory=dict)

    def __getitem__(self, A) -> float:
        return self.values[frozenset(A)]


def correlation_table(g: LatticeGraph, beta: float, H: float,
                      subsets: Iterable[Iterable[int]], method: str = "auto") -> CorrelationTable:
    subsets = [frozenset(A) for A in subsets]
    if _pick(g, method) == "transfer":
        T = TransferOracle(g, beta, H)
        vals = [T.correlation(A) for A in subsets]
    else:
        vals = _enum.correlations(g, beta, H, subsets)
    return CorrelationTable(g.fingerprint(), beta, H, dict(zip(subsets, vals)))


def path_correlation(beta: float, distance: int) -> float:
    """Free-BC chain: ``<sigma_x sigma_y> = tanh(beta)^|x-y|`` for any chain length."""
    return float(np.tanh(beta) ** abs(distance))
