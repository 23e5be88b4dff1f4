"""Scalar Monte Carlo estimates with error bars, mergeable across disjoint runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .autocorr import batch_means_error, integrated_autocorr_time


@dataclass(frozen=True)
class EstimateRecord:
    """Mean of a sample series with its standard error.

    ``parts`` keeps ``(n, value, std_error, tau)`` of every merged piece so
    merged means are computed with an exactly rounded sum and so do not depend
    on the merge order.
    """

    value: float
    std_error: float
    n_samples: int
    tau: float = 0.5
    seed: object = None
    meta: dict = field(default_factory=dict, compare=False)
    parts: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def from_series(cls, x, seed=None, **meta) -> "EstimateRecord":
        x = np.asarray(x, dtype=np.float64)
        if x.size == 0:
            raise ValueError("empty sample series")
        if x.size == 1:
            return cls(float(x[0]), float("nan"), 1, 0.5, seed, meta)
        if np.ptp(x) == 0:
            return cls(float(x[0]), 0.0, len(x), 0.5, seed, meta)
        err, _ = batch_means_error(x)
        return cls(float(x.mean()), err, len(x), integrated_autocorr_time(x), seed, meta)

    @classmethod
    def exact(cls, value: float, **meta) -> "EstimateRecord":
        return cls(float(value), 0.0, 0, 0.0, None, meta)

    def _parts(self) -> tuple:
        return self.parts or ((self.n_samples, self.value, self.std_error, self.tau),)

    def merge(self, other: "EstimateRecord") -> "EstimateRecord":
        """Combine estimates from disjoint sample sets (weights proportional to n)."""
        parts = self._parts() + other._parts()
        N = sum(p[0] for p in parts)
        if N == 0:
            raise ValueError("cannot merge records without samples")
        value = math.fsum(n * v for n, v, _, _ in parts) / N
        err = math.sqrt(math.fsum((n * e) ** 2 for n, _, e, _ in parts)) / N
        tau = math.fsum(n * t for n, _, _, t in parts) / N
        seeds = tuple(s for s in (self.seed, other.seed) if s is not None)
        parts = tuple(sorted(parts))
        return EstimateRecord(value, err, N, tau, seeds or None, {}, parts)

    def z_score(self, reference: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.value == reference else math.inf
        return (self.value - reference) / self.std_error

    def agrees(self, reference: float, n_sigma: float = 3.0) -> bool:
        return abs(self.z_score(reference)) <= n_sigma

    def as_row(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "n_samples": self.n_samples,
                "tau": self.tau}


@dataclass(frozen=True)
class SusceptibilityRecord:
    n: int
    beta: float
    bc: str
    chi: EstimateRecord
