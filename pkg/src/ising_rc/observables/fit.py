"""Weighted least-squares fits on log scales."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PowerLawFit:
    """``value ~ amplitude * n^exponent``.

    ``window`` lists ``(n_min, exponent, error)`` refits obtained by dropping
    the smallest sizes one at a time while at least three points remain.
    """

    exponent: float
    amplitude: float
    exponent_error: float
    chi2_dof: float
    n_points: int
    window: list = field(default_factory=list)

    def curve(self, n) -> np.ndarray:
        return self.amplitude * np.asarray(n, dtype=float) ** self.exponent

    def window_spread(self) -> float:
        if not self.window:
            return 0.0
        exps = [self.exponent] + [w[1] for w in self.window]
        return float(max(exps) - min(exps))


def _points(points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = [(p[0], p[1], p[2] if len(p) > 2 else 0.0) for p in points]
    if len(arr) < 3:
        raise ValueError(f"need at least 3 points, got {len(arr)}")
    n, v, e = (np.asarray(c, dtype=np.float64) for c in zip(*sorted(arr)))
    if np.any(v <= 0):
        raise ValueError("power-law fits need positive values")
    if np.any(n <= 0):
        raise ValueError("sizes must be positive")
    if np.any(e < 0):
        raise ValueError("errors must be nonnegative")
    return n, v, e


def _wls(x, y, sy) -> tuple[float, float, float, float, float]:
    """Straight-line fit ``y = c + s x``; returns ``(s, c, err_s, chi2_dof, err_c)``.

    With all errors zero the fit is unweighted and the slope error comes from
    the residual scatter.  Otherwise the error is inflated by ``sqrt(chi2/dof)``
    when the fit is worse than its error bars suggest.
    """
    dof = len(x) - 2
    if np.all(sy == 0):
        w = np.ones_like(x)
    else:
        sy = np.where(sy > 0, sy, sy[sy > 0].min())
        w = 1.0 / sy**2
    X = np.stack([np.ones_like(x), x], axis=1)
    A = X.T @ (w[:, None] * X)
    cov = np.linalg.inv(A)
    c, s = cov @ (X.T @ (w * y))
    resid = y - (c + s * x)
    chi2 = float(np.sum(w * resid**2))
    chi2_dof = chi2 / dof if dof > 0 else 0.0
    if np.all(sy == 0):
        scale = chi2_dof
    else:
        scale = max(1.0, chi2_dof)
    return float(s), float(c), math.sqrt(cov[1, 1] * scale), chi2_dof, math.sqrt(cov[0, 0] * scale)


def fit_power_law(points) -> PowerLawFit:
    """Fit ``log value = log A + p log n`` to ``(n, value, error)`` triples."""
    n, v, e = _points(points)
    x, y, sy = np.log(n), np.log(v), e / v
    s, c, err, chi2, _ = _wls(x, y, sy)
    window = []
    for k in range(1, len(n) - 2):
        sk, _, ek, _, _ = _wls(x[k:], y[k:], sy[k:])
        window.append((float(n[k]), sk, ek))
    return PowerLawFit(s, math.exp(c), err, chi2, len(n), window)


@dataclass(frozen=True)
class ExponentialFit:
    """``value ~ amplitude * exp(-n / length)``."""

    rate: float
    rate_error: float
    amplitude: float
    chi2_dof: float

    @property
    def length(self) -> float:
        return 1.0 / self.rate


def fit_exponential(points) -> ExponentialFit:
    n, v, e = _points(points)
    s, c, err, chi2, _ = _wls(n, np.log(v), e / v)
    return ExponentialFit(-s, err, math.exp(c), chi2)
