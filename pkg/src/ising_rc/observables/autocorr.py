"""Autocorrelation times and batch-means errors for scalar time series."""

from __future__ import annotations

import numpy as np

# Sokal's self-consistent window: stop summing at the first W with W >= C * tau(W)
WINDOW_C = 6.0
MIN_BATCHES = 16


def autocorrelation(x) -> np.ndarray:
    """Normalised autocorrelation function via FFT (zero-padded)."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    y = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, size)
    acf = np.fft.irfft(f * np.conj(f), size)[:n]
    if acf[0] <= 0:
        return np.zeros(n)
    return acf / acf[0]


def integrated_autocorr_time(x, c: float = WINDOW_C) -> float:
    """``tau_int = 1/2 + sum_{t=1}^{W} rho(t)`` with the automatic window.

    Convention: ``tau_int = 1/2`` for uncorrelated data, so the variance of the
    mean is ``2 tau_int sigma^2 / n``.
    """
    rho = autocorrelation(x)
    n = len(rho)
    if n < 2 or rho[0] == 0:
        return 0.5
    tau = 0.5
    for w in range(1, n):
        tau += rho[w]
        if w >= c * tau:
            break
    return float(max(tau, 0.5))


def batch_means_error(x, min_batches: int = MIN_BATCHES, rtol: float = 0.1) -> tuple[float, int]:
    """Standard error of the mean by non-overlapping batch means.

    Batch size doubles until the error estimate stabilises (relative change
    below ``rtol``) or fewer than ``min_batches`` batches would remain; the
    largest reliable estimate is returned together with its batch size.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 2:
        return float("nan"), 1
    naive = float(x.std(ddof=1) / np.sqrt(n))
    best, best_b = naive, 1
    prev = naive
    b = 2
    while n // b >= min_batches:
        m = n // b
        means = x[: m * b].reshape(m, b).mean(axis=1)
        err = float(means.std(ddof=1) / np.sqrt(m))
        if err > best:
            best, best_b = err, b
        if prev > 0 and abs(err - prev) <= rtol * prev and b >= 4:
            break
        prev = err
        b *= 2
    return best, best_b
