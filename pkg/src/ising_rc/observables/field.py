"""Magnetization-field functionals, exponential tilting and moment diagnostics."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.special import logsumexp

from ..lattice import LatticeGraph
from .autocorr import batch_means_error, integrated_autocorr_time
from .correlations import _seed, spins_of
from .records import EstimateRecord

ESS_FLOOR = 100.0
MIN_EFFECTIVE_SAMPLES = 20
JACKKNIFE_BLOCKS = 32


# -- test functions ---------------------------------------------------------

def _centred(g: LatticeGraph) -> np.ndarray:
    lo, hi = np.asarray(g.lower), np.asarray(g.upper)
    return g.coords - (lo + hi) / 2.0


def indicator(g: LatticeGraph, L: float | None = None) -> np.ndarray:
    """1 on the centred sub-box of half-width ``L`` (whole graph by default)."""
    if L is None:
        return np.ones(g.n_vertices)
    return np.all(np.abs(_centred(g)) <= L, axis=1).astype(np.float64)


def bump(g: LatticeGraph, width: float | None = None) -> np.ndarray:
    """Gaussian bump at the box centre; default width is a quarter of the shortest side."""
    if width is None:
        width = min(g.shape) / 4.0
    r2 = (_centred(g) ** 2).sum(axis=1)
    return np.exp(-r2 / (2.0 * width**2))


def coordinate(g: LatticeGraph, axis: int = 0) -> np.ndarray:
    """Centred coordinate along ``axis`` scaled to [-1, 1]."""
    c = _centred(g)[:, axis]
    half = max(np.abs(c).max(), 1.0)
    return c / half


TEST_FUNCTIONS: dict[str, Callable[[LatticeGraph], np.ndarray]] = {
    "indicator": indicator,
    "bump": bump,
    "coordinate": coordinate,
}


def test_function(name: str, g: LatticeGraph, **kw) -> np.ndarray:
    try:
        return TEST_FUNCTIONS[name](g, **kw)
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; choose from {sorted(TEST_FUNCTIONS)}") from None


# keeps pytest from collecting it when imported into a test module
test_function.__test__ = False


# -- linear functionals -----------------------------------------------------

def field_scale(a: float, d: int) -> float:
    return float(a ** ((d + 2) / 2))


def field_functional(config, f, a: float, d: int):
    """``a^((d+2)/2) sum_x f(x) s_x`` for one configuration or a ``(n, V)`` batch."""
    s = np.asarray(getattr(config, "spins", config))
    return field_scale(a, d) * (s @ np.asarray(f, dtype=np.float64))


def _phi_series(samples, f, a, d) -> np.ndarray:
    S = spins_of(samples)
    if d is None:
        d = samples.graph.dim
    return field_functional(S, f, a, d)


def covariance_estimate(samples, f, g, a: float = 1.0, d: int | None = None) -> EstimateRecord:
    """``Cov(Phi(f), Phi(g))`` by sample moments; error from batch means of the centred products."""
    x = _phi_series(samples, f, a, d)
    y = _phi_series(samples, g, a, d)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two samples for a covariance")
    z = (x - x.mean()) * (y - y.mean())
    value = float(z.sum() / (n - 1))
    err, _ = batch_means_error(z)
    tau = integrated_autocorr_time(z) if np.ptp(z) > 0 else 0.5
    return EstimateRecord(value, err, n, tau, _seed(samples))


# -- exponential tilting ----------------------------------------------------

def effective_sample_size(log_w: np.ndarray) -> float:
    """Kish ``(sum w)^2 / sum w^2``, computed from log-weights."""
    return float(np.exp(2 * logsumexp(log_w) - logsumexp(2 * log_w)))


def reweighted_mean(F: np.ndarray, log_w: np.ndarray, seed=None,
                    ess_floor: float = ESS_FLOOR) -> EstimateRecord:
    """``sum w F / sum w`` with ``w = exp(log_w)``; uniform weights give the plain mean exactly."""
    F = np.asarray(F, dtype=np.float64)
    log_w = np.asarray(log_w, dtype=np.float64)
    if np.all(log_w == log_w[0]):
        rec = EstimateRecord.from_series(F, seed)
        return EstimateRecord(rec.value, rec.std_error, rec.n_samples, rec.tau, seed,
                              {"ess": float(len(F)), "reliable": len(F) >= ess_floor})
    w = np.exp(log_w - log_w.max())
    wbar = w.mean()
    R = float(np.dot(w, F) / w.sum())
    # linearised ratio estimator: errors of mean(w (F - R)) / mean(w)
    z = w * (F - R) / wbar
    err, _ = batch_means_error(z) if np.ptp(z) > 0 else (0.0, 1)
    ess = effective_sample_size(log_w)
    tau = integrated_autocorr_time(z) if np.ptp(z) > 0 else 0.5
    return EstimateRecord(R, err, len(F), tau, seed, {"ess": ess, "reliable": ess >= ess_floor})


def reweighted_variance(phi: np.ndarray, log_w: np.ndarray, seed=None,
                        ess_floor: float = ESS_FLOOR) -> EstimateRecord:
    """Weighted variance of ``phi`` with a blocked-jackknife error."""
    phi = np.asarray(phi, dtype=np.float64)
    log_w = np.asarray(log_w, dtype=np.float64)

    def var(idx):
        lw = log_w[idx]
        w = np.exp(lw - lw.max())
        w /= w.sum()
        m = np.dot(w, phi[idx])
        return float(np.dot(w, (phi[idx] - m) ** 2))

    value, err = _jackknife(var, len(phi))
    ess = effective_sample_size(log_w)
    return EstimateRecord(value, err, len(phi), 0.5, seed, {"ess": ess, "reliable": ess >= ess_floor})


def _evaluate(F, S):
    if callable(F):
        return np.asarray(F(S), dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    if F.shape != (S.shape[0],):
        raise ValueError("observable values must have one entry per sample")
    return F


def tilt_reweight(samples, h: float, a: float, F, d: int | None = None,
                  ess_floor: float = ESS_FLOOR) -> EstimateRecord:
    """Estimate ``<F>`` at field ``H = h a^((d+2)/2)`` from zero-field samples.

    Uses ``<F e^{h M}>_0 / <e^{h M}>_0`` with ``M = a^((d+2)/2) sum_x s_x``,
    which is exact at finite volume.  ``F`` is a callable on the ``(n, V)``
    spin array or a vector of per-sample values.  ``meta["ess"]`` holds the
    effective sample size and ``meta["reliable"]`` whether it clears the floor.
    """
    S = spins_of(samples)
    if d is None:
        d = samples.graph.dim
    params = getattr(samples, "params", None)
    if params is not None and params.field != 0.0:
        raise ValueError("tilting starts from zero-field samples")
    Fv = _evaluate(F, S)
    log_w = h * field_functional(S, np.ones(S.shape[1]), a, d)
    return reweighted_mean(Fv, log_w, _seed(samples), ess_floor)


def tilt_variance(samples, h: float, a: float, f, d: int | None = None,
                  ess_floor: float = ESS_FLOOR) -> EstimateRecord:
    """Variance of ``Phi(f)`` under the tilted measure."""
    S = spins_of(samples)
    if d is None:
        d = samples.graph.dim
    phi = field_functional(S, f, a, d)
    log_w = h * field_functional(S, np.ones(S.shape[1]), a, d)
    return reweighted_variance(phi, log_w, _seed(samples), ess_floor)


def mgf_estimate(samples, f, t: float, a: float = 1.0, d: int | None = None,
                 ess_floor: float = ESS_FLOOR) -> EstimateRecord:
    """``<exp(t Phi(f))>`` with a max-shift so large ``t Phi`` cannot overflow.

    ``meta["log_value"]`` carries the log of the estimate, which stays finite
    when the value itself would not.
    """
    S = spins_of(samples)
    if d is None:
        d = samples.graph.dim
    x = t * field_functional(S, f, a, d)
    shift = float(x.max())
    e = np.exp(x - shift)
    n = len(e)
    mean_e = float(e.mean())
    log_value = float(np.log(mean_e) + shift)
    err, _ = batch_means_error(e) if np.ptp(e) > 0 else (0.0, 1)
    with np.errstate(over="ignore"):
        scale = np.exp(shift)
    value = mean_e * scale
    err = float(err * scale) if err > 0 else 0.0
    ess = effective_sample_size(x)
    tau = integrated_autocorr_time(e) if np.ptp(e) > 0 else 0.5
    return EstimateRecord(value, err, n, tau, _seed(samples),
                          {"log_value": log_value, "log_error": float(err / mean_e), "ess": ess,
                           "reliable": ess >= ess_floor})


# -- cumulants --------------------------------------------------------------

def _jackknife(stat, n: int, blocks: int = JACKKNIFE_BLOCKS) -> tuple[float, float]:
    """Blocked jackknife (contiguous blocks, so autocorrelation is respected)."""
    full = stat(np.arange(n))
    k = min(blocks, n)
    edges = np.linspace(0, n, k + 1).astype(int)
    reps = np.array([stat(np.r_[0:edges[i], edges[i + 1]:n]) for i in range(k)])
    err = float(np.sqrt((k - 1) / k * ((reps - reps.mean()) ** 2).sum()))
    return float(full), err


def cumulant_diagnostics(samples, f=None, a: float = 1.0, d: int | None = None,
                         min_effective: float = MIN_EFFECTIVE_SAMPLES) -> dict:
    """Variance, excess kurtosis and Binder ratio ``1 - <m^4>/(3<m^2>^2)`` of ``m = Phi(f)``.

    ``samples`` may also be a plain 1-d array of values ``m``.  Each entry of
    the result is a ``(value, jackknife error)`` pair.
    """
    arr = np.asarray(getattr(samples, "spins", samples))
    if arr.ndim == 1 and f is None:
        m = arr.astype(np.float64)
    else:
        S = spins_of(samples)
        if f is None:
            f = np.ones(S.shape[1])
        if d is None:
            d = samples.graph.dim
        m = field_functional(S, f, a, d)
    n = len(m)
    tau = integrated_autocorr_time(m) if np.ptp(m) > 0 else 0.5
    n_eff = n / (2 * tau)
    if n_eff < min_effective:
        raise ValueError(f"only {n_eff:.1f} effective samples; need {min_effective}")

    def variance(idx):
        return float(np.var(m[idx], ddof=1))

    def kurtosis(idx):
        c = m[idx] - m[idx].mean()
        v = np.mean(c**2)
        return float(np.mean(c**4) / v**2 - 3.0)

    def binder(idx):
        x = m[idx]
        return float(1.0 - np.mean(x**4) / (3.0 * np.mean(x**2) ** 2))

    return {
        "variance": _jackknife(variance, n),
        "excess_kurtosis": _jackknife(kurtosis, n),
        "binder": _jackknife(binder, n),
        "n_samples": n,
        "tau": tau,
    }
