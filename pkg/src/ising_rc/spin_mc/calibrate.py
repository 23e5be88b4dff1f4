"""Critical-point defaults and a Binder-crossing calibration utility."""

from __future__ import annotations

import math

import numpy as np

from ..lattice import PERIODIC, build_box
from .chain import ChainState, ModelParams, swendsen_wang_sweep

# Nearest-neighbour ferromagnet on Z^d with unit couplings.  d=2 is exact;
# the others are high-precision Monte Carlo / series estimates.
BETA_C = {
    2: 0.5 * math.log(1.0 + math.sqrt(2.0)),
    3: 0.22165463,
    4: 0.14969475,
    5: 0.11391498,
}


def critical_beta(d: int) -> float:
    try:
        return BETA_C[int(d)]
    except KeyError:
        raise ValueError(f"no critical default for d={d}; pass a numeric beta") from None


def resolve_beta(beta) -> float:
    """Accept a number or the symbolic form ``"critical:d"``."""
    if isinstance(beta, str):
        kind, _, d = beta.partition(":")
        if kind != "critical" or not d:
            raise ValueError(f"cannot resolve beta {beta!r}")
        return critical_beta(int(d))
    return float(beta)


def binder_cumulant(d: int, radius: int, beta: float, n_sweeps: int, seed, burn_in: int = 100) -> float:
    """``U = 1 - <M^4>/(3<M^2>^2)`` on a periodic box (spin estimator from SW)."""
    g = build_box(d, radius, PERIODIC)
    p = ModelParams(beta)
    s = ChainState.new(g, seed)
    swendsen_wang_sweep(s, g, p, burn_in)
    m = np.empty(n_sweeps)
    for k in range(n_sweeps):
        swendsen_wang_sweep(s, g, p, 1)
        m[k] = s.spins.sum(dtype=np.int64)
    m2, m4 = np.mean(m**2), np.mean(m**4)
    return float(1.0 - m4 / (3.0 * m2**2))


def binder_crossing(d: int, radii: tuple[int, int], betas, n_sweeps: int = 2000, seed: int = 0) -> float:
    """Estimate beta_c as the crossing of the Binder cumulants of two box sizes.

    Linearly interpolates the difference ``U_small - U_large`` on the grid
    ``betas`` and returns its zero; raises if there is no sign change.
    """
    betas = np.sort(np.asarray(betas, dtype=float))
    ss = np.random.SeedSequence(seed).spawn(2 * len(betas))
    diff = np.array([
        binder_cumulant(d, radii[0], b, n_sweeps, ss[2 * i])
        - binder_cumulant(d, radii[1], b, n_sweeps, ss[2 * i + 1])
        for i, b in enumerate(betas)
    ])
    sign = np.sign(diff)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(idx) == 0:
        raise ValueError("Binder cumulants do not cross on the given grid")
    i = idx[0]
    t = diff[i] / (diff[i] - diff[i + 1])
    return float(betas[i] + t * (betas[i + 1] - betas[i]))

