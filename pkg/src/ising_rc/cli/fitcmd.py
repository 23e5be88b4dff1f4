"""Power-law fits over scan result files."""

from __future__ import annotations

from pathlib import Path

from ..observables import fit_power_law
from .output import read_csv

FIT_COLUMNS = ("n", "value", "error", "fit")


def load_points(paths, observable: str | None = None, window: tuple | None = None) -> tuple[str, list]:
    """Collect ``(n, value, error)`` for one observable from results CSV files.

    If ``observable`` is None the files must hold exactly one observable.
    """
    rows = []
    for p in paths:
        rows.extend(read_csv(p))
    names = sorted({r["observable"] for r in rows})
    if observable is None:
        if len(names) != 1:
            raise ValueError(f"input mixes observables {names}; pick one with --observable")
        observable = names[0]
    elif observable not in names:
        raise ValueError(f"observable {observable!r} not in input (found {names})")
    sel = [r for r in rows if r["observable"] == observable]
    pts = sorted((float(r["n"]), float(r["value"]), float(r["std_error"] or 0.0)) for r in sel)
    if window is not None:
        lo, hi = window
        pts = [p for p in pts if (lo is None or p[0] >= lo) and (hi is None or p[0] <= hi)]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points to fit, got {len(pts)}")
    return observable, pts


def run_fit(paths, observable: str | None = None, window: tuple | None = None) -> dict:
    observable, pts = load_points([Path(p) for p in paths], observable, window)
    fit = fit_power_law(pts)
    curve = fit.curve([p[0] for p in pts])
    table = [{"n": n, "value": v, "error": e, "fit": float(c)} for (n, v, e), c in zip(pts, curve)]
    return {
        "observable": observable,
        "exponent": fit.exponent,
        "exponent_error": fit.exponent_error,
        "amplitude": fit.amplitude,
        "chi2_dof": fit.chi2_dof,
        "n_points": fit.n_points,
        "window": [{"n_min": n, "exponent": s, "error": e} for n, s, e in fit.window],
        "window_spread": fit.window_spread(),
        "table": table,
    }
