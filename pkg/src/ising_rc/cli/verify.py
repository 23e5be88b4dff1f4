"""The exact identity suite run by ``ising-rc verify``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..current import Backbone, BudgetExceeded, EdgeOrder, enumerate_backbones
from ..exact import (
    CheckResult, corrupted_weights, random_admissible_edges, reflection_margins, rho_exact,
    verify_backbone_expansion, verify_concat, verify_switching, verify_tfin,
)
from ..exact.enumeration import EnumerationBudgetExceeded
from ..exact.transfer import TransferNotApplicable
from ..lattice import PERIODIC, LatticeGraph, build_box, build_rect, remove_edges_by_coords

TOLERANCE = 1e-10
REFLECTION_TOLERANCE = -1e-12

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_EMPTY = "nothing-ran"


# -- instance matrix --------------------------------------------------------

def _drop(g: LatticeGraph, *coord_edges) -> LatticeGraph:
    return remove_edges_by_coords(g, coord_edges)


def small_graphs() -> dict[str, LatticeGraph]:
    """Named test graphs with at most 10 edges."""
    sq3 = build_box(2, 1)
    return {
        "path3": build_rect((3,)),
        "path4": build_rect((4,)),
        "ring3": build_rect((3,), PERIODIC),
        "square": build_rect((2, 2)),
        "rect2x3": build_rect((2, 3)),
        "rect2x3-cut": _drop(build_rect((2, 3)), ((0, 1), (1, 1))),
        "box3x3-cut2": _drop(sq3, ((-1, -1), (-1, 0)), ((1, 0), (1, 1))),
        "cube-cut2": _drop(build_rect((2, 2, 2)), ((0, 0, 0), (0, 0, 1)), ((1, 1, 0), (1, 1, 1))),
    }


def orders_for(g: LatticeGraph) -> list[EdgeOrder]:
    return [EdgeOrder.default(g), EdgeOrder.reversed_directions(g), EdgeOrder.random(g, 1)]


@dataclass(frozen=True)
class SwitchingInstance:
    graph: str
    sub_drop: tuple  # coordinate edges removed from G to form G1
    A: tuple  # source set as vertex indices
    x: int
    y: int
    cap: int
    beta: float

    def label(self) -> str:
        drop = "G1=G" if not self.sub_drop else f"G1=G-{len(self.sub_drop)}"
        return f"{self.graph} {drop} A={list(self.A)} xy=({self.x},{self.y}) cap={self.cap} beta={self.beta}"


def switching_instances() -> list[SwitchingInstance]:
    out = []
    plan = [
        # graph, cap, (x, y), A options, G1 edge drops
        ("path3", 4, (0, 2), [(), (0, 1), (0, 1, 1, 2)], [(), (((0,), (1,)),)]),
        ("path4", 4, (0, 3), [(), (1, 2), (0, 1, 2, 3)], [(), (((2,), (3,)),)]),
        ("ring3", 4, (0, 1), [(), (0, 2)], [(), (((0,), (2,)),)]),
        ("square", 3, (0, 3), [(), (1, 2), (0, 1, 2, 3)], [(), (((0, 0), (0, 1)),)]),
        ("rect2x3-cut", 2, (0, 5), [(), (1, 4), (0, 2, 3, 5)], [(), (((1, 0), (1, 1)),)]),
        ("rect2x3", 2, (0, 4), [(), (2, 3)], [()]),
    ]
    betas = {"path3": 0.7, "path4": 0.5, "ring3": 0.9, "square": 0.44, "rect2x3-cut": 0.3,
             "rect2x3": 0.6}
    for name, cap, (x, y), As, drops in plan:
        for A in As:
            for drop in drops:
                out.append(SwitchingInstance(name, drop, A, x, y, cap, betas[name]))
    return out


# -- checks -----------------------------------------------------------------

def check_switching(weight_fn=None, instances=None) -> list[CheckResult]:
    graphs = small_graphs()
    res = []
    for inst in instances or switching_instances():
        G = graphs[inst.graph]
        G1 = remove_edges_by_coords(G, inst.sub_drop) if inst.sub_drop else G
        r = verify_switching(G, G1, set(inst.A), inst.x, inst.y, inst.beta, inst.cap,
                             weight_fn=weight_fn)
        res.append(CheckResult("switching", inst.label(), r["deviation"], r["deviation"] < TOLERANCE,
                               {"levels": r["levels"], "scale": r["scale"]}))
    return res


def _pairs(g: LatticeGraph) -> list[tuple[int, int]]:
    V = g.n_vertices
    return sorted({(0, V - 1), (0, 1), (V // 2, 0)} - {(0, 0)})


def check_backbone_expansion(graphs=None, betas=(0.3, 0.8)) -> list[CheckResult]:
    res = []
    for name, g in (graphs or small_graphs()).items():
        for order in orders_for(g):
            for x, y in _pairs(g):
                for beta in betas:
                    r = verify_backbone_expansion(g, beta, x, y, order)
                    dev = max(r["deviation"], r["rho_route_deviation"])
                    ok = dev < TOLERANCE and r["unlisted_backbones"] == 0
                    res.append(CheckResult(
                        "backbone_expansion", f"{name} {order.name} ({x},{y}) beta={beta}", dev, ok,
                        {"n_backbones": r["n_backbones"]}))
    return res


def check_concat(graphs=None, beta: float = 0.5, per_graph: int = 12) -> list[CheckResult]:
    res = []
    for name, g in (graphs or small_graphs()).items():
        for order in orders_for(g):
            x, y = 0, g.n_vertices - 1
            bbs = [b for b in enumerate_backbones(g, x, y, order) if len(b) >= 2][:per_graph]
            for b in bbs:
                for k in range(1, len(b)):
                    w1, w2 = b.split(k, g, order)
                    dev = verify_concat(g, beta, w1, w2, order)
                    res.append(CheckResult("concat", f"{name} {order.name} split {k} of {len(b)}",
                                           dev, dev < TOLERANCE))
    return res


def check_reflection(radii=(1, 2), betas=(0.2, 0.44, 0.8), n_sets: int = 50,
                     seed: int = 0) -> list[CheckResult]:
    res = []
    rng = np.random.default_rng(seed)
    for n in radii:
        D = build_box(2, n)
        for beta in betas:
            worst = np.inf
            for _ in range(n_sets):
                A_bar = random_admissible_edges(D, rng)
                worst = min(worst, float(reflection_margins(D, A_bar, beta).min()))
            res.append(CheckResult("reflection", f"[-{n},{n}]^2 beta={beta} sets={n_sets}", worst,
                                   worst >= REFLECTION_TOLERANCE))
    return res


def tfin_instances() -> list[tuple]:
    """``(outer graph, inner radius, x, y, method)``; outer boxes hold every reflected image."""
    out = []
    for n in (2, 3):
        outer = build_box(1, 3 * n)
        for x, y in [(0, 1), (-1, 2), (-n, n)]:
            out.append((outer, n, (x,), (y,), "closed_form"))
    outer = build_box(2, (5, 5))
    for x, y in [((0, 0), (1, 0)), ((0, 0), (1, 1)), ((-1, 0), (1, 0))]:
        out.append((outer, 2, x, y, "auto"))
    return out


def check_tfin(betas=(0.2, 0.44, 0.8)) -> list[CheckResult]:
    res = []
    for outer, n, x, y, method in tfin_instances():
        for beta in betas:
            r = verify_tfin(outer, n, beta, x, y, method)
            res.append(CheckResult("tfin", f"d={outer.dim} outer={outer.radii} inner={n} "
                                   f"x={x} y={y} beta={beta}", r["slack"], bool(r["holds"]),
                                   {"lhs": r["lhs"], "rhs": r["rhs"]}))
    return res


RHO_PATHS = {
    "one-step": [((0, 0), (1, 0))],
    "two-step": [((0, 0), (1, 0)), ((1, 0), (1, 1))],
    "straight-two": [((-1, 0), (0, 0)), ((0, 0), (1, 0))],
}


def rho_sequence(steps_coords, beta: float, radii=(1, 2, 3)) -> list[float]:
    """``rho`` of a fixed backbone on the nested boxes ``[-n, n]^2``."""
    vals = []
    for n in radii:
        g = build_box(2, n)
        order = EdgeOrder.default(g)
        steps = [(g.index(p), g.index(q)) for p, q in steps_coords]
        vals.append(rho_exact(g, beta, Backbone.from_steps(g, steps, order)))
    return vals


def check_rho_trend(betas=(0.3, 0.44)) -> list[CheckResult]:
    res = []
    for name, path in RHO_PATHS.items():
        for beta in betas:
            vals = rho_sequence(path, beta)
            diffs = np.abs(np.diff(vals))
            ok = len(diffs) == 2 and diffs[1] < diffs[0]
            res.append(CheckResult("rho_trend", f"{name} beta={beta}", float(diffs[-1]), bool(ok),
                                   {"rho": vals, "differences": diffs.tolist()}))
    return res


# -- profiles ---------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    name: str
    checks: tuple[str, ...]
    corrupt_weights: bool = False
    options: dict = field(default_factory=dict)


PROFILES = {
    "quick": Profile("quick", ("switching", "backbone_expansion", "concat", "reflection", "tfin",
                               "rho_trend"), options={"reflection": {"radii": (1, 2), "n_sets": 10}}),
    "full": Profile("full", ("switching", "backbone_expansion", "concat", "reflection", "tfin",
                             "rho_trend")),
    "empty": Profile("empty", ()),
    "corrupted": Profile("corrupted", ("switching",), corrupt_weights=True),
}

CHECKS: dict[str, Callable[..., list[CheckResult]]] = {
    "switching": check_switching,
    "backbone_expansion": check_backbone_expansion,
    "concat": check_concat,
    "reflection": check_reflection,
    "tfin": check_tfin,
    "rho_trend": check_rho_trend,
}

SKIPPABLE = (BudgetExceeded, EnumerationBudgetExceeded, TransferNotApplicable)


def run_verify(profile: str | Profile = "quick") -> dict:
    """Run the identity suite; the report's ``status`` is pass, fail or nothing-ran.

    A check that cannot be evaluated within the enumeration budgets is
    reported as skipped and never counted as passed.
    """
    if isinstance(profile, str):
        try:
            profile = PROFILES[profile]
        except KeyError:
            raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}") from None
    t0 = time.perf_counter()
    results, skipped, timings = [], [], {}
    for name in profile.checks:
        kw = dict(profile.options.get(name, {}))
        if name == "switching" and profile.corrupt_weights:
            kw["weight_fn"] = corrupted_weights
        t = time.perf_counter()
        try:
            results.extend(CHECKS[name](**kw))
        except SKIPPABLE as exc:
            skipped.append({"check": name, "reason": str(exc)})
        timings[name] = time.perf_counter() - t
    n_fail = sum(not r.passed for r in results)
    if not results:
        status = STATUS_EMPTY
    elif n_fail:
        status = STATUS_FAIL
    else:
        status = STATUS_PASS
    summary = {}
    for r in results:
        s = summary.setdefault(r.check, {"n": 0, "failed": 0, "worst": None})
        s["n"] += 1
        s["failed"] += not r.passed
        worst = s["worst"]
        if r.check in ("reflection", "tfin"):
            s["worst"] = r.value if worst is None else min(worst, r.value)
        else:
            s["worst"] = r.value if worst is None else max(worst, r.value)
    return {
        "profile": profile.name,
        "status": status,
        "n_checks": len(results),
        "n_failed": n_fail,
        "n_skipped": len(skipped),
        "summary": summary,
        "skipped": skipped,
        "timings": timings,
        "wall_clock": time.perf_counter() - t0,
        "results": [r.as_dict() for r in results],
    }


def exit_code(report: dict) -> int:
    return {STATUS_PASS: 0, STATUS_FAIL: 1, STATUS_EMPTY: 2}[report["status"]]


__all__ = ["PROFILES", "Profile", "exit_code", "run_verify", "rho_sequence", "small_graphs",
           "switching_instances"]
