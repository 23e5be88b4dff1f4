"""Exact checks of the random-current identities on small graphs.

Two routes are used for the backbone weight rho:

* ``rho_exact`` resums the current series edge by edge.  Constraining
  ``n_e`` to be even replaces ``exp(K s_x s_y)`` by ``cosh K`` in the spin sum,
  so ``rho(w) = prod_{e in w} tanh K_e * prod_{e in w~} cosh K_e * Z(G - w~) / Z(G)``.
* ``rho_by_definition`` enumerates parity patterns of currents, extracts the
  backbone of each, and sums high-temperature weights ``prod tanh K_e``.

Neither route truncates a current sum.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from ..current import (
    Backbone, BudgetExceeded, EdgeOrder, InconsistentBackbone, backbone_of_odd_set, concat,
    current_array, enumerate_backbones, parity_patterns, pattern_sources,
)
from ..lattice import (
    FREE, Edge, LatticeError, LatticeGraph, Reflection, _norm_edge, build_box, reflected_images,
    remove_edges,
)
from .oracle import correlation_matrix, exact_correlation, log_partition, path_correlation


# -- parity-constrained sums and rho --------------------------------------


def parity_constrained_sum(g: LatticeGraph, beta: float, even_edges: Iterable[Edge],
                           method: str = "auto") -> float:
    """Fraction of the sourceless current weight with ``n_e`` even on ``even_edges``."""
    S = {_norm_edge(int(u), int(v)) for u, v in even_edges}
    if not S:
        return 1.0
    K = np.array([beta * g.coupling(u, v) for u, v in S])
    reduced = remove_edges(g, S)
    log_num = float(np.sum(np.log(np.cosh(K)))) + log_partition(reduced, beta, 0.0, method)
    return math.exp(log_num - log_partition(g, beta, 0.0, method))


def parity_constrained_sum_truncated(g: LatticeGraph, beta: float, even_edges: Iterable[Edge],
                                     cap: int) -> float:
    """Same ratio from explicit current sums with ``n_e <= cap`` (test oracle)."""
    S = [g.edge_id(u, v) for u, v in even_edges]
    arr = current_array(g, cap, set())
    w = current_weights(arr, beta * g.couplings)
    keep = np.all(arr[:, S] % 2 == 0, axis=1) if S else np.ones(len(arr), bool)
    return math.fsum(w[keep]) / math.fsum(w)


def rho_exact(g: LatticeGraph, beta: float, w: Backbone, method: str = "auto") -> float:
    """Backbone weight via per-edge cosh/sinh resummation.

    The empty backbone (start == end) has weight 1 by convention.
    """
    if not w.steps:
        return 1.0
    for u, v in w.edges:
        if not g.has_edge(u, v):
            raise InconsistentBackbone(f"{(u, v)} is not an edge of the graph")
    t = math.prod(math.tanh(beta * g.coupling(u, v)) for u, v in w.edges)
    if t == 0.0:
        return 0.0
    return t * parity_constrained_sum(g, beta, w.cancelled, method)


def _pattern_weights(g: LatticeGraph, beta: float, patterns: np.ndarray) -> np.ndarray:
    t = np.tanh(beta * g.couplings)
    with np.errstate(divide="ignore"):
        lt = np.log(t)
    lt = np.where(t > 0, lt, -np.inf)
    logw = np.where(patterns.astype(bool), lt[None, :], 0.0).sum(axis=1)
    return np.exp(logw)


def rho_by_definition(g: LatticeGraph, beta: float, x: int, y: int,
                      order: EdgeOrder) -> dict[tuple, float]:
    """``{backbone steps: rho}`` for every backbone that some current realises.

    Only the parity of a current matters for its backbone, and summing
    ``beta^n/n!`` over odd (even) ``n`` gives ``sinh`` (``cosh``), so the sums
    over currents become sums over 0/1 patterns with weight ``prod tanh K_e``.
    """
    P = parity_patterns(g)
    src = pattern_sources(g, P)
    w = _pattern_weights(g, beta, P)
    empty = ~src.any(axis=1)
    Z = math.fsum(w[empty])
    want = np.zeros(g.n_vertices, np.int8)
    want[[x, y]] = 1
    hits = np.flatnonzero(np.all(src == want, axis=1) & (w > 0))
    acc: dict[tuple, list[float]] = defaultdict(list)
    for i in hits:
        odd = [(int(u), int(v)) for (u, v), p in zip(g.edges, P[i]) if p]
        bb = backbone_of_odd_set(g, odd, x, y, order)
        acc[bb.steps].append(float(w[i]))
    return {k: math.fsum(v) / Z for k, v in acc.items()}


def two_point_by_parity(g: LatticeGraph, beta: float, x: int, y: int) -> float:
    """High-temperature-expansion value of ``<sigma_x sigma_y>`` (independent route)."""
    P = parity_patterns(g)
    src = pattern_sources(g, P)
    w = _pattern_weights(g, beta, P)
    want = np.zeros(g.n_vertices, np.int8)
    want[[x, y]] = 1
    return math.fsum(w[np.all(src == want, axis=1)]) / math.fsum(w[~src.any(axis=1)])


# -- switching lemma ------------------------------------------------------


def current_weights(arr: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``prod_e K_e^{n_e}/n_e!`` for every row of ``arr``."""
    arr = np.asarray(arr)
    with np.errstate(divide="ignore"):
        lk = np.log(K)
    terms = np.where(arr > 0, arr * lk[None, :] - gammaln(arr + 1), 0.0)
    return np.exp(terms.sum(axis=1))


@dataclass
class CheckResult:
    check: str
    instance: str
    value: float
    passed: bool
    detail: dict | None = None

    def as_dict(self) -> dict:
        d = {"check": self.check, "instance": self.instance, "deviation": self.value, "pass": self.passed}
        if self.detail:
            d.update(self.detail)
        return d


def _sub_edge_map(G: LatticeGraph, G1: LatticeGraph) -> np.ndarray:
    if G1.n_vertices != G.n_vertices:
        raise LatticeError("subgraph must share the vertex set")
    return np.array([G.edge_id(int(u), int(v)) for u, v in G1.edges], dtype=np.int64)


def verify_switching(G: LatticeGraph, G1: LatticeGraph, A: Iterable[int], x: int, y: int,
                     beta: float, cap: int,
                     weight_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
                     budget: int = 2_000_000) -> dict:
    """Largest per-level deviation in the switching lemma.

    Pairs ``(n on G, m on G1)`` with entries ``<= cap`` are grouped by the
    combined current ``N = n + m``.  Only levels with ``N <= cap`` are kept:
    for those, every decomposition of ``N`` has both parts within the cap, so
    each side of the identity is summed completely.
    """
    weight_fn = weight_fn or current_weights
    A = set(A)
    if not (0 <= x < G1.n_vertices and 0 <= y < G1.n_vertices):
        raise ValueError("x and y must be vertices of G1")
    emap = _sub_edge_map(G, G1)
    if (cap + 1) ** G.n_edges > budget or (cap + 1) ** G1.n_edges > budget:
        raise BudgetExceeded("switching enumeration too large")
    K = beta * G.couplings
    K1 = beta * G1.couplings
    xy = {x, y} if x != y else set()
    base = 2 * cap + 1
    powers = base ** np.arange(G.n_edges, dtype=np.int64)

    # connectivity of x and y in G1 as a function of the support on G1's edges
    E1 = G1.n_edges
    conn = np.zeros(1 << E1, dtype=bool)
    for code in range(1 << E1):
        adj = defaultdict(list)
        for k in range(E1):
            if code >> k & 1:
                u, v = int(G1.edges[k, 0]), int(G1.edges[k, 1])
                adj[u].append(v)
                adj[v].append(u)
        seen, todo = {x}, [x]
        while todo:
            u = todo.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        conn[code] = y in seen
    bit1 = (1 << np.arange(E1, dtype=np.int64))

    def side(n_src: set, m_src: set, indicator: bool) -> dict[int, float]:
        n_arr = current_array(G, cap, n_src, budget)
        m_arr = current_array(G1, cap, m_src, budget)
        wn = weight_fn(n_arr, K)
        wm = weight_fn(m_arr, K1)
        keys, vals = [], []
        for m, w_m in zip(m_arr, wm):
            N = n_arr.copy()
            N[:, emap] += m
            ok = np.all(N <= cap, axis=1)
            if not ok.any():
                continue
            Nk = N[ok]
            v = wn[ok] * w_m
            if indicator:
                code = ((Nk[:, emap] > 0).astype(np.int64) * bit1).sum(axis=1)
                v = v * conn[code]
            keys.append(Nk @ powers)
            vals.append(v)
        if not keys:
            return {}
        keys = np.concatenate(keys)
        vals = np.concatenate(vals)
        uk, inv = np.unique(keys, return_inverse=True)
        sums = np.bincount(inv, weights=vals)
        return dict(zip(uk.tolist(), sums.tolist()))

    lhs = side(A, xy, False)
    rhs = side(A ^ xy, set(), True)
    levels = set(lhs) | set(rhs)
    dev = max((abs(lhs.get(k, 0.0) - rhs.get(k, 0.0)) for k in levels), default=0.0)
    scale = max((abs(v) for v in lhs.values()), default=0.0)
    return {"deviation": dev, "levels": len(levels), "lhs_total": math.fsum(lhs.values()),
            "rhs_total": math.fsum(rhs.values()), "scale": scale}


def corrupted_weights(arr: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``K^n`` without the factorial; negative control for the switching check."""
    arr = np.asarray(arr)
    return np.prod(np.where(arr > 0, K[None, :] ** arr, 1.0), axis=1)


# -- backbone expansion and concatenation ---------------------------------


def verify_backbone_expansion(g: LatticeGraph, beta: float, x: int, y: int,
                              order: EdgeOrder | None = None, max_edges: int = 14) -> dict:
    """Compare ``<sigma_x sigma_y>`` with the sum of ``rho`` over all backbones.

    Also checks each ``rho_exact`` against the parity-pattern definition and
    that the backbones realised by currents are exactly the enumerated ones.
    """
    order = order or EdgeOrder.default(g)
    bbs = enumerate_backbones(g, x, y, order, max_edges=max_edges)
    rhos = {b.steps: rho_exact(g, beta, b) for b in bbs}
    total = math.fsum(rhos.values())
    corr = exact_correlation(g, beta, 0.0, [x, y])
    defs = rho_by_definition(g, beta, x, y, order)
    per_bb = max((abs(rhos.get(k, 0.0) - defs.get(k, 0.0)) for k in set(rhos) | set(defs)),
                 default=0.0)
    missing = [k for k in defs if k not in rhos]
    return {"deviation": abs(corr - total), "rho_route_deviation": per_bb,
            "n_backbones": len(bbs), "correlation": corr, "backbone_sum": total,
            "unlisted_backbones": len(missing)}


def verify_concat(g: LatticeGraph, beta: float, w1: Backbone, w2: Backbone,
                  order: EdgeOrder, method: str = "auto") -> float:
    """``|rho_G(w1 o w2) - rho_G(w1) rho_{G - w1~}(w2)|``.

    The left side is taken from the parity-pattern definition when the graph
    is small enough, so the two sides come from different computations.
    """
    w = concat(g, w1, w2, order)
    reduced = remove_edges(g, w1.cancelled)
    if w2.steps:
        w2r = Backbone.from_steps(reduced, w2.steps, order, start=w2.start)
        right = rho_exact(g, beta, w1, method) * rho_exact(reduced, beta, w2r, method)
    else:
        right = rho_exact(g, beta, w1, method)
    if w.steps and w.start != w.end and g.n_edges <= 20 and not _visits(w, w.end):
        left = rho_by_definition(g, beta, w.start, w.end, order).get(w.steps, 0.0)
    else:
        left = rho_exact(g, beta, w, method)
    return abs(left - right)


def _visits(w: Backbone, v: int) -> bool:
    return v in w.vertices[:-1]


# -- reflection inequality ------------------------------------------------


def _edge_coords_ok(A_bar, pred) -> bool:
    return all(pred(p) and pred(q) for p, q in A_bar)


def verify_reflection(D: LatticeGraph, A_bar: Iterable[tuple], beta: float,
                      u: Sequence[int], y: Sequence[int], method: str = "auto") -> tuple[bool, float]:
    """``<s_u s_y> >= <s_u s_ybar>`` on D with the reflected edge set removed.

    ``A_bar`` is given in coordinates and must be the mirror image of a set of
    edges with nonnegative first coordinates; ``u`` must lie on the mirror
    plane and ``y`` in the nonnegative half.
    """
    A_bar = [(tuple(p), tuple(q)) for p, q in A_bar]
    u, y = tuple(u), tuple(y)
    if D.radii is None or D.bc != FREE:
        raise ValueError("D must be a centred free-BC box")
    if u[0] != 0 or y[0] < 0:
        raise ValueError("need u on the plane x_0 = 0 and y with y_0 >= 0")
    if not _edge_coords_ok(A_bar, lambda p: p[0] <= 0):
        raise ValueError("A_bar must be the reflection of edges with nonnegative first coordinate")
    r = Reflection(0, 0)
    ybar = r.point(y)
    idx = D.index
    g = remove_edges(D, [(idx(p), idx(q)) for p, q in A_bar])
    a = exact_correlation(g, beta, 0.0, [idx(u), idx(y)], method)
    b = exact_correlation(g, beta, 0.0, [idx(u), idx(ybar)], method)
    return a - b >= -1e-12, a - b


def reflection_margins(D: LatticeGraph, A_bar: Iterable[tuple], beta: float,
                       method: str = "auto") -> np.ndarray:
    """Margins for every admissible ``(u, y)`` pair, from one correlation matrix."""
    A_bar = [(tuple(p), tuple(q)) for p, q in A_bar]
    if not _edge_coords_ok(A_bar, lambda p: p[0] <= 0):
        raise ValueError("A_bar must lie in the nonpositive half")
    idx = D.index
    g = remove_edges(D, [(idx(p), idx(q)) for p, q in A_bar])
    _, C = correlation_matrix(g, beta, 0.0, method)
    r = Reflection(0, 0)
    coords = D.vertices
    us = [idx(p) for p in coords if p[0] == 0]
    ys = [p for p in coords if p[0] >= 0]
    out = [C[ui, idx(y)] - C[ui, idx(r.point(y))] for ui in us for y in ys]
    return np.asarray(out)


def random_admissible_edges(D: LatticeGraph, rng: np.random.Generator, p: float = 0.5) -> list[tuple]:
    """Random edge set with nonnegative first coordinates, returned reflected."""
    r = Reflection(0, 0)
    half = [(D.coord(int(a)), D.coord(int(b))) for a, b in D.edges
            if D.coords[a][0] >= 0 and D.coords[b][0] >= 0]
    chosen = [e for e in half if rng.random() < p]
    return [(r.point(a), r.point(b)) for a, b in chosen]


# -- finite-volume comparison bound ---------------------------------------


def verify_tfin(outer: LatticeGraph, inner_radii, beta: float, x: Sequence[int], y: Sequence[int],
                method: str = "auto") -> dict:
    """``<s_x s_y>_outer - <s_x s_y>_inner <= sum_i <s_x s_{y^i}>_outer``.

    ``inner`` is the free box ``[-n, n]^d`` and ``y^i`` are the images of ``y``
    in the planes of its 2d faces; all images must lie in ``outer``.  Set
    ``method="closed_form"`` for d = 1 chains.
    """
    x, y = tuple(x), tuple(y)
    if isinstance(inner_radii, int):
        inner_radii = (inner_radii,) * outer.dim
    inner = build_box(outer.dim, tuple(inner_radii), FREE)
    if not (inner.contains(x) and inner.contains(y)):
        raise ValueError("x and y must lie in the inner box")
    images = reflected_images(y, outer, inner_radii)
    bad = [p for p in images if not outer.contains(p)]
    if bad:
        raise ValueError(f"reflected images {bad} fall outside the outer box")
    if method == "closed_form":
        if outer.dim != 1:
            raise ValueError("closed form only for d = 1")
        lhs = path_correlation(beta, x[0] - y[0]) - path_correlation(beta, x[0] - y[0])
        rhs = sum(path_correlation(beta, x[0] - p[0]) for p in images)
    else:
        i = outer.index
        lhs = (exact_correlation(outer, beta, 0.0, [i(x), i(y)], method)
               - exact_correlation(inner, beta, 0.0, [inner.index(x), inner.index(y)], method))
        rhs = math.fsum(exact_correlation(outer, beta, 0.0, [i(x), i(p)], method) for p in images)
    return {"holds": lhs <= rhs + 1e-12, "slack": rhs - lhs, "lhs": lhs, "rhs": rhs}
