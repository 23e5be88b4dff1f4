"""Random currents and their backbones.

A current assigns a nonnegative integer to every edge of a graph.  Its
sources are the vertices of odd total incident current.  The backbone of a
current with two sources is the edge-self-avoiding path of odd edges that is
lexicographically minimal for a fixed order on oriented edges; every step
cancels the edges at its starting vertex that come before it in that order.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .lattice import Edge, LatticeGraph, _full_box, _norm_edge

Step = tuple[int, int]

ENUMERATION_BUDGET = 4_000_000


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


class InconsistentBackbone(ValueError):
    pass


# -- currents -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurrentConfiguration:
    """Integer edge labels aligned with ``graph.edges``."""

    graph: LatticeGraph
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64)
        if vals.shape != (self.graph.n_edges,):
            raise ValueError("current must have one value per edge")
        if np.any(vals < 0):
            raise ValueError("currents are nonnegative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_mapping(cls, g: LatticeGraph, mapping: dict[Edge, int]) -> "CurrentConfiguration":
        vals = np.zeros(g.n_edges, np.int64)
        for (u, v), k in mapping.items():
            vals[g.edge_id(u, v)] = k
        return cls(g, vals)

    @classmethod
    def zero(cls, g: LatticeGraph) -> "CurrentConfiguration":
        return cls(g, np.zeros(g.n_edges, np.int64))

    def __getitem__(self, e: Edge) -> int:
        return int(self.values[self.graph.edge_id(*e)])

    def __add__(self, other: "CurrentConfiguration") -> "CurrentConfiguration":
        return CurrentConfiguration(self.graph, self.values + other.values)

    def odd_edges(self) -> set[Edge]:
        return {(int(u), int(v)) for (u, v), k in zip(self.graph.edges, self.values) if k % 2}

    def to_json(self) -> str:
        return json.dumps({str(i): int(k) for i, k in enumerate(self.values) if k})


def sources(n: CurrentConfiguration) -> set[int]:
    """Vertices at which the incident current sums to an odd number."""
    g = n.graph
    deg = np.zeros(g.n_vertices, np.int64)
    np.add.at(deg, g.edges[:, 0], n.values)
    np.add.at(deg, g.edges[:, 1], n.values)
    return {int(v) for v in np.flatnonzero(deg % 2)}


def weight(n: CurrentConfiguration, beta: float) -> float:
    """``prod_e (beta J_e)^{n_e} / n_e!``; unit couplings give the usual weight."""
    w = 1.0
    for k, J in zip(n.values, n.graph.couplings):
        if k:
            w *= (beta * J) ** int(k) / math.factorial(int(k))
    return w


def connected(n: CurrentConfiguration, x: int, y: int, sub: LatticeGraph | None = None) -> bool:
    """Whether ``x`` and ``y`` are joined by edges of ``sub`` carrying positive current.

    ``sub`` defaults to the current's own graph; its edges must be edges of
    that graph.
    """
    if x == y:
        return True
    g = n.graph
    sub = g if sub is None else sub
    adj: dict[int, list[int]] = {}
    for u, v in sub.edges:
        if n.values[g.edge_id(int(u), int(v))] > 0:
            adj.setdefault(int(u), []).append(int(v))
            adj.setdefault(int(v), []).append(int(u))
    seen = {x}
    todo = deque([x])
    while todo:
        u = todo.popleft()
        for v in adj.get(u, ()):
            if v == y:
                return True
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return False


def current_array(g: LatticeGraph, cap: int, source_set: Iterable[int] | None = None,
                  budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """All currents with entries ``<= cap`` (and the given sources), as rows."""
    E = g.n_edges
    total = (cap + 1) ** E
    if total > budget:
        raise BudgetExceeded(f"(cap+1)^|E| = {total} exceeds budget {budget}")
    if E == 0:
        arr = np.zeros((1, 0), np.int64)
    else:
        arr = np.indices((cap + 1,) * E).reshape(E, -1).T.astype(np.int64)
    if source_set is None:
        return arr
    want = np.zeros(g.n_vertices, np.int64)
    want[list(source_set)] = 1
    par = np.zeros((len(arr), g.n_vertices), np.int64)
    for e, (u, v) in enumerate(g.edges):
        par[:, u] += arr[:, e]
        par[:, v] += arr[:, e]
    ok = np.all(par % 2 == want, axis=1)
    return arr[ok]


def enumerate_currents(g: LatticeGraph, cap: int, source_constraint: Iterable[int] | None = None,
                       budget: int = ENUMERATION_BUDGET) -> Iterator[CurrentConfiguration]:
    """Every current with ``n_e <= cap`` whose sources equal ``source_constraint``.

    ``None`` means no constraint.
    """
    for row in current_array(g, cap, source_constraint, budget):
        yield CurrentConfiguration(g, row)


# -- oriented-edge orders -------------------------------------------------


class EdgeOrder:
    """A total order on oriented edges, given by a sort key.

    The default key is ``(source index, direction index)`` with directions
    ranked ``+e_0 < -e_0 < +e_1 < -e_1 < ...``.  The same order object can be
    used on any subgraph of the box it was built for.
    """

    def __init__(self, key: Callable[[int, int], tuple], name: str = "custom"):
        self._key = key
        self.name = name

    def key(self, u: int, v: int) -> tuple:
        return self._key(u, v)

    def less(self, a: Step, b: Step) -> bool:
        return self.key(*a) < self.key(*b)

    def __repr__(self) -> str:
        return f"EdgeOrder({self.name})"

    @classmethod
    def default(cls, g: LatticeGraph) -> "EdgeOrder":
        def key(u, v):
            a, s = g.step_direction(u, v)
            return (u, 2 * a + (0 if s > 0 else 1))

        return cls(key, "lex")

    @classmethod
    def reversed_directions(cls, g: LatticeGraph) -> "EdgeOrder":
        """Source index first, then directions in the opposite priority."""
        def key(u, v):
            a, s = g.step_direction(u, v)
            return (u, -(2 * a + (0 if s > 0 else 1)))

        return cls(key, "lex-reversed")

    @classmethod
    def random(cls, g: LatticeGraph, seed: int) -> "EdgeOrder":
        """Uniformly random ranks for the oriented edges of the full box."""
        box = _full_box(g)
        oriented = [(int(u), int(v)) for u, v in box.edges] + [(int(v), int(u)) for u, v in box.edges]
        perm = np.random.default_rng(seed).permutation(len(oriented))
        rank = {e: int(r) for e, r in zip(oriented, perm)}
        return cls(lambda u, v: (rank[(u, v)],), f"random-{seed}")


# -- backbones ------------------------------------------------------------


def cancelled_edges(g: LatticeGraph, steps: Sequence[Step], order: EdgeOrder) -> set[Edge]:
    """Union of the cancellation sets of every step in ``steps``.

    Step ``(x, y)`` cancels ``{x, y}`` and every ``{x, z}`` whose oriented edge
    ``(x, z)`` precedes ``(x, y)``.
    """
    out: set[Edge] = set()
    for x, y in steps:
        k = order.key(x, y)
        out.add(_norm_edge(x, y))
        for z in g.neighbors(x):
            if order.key(x, z) < k:
                out.add(_norm_edge(x, z))
    return out


def is_consistent(g: LatticeGraph, steps: Sequence[Step], order: EdgeOrder) -> bool:
    """No step uses an edge cancelled by an earlier step."""
    cancelled: set[Edge] = set()
    for x, y in steps:
        if _norm_edge(x, y) in cancelled:
            return False
        cancelled |= cancelled_edges(g, [(x, y)], order)
    return True


@dataclass(frozen=True)
class Backbone:
    """A consistent, edge-self-avoiding oriented path with its cancelled set."""

    steps: tuple[Step, ...]
    cancelled: frozenset
    start: int
    end: int

    @classmethod
    def from_steps(cls, g: LatticeGraph, steps: Sequence[Step], order: EdgeOrder,
                   start: int | None = None) -> "Backbone":
        steps = tuple((int(a), int(b)) for a, b in steps)
        if not steps:
            if start is None:
                raise InconsistentBackbone("empty backbone needs an explicit start vertex")
            return cls((), frozenset(), start, start)
        for (a, b), (c, _) in zip(steps, steps[1:]):
            if b != c:
                raise InconsistentBackbone(f"steps do not chain: {(a, b)} then {(c, _)}")
        for a, b in steps:
            if not g.has_edge(a, b):
                raise InconsistentBackbone(f"{(a, b)} is not an edge of the graph")
        und = [_norm_edge(a, b) for a, b in steps]
        if len(set(und)) != len(und):
            raise InconsistentBackbone("path repeats an edge")
        if not is_consistent(g, steps, order):
            raise InconsistentBackbone("path uses an edge cancelled by an earlier step")
        if start is not None and start != steps[0][0]:
            raise InconsistentBackbone("start vertex does not match the first step")
        return cls(steps, frozenset(cancelled_edges(g, steps, order)), steps[0][0], steps[-1][1])

    @property
    def sources(self) -> frozenset:
        return frozenset({self.start, self.end}) if self.start != self.end else frozenset()

    @property
    def edges(self) -> list[Edge]:
        return [_norm_edge(a, b) for a, b in self.steps]

    @property
    def vertices(self) -> list[int]:
        return [self.start] + [b for _, b in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    def split(self, k: int, g: LatticeGraph, order: EdgeOrder) -> tuple["Backbone", "Backbone"]:
        """Prefix of ``k`` steps and the remainder (as a backbone in ``g``)."""
        mid = self.vertices[k]
        return (Backbone.from_steps(g, self.steps[:k], order, start=self.start),
                Backbone.from_steps(g, self.steps[k:], order, start=mid))

    def to_json(self) -> str:
        return json.dumps({"start": self.start, "steps": [list(s) for s in self.steps]})


def concat(g: LatticeGraph, w1: Backbone, w2: Backbone, order: EdgeOrder) -> Backbone:
    if w1.end != w2.start:
        raise InconsistentBackbone("backbones do not meet")
    return Backbone.from_steps(g, w1.steps + w2.steps, order, start=w1.start)


def _odd_adjacency(g: LatticeGraph, odd: Iterable[Edge]) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {}
    for u, v in odd:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    return adj


def backbone_of_odd_set(g: LatticeGraph, odd: Iterable[Edge], x: int, y: int,
                        order: EdgeOrder) -> Backbone:
    """Backbone for a current whose odd edges are ``odd`` and whose sources are {x, y}.

    At every vertex the walk takes the smallest unused odd edge.  Removing the
    walk so far leaves exactly two odd-degree vertices (the walker and ``y``),
    so every available odd edge still leads to ``y``; the greedy step is
    therefore the lexicographic minimum and no backtracking is needed.
    """
    if x == y:
        raise ValueError("backbone needs two distinct sources")
    adj = _odd_adjacency(g, odd)
    used: set[Edge] = set()
    steps: list[Step] = []
    v = x
    while v != y:
        cands = [w for w in adj.get(v, ()) if _norm_edge(v, w) not in used]
        if not cands:
            raise RuntimeError("dead end while extracting backbone; sources are not {x, y}")
        w = min(cands, key=lambda z: order.key(v, z))
        used.add(_norm_edge(v, w))
        steps.append((v, w))
        v = w
    return Backbone.from_steps(g, steps, order)


def extract_backbone(n: CurrentConfiguration, order: EdgeOrder) -> Backbone:
    """Backbone of a current with exactly two sources."""
    src = sources(n)
    if len(src) != 2:
        raise ValueError(f"current must have two sources, has {sorted(src)}")
    x, y = sorted(src)
    return backbone_of_odd_set(n.graph, n.odd_edges(), x, y, order)


def extract_backbone_from(n: CurrentConfiguration, x: int, order: EdgeOrder) -> Backbone:
    """As :func:`extract_backbone` but starting from the chosen source ``x``."""
    src = sources(n)
    if len(src) != 2 or x not in src:
        raise ValueError("x must be one of exactly two sources")
    (y,) = src - {x}
    return backbone_of_odd_set(n.graph, n.odd_edges(), x, y, order)


def enumerate_backbones(g: LatticeGraph, x: int, y: int, order: EdgeOrder,
                        max_edges: int = 14) -> list[Backbone]:
    """All backbones from ``x`` to ``y``.

    These are the consistent edge-self-avoiding paths from ``x`` that reach
    ``y`` only at their last step; a path through ``y`` is never the
    backbone of a current, since its prefix up to ``y`` is smaller.
    """
    if g.n_edges > max_edges:
        raise BudgetExceeded(f"{g.n_edges} edges exceeds backbone budget {max_edges}")
    if x == y:
        return [Backbone.from_steps(g, (), order, start=x)]
    nbrs = {v: g.neighbors(v) for v in range(g.n_vertices)}
    out: list[Backbone] = []

    def dfs(v: int, steps: list[Step], used: set[Edge], cancelled: set[Edge]):
        for w in nbrs[v]:
            e = _norm_edge(v, w)
            if e in used or e in cancelled:
                continue
            k = order.key(v, w)
            new = {e} | {_norm_edge(v, z) for z in nbrs[v] if order.key(v, z) < k}
            steps.append((v, w))
            if w == y:
                out.append(Backbone(tuple(steps), frozenset(cancelled | new), x, y))
            else:
                dfs(w, steps, used | {e}, cancelled | new)
            steps.pop()

    dfs(x, [], set(), set())
    return out


def all_odd_paths(g: LatticeGraph, odd: Iterable[Edge], x: int, y: int) -> list[tuple[Step, ...]]:
    """Every edge-self-avoiding path from x to y over ``odd`` edges (test oracle)."""
    adj = _odd_adjacency(g, odd)
    out = []

    def dfs(v, path, used):
        if v == y and path:
            out.append(tuple(path))
        for w in adj.get(v, ()):
            e = _norm_edge(v, w)
            if e not in used:
                path.append((v, w))
                dfs(w, path, used | {e})
                path.pop()

    dfs(x, [], frozenset())
    return out


def path_sort_key(path: Sequence[Step], order: EdgeOrder) -> list:
    return [order.key(*s) for s in path]


def parity_patterns(g: LatticeGraph, budget: int = 1 << 22) -> np.ndarray:
    """All 0/1 edge patterns as rows."""
    E = g.n_edges
    if (1 << E) > budget:
        raise BudgetExceeded(f"2^{E} parity patterns exceeds budget")
    codes = np.arange(1 << E, dtype=np.int64)
    return ((codes[:, None] >> np.arange(E)) & 1).astype(np.int8)


def pattern_sources(g: LatticeGraph, patterns: np.ndarray) -> np.ndarray:
    """(P, V) 0/1 source indicator for each parity pattern."""
    par = np.zeros((len(patterns), g.n_vertices), np.int64)
    for e, (u, v) in enumerate(g.edges):
        par[:, u] += patterns[:, e]
        par[:, v] += patterns[:, e]
    return (par % 2).astype(np.int8)


__all__ = [
    "Backbone", "BudgetExceeded", "CurrentConfiguration", "EdgeOrder", "InconsistentBackbone",
    "all_odd_paths", "backbone_of_odd_set", "cancelled_edges", "concat", "connected",
    "current_array", "enumerate_backbones", "enumerate_currents", "extract_backbone",
    "extract_backbone_from", "is_consistent", "parity_patterns", "path_sort_key",
    "pattern_sources", "sources", "weight",
]
