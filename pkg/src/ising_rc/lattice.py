"""Hypercubic box graphs with free or periodic boundary conditions.

Vertices are integer points of a box ``[lo_1, hi_1] x ... x [lo_d, hi_d]``,
indexed in row-major order (axis 0 slowest).  Axes are 0-based throughout.
Edges are stored as ``(u, v)`` index pairs with ``u < v`` together with a
nonnegative coupling per edge.  Graphs are immutable; ``remove_edges`` returns
a new graph.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

FREE = "free"
PERIODIC = "periodic"

Edge = tuple[int, int]


class LatticeError(ValueError):
    """Invalid box geometry or edge set."""


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class LatticeGraph:
    """A finite box of Z^d with per-edge couplings.

    Use :func:`build_box` / :func:`build_rect` rather than the constructor.
    """

    dim: int
    lower: tuple[int, ...]
    upper: tuple[int, ...]
    bc: str
    edges: np.ndarray
    couplings: np.ndarray
    removed: frozenset = field(default_factory=frozenset)

    # -- geometry ---------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(h - l + 1 for l, h in zip(self.lower, self.upper))

    @property
    def n_vertices(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def radii(self) -> tuple[int, ...] | None:
        """Per-axis radii if the box is centred at the origin, else None."""
        if all(l == -h for l, h in zip(self.lower, self.upper)):
            return tuple(self.upper)
        return None

    @cached_property
    def strides(self) -> tuple[int, ...]:
        s = [1] * self.dim
        for a in range(self.dim - 2, -1, -1):
            s[a] = s[a + 1] * self.shape[a + 1]
        return tuple(s)

    @cached_property
    def coords(self) -> np.ndarray:
        """(V, d) integer coordinates of every vertex, row-major order."""
        axes = [np.arange(l, h + 1) for l, h in zip(self.lower, self.upper)]
        grid = np.meshgrid(*axes, indexing="ij")
        out = np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)
        out.setflags(write=False)
        return out

    @property
    def vertices(self) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in row) for row in self.coords]

    def contains(self, point: Sequence[int]) -> bool:
        return len(point) == self.dim and all(
            l <= p <= h for p, l, h in zip(point, self.lower, self.upper)
        )

    def index(self, point: Sequence[int]) -> int:
        """Vertex index of an integer point (must lie in the box)."""
        if not self.contains(point):
            raise LatticeError(f"point {tuple(point)} is not in the box")
        return int(sum((p - l) * s for p, l, s in zip(point, self.lower, self.strides)))

    def coord(self, index: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coords[index])

    # -- edges ------------------------------------------------------------
    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edge_index

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self.edge_index[_norm_edge(u, v)]
        except KeyError:
            raise LatticeError(f"{(u, v)} is not an edge of the graph") from None

    def coupling(self, u: int, v: int) -> float:
        return float(self.couplings[self.edge_id(u, v)])

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, neighbours, couplings)`` arrays."""
        V = self.n_vertices
        if self.n_edges == 0:
            return np.zeros(V + 1, np.int64), np.zeros(0, np.int64), np.zeros(0)
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        cpl = np.concatenate([self.couplings, self.couplings])
        order = np.lexsort((dst, src))
        src, dst, cpl = src[order], dst[order], cpl[order]
        indptr = np.zeros(V + 1, np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst.astype(np.int64), cpl.astype(np.float64)

    def neighbors(self, v: int) -> list[int]:
        indptr, nbr, _ = self.csr
        return [int(w) for w in nbr[indptr[v]:indptr[v + 1]]]

    def degree(self) -> np.ndarray:
        indptr = self.csr[0]
        return np.diff(indptr)

    def step_direction(self, u: int, v: int) -> tuple[int, int]:
        """(axis, sign) of the lattice step from ``u`` to neighbour ``v``."""
        cu, cv = self.coords[u], self.coords[v]
        diff = cv - cu
        for a in range(self.dim):
            if diff[a] == 0:
                continue
            side = self.shape[a]
            if diff[a] == 1 or diff[a] == -(side - 1) and self.bc == PERIODIC:
                return a, +1
            return a, -1
        raise LatticeError(f"{u} and {v} are not lattice neighbours")

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        d = {"d": self.dim, "bc": self.bc}
        if self.radii is not None:
            d["radii"] = list(self.radii)
        else:
            d["lower"] = list(self.lower)
            d["upper"] = list(self.upper)
        d["removed_edges"] = sorted(
            [list(self.coord(u)), list(self.coord(v))] for u, v in self.removed
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256(self.to_json().encode())
        h.update(np.ascontiguousarray(self.couplings).tobytes())
        return h.hexdigest()[:16]

    def __repr__(self) -> str:
        return (
            f"LatticeGraph(d={self.dim}, box={list(zip(self.lower, self.upper))}, "
            f"bc={self.bc!r}, V={self.n_vertices}, E={self.n_edges})"
        )


def _make(lower, upper, bc) -> LatticeGraph:
    lower = tuple(int(x) for x in lower)
    upper = tuple(int(x) for x in upper)
    d = len(lower)
    shape = tuple(h - l + 1 for l, h in zip(lower, upper))
    strides = [1] * d
    for a in range(d - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    V = int(np.prod(shape))
    idx = np.arange(V).reshape(shape)
    edges = []
    for a in range(d):
        if bc == PERIODIC:
            nxt = np.roll(idx, -1, axis=a)
            u, v = idx.ravel(), nxt.ravel()
        else:
            sl_u = [slice(None)] * d
            sl_v = [slice(None)] * d
            sl_u[a] = slice(0, shape[a] - 1)
            sl_v[a] = slice(1, shape[a])
            u, v = idx[tuple(sl_u)].ravel(), idx[tuple(sl_v)].ravel()
        edges.append(np.stack([np.minimum(u, v), np.maximum(u, v)], axis=1))
    E = np.concatenate(edges) if edges else np.zeros((0, 2), np.int64)
    E = E[np.lexsort((E[:, 1], E[:, 0]))].astype(np.int64)
    E.setflags(write=False)
    J = np.ones(len(E))
    J.setflags(write=False)
    return LatticeGraph(d, lower, upper, bc, E, J)


def _check_bc(bc: str) -> None:
    if bc not in (FREE, PERIODIC):
        raise LatticeError(f"boundary condition must be 'free' or 'periodic', got {bc!r}")


def build_box(d: int, radii: int | Sequence[int], bc: str = FREE) -> LatticeGraph:
    """Box ``[-n_1, n_1] x ... x [-n_d, n_d]`` with unit couplings.

    ``radii`` may be a single integer (cube) or one radius per axis.
    Periodic boundary conditions need every radius >= 1 so that no edge is
    doubled.
    """
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise LatticeError(f"dimension must be a positive integer, got {d!r}")
    if isinstance(radii, (int, np.integer)):
        radii = (int(radii),) * d
    radii = tuple(radii)
    if len(radii) != d:
        raise LatticeError(f"need {d} radii, got {len(radii)}")
    if any((not isinstance(r, (int, np.integer))) or r < 0 for r in radii):
        raise LatticeError(f"radii must be nonnegative integers, got {radii}")
    _check_bc(bc)
    if bc == PERIODIC and min(radii) < 1:
        raise LatticeError("periodic boxes need radius >= 1 on every axis")
    return _make([-r for r in radii], radii, bc)


def build_rect(shape: Sequence[int], bc: str = FREE, origin: Sequence[int] | None = None) -> LatticeGraph:
    """Box with the given side lengths, anchored at ``origin`` (default 0).

    Covers even side lengths (e.g. a 4x4 block), which centred boxes cannot.
    """
    shape = tuple(int(s) for s in shape)
    if not shape or any(s < 1 for s in shape):
        raise LatticeError(f"side lengths must be positive, got {shape}")
    _check_bc(bc)
    if bc == PERIODIC and min(shape) < 3:
        raise LatticeError("periodic boxes need side length >= 3 on every axis")
    origin = tuple(origin) if origin is not None else (0,) * len(shape)
    return _make(origin, [o + s - 1 for o, s in zip(origin, shape)], bc)


def _full_box(g: LatticeGraph) -> LatticeGraph:
    return _make(g.lower, g.upper, g.bc)


def remove_edges(g: LatticeGraph, A: Iterable[Edge]) -> LatticeGraph:
    """Return ``g`` with the edges in ``A`` deleted (coupling set to zero).

    Edges are vertex-index pairs.  Edges of the underlying box that were
    already removed are accepted, so the operation is idempotent; pairs that
    are not box edges at all are rejected.
    """
    A = {_norm_edge(int(u), int(v)) for u, v in A}
    if not A:
        return g
    current = g.edge_index
    missing = [e for e in A if e not in current and e not in g.removed]
    if missing:
        box = _full_box(g)
        bad = [e for e in missing if e not in box.edge_index]
        if bad:
            raise LatticeError(f"not edges of the graph: {bad[:5]}")
    keep = np.array([(int(u), int(v)) not in A for u, v in g.edges], dtype=bool)
    E = g.edges[keep]
    J = g.couplings[keep]
    E.setflags(write=False)
    J = J.copy()
    J.setflags(write=False)
    return LatticeGraph(g.dim, g.lower, g.upper, g.bc, E, J, g.removed | frozenset(A))


def remove_edges_by_coords(g: LatticeGraph, A: Iterable[tuple[Sequence[int], Sequence[int]]]) -> LatticeGraph:
    return remove_edges(g, [(g.index(p), g.index(q)) for p, q in A])


def with_couplings(g: LatticeGraph, couplings: np.ndarray) -> LatticeGraph:
    """Same edge set, new nonnegative couplings."""
    couplings = np.asarray(couplings, dtype=np.float64).copy()
    if couplings.shape != (g.n_edges,):
        raise LatticeError("one coupling per edge required")
    if np.any(couplings < 0):
        raise LatticeError("couplings must be nonnegative")
    couplings.setflags(write=False)
    return LatticeGraph(g.dim, g.lower, g.upper, g.bc, g.edges, couplings, g.removed)


def graph_from_dict(d: dict) -> LatticeGraph:
    dim = int(d["d"])
    bc = d.get("bc", FREE)
    if "radii" in d:
        g = build_box(dim, tuple(d["radii"]), bc)
    else:
        g = _make(d["lower"], d["upper"], bc)
    removed = d.get("removed_edges", [])
    return remove_edges_by_coords(g, [(tuple(p), tuple(q)) for p, q in removed])


def graph_from_json(s: str) -> LatticeGraph:
    return graph_from_dict(json.loads(s))


# -- reflections and faces -----------------------------------------------


@dataclass(frozen=True)
class Reflection:
    """Mirror across the hyperplane ``x[axis] = offset``."""

    axis: int
    offset: float = 0

    def point(self, x: Sequence[int]) -> tuple:
        x = list(x)
        r = 2 * self.offset - x[self.axis]
        x[self.axis] = int(r) if float(r).is_integer() else r
        return tuple(x)


def reflect(obj, r: Reflection):
    """Reflect a point, an edge (pair of points) or a set of either."""
    if isinstance(obj, (set, frozenset)):
        return type(obj)(reflect(o, r) for o in obj)
    if isinstance(obj, list):
        return [reflect(o, r) for o in obj]
    obj = tuple(obj)
    if obj and isinstance(obj[0], (tuple, list)):
        return tuple(r.point(p) for p in obj)
    return r.point(obj)


@dataclass(frozen=True)
class Face:
    axis: int
    sign: int
    vertices: frozenset

    @property
    def plane(self) -> Reflection:
        (v,) = itertools.islice(self.vertices, 1)
        return Reflection(self.axis, v[self.axis])


def _inner_bounds(g: LatticeGraph, inner_radii) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if isinstance(inner_radii, (int, np.integer)):
        inner_radii = (int(inner_radii),) * g.dim
    inner_radii = tuple(int(n) for n in inner_radii)
    if len(inner_radii) != g.dim or min(inner_radii) < 0:
        raise LatticeError(f"bad inner radii {inner_radii}")
    lo = tuple(-n for n in inner_radii)
    hi = inner_radii
    if not (g.contains(lo) and g.contains(hi)):
        raise LatticeError(f"inner box of radii {inner_radii} is not contained in {g!r}")
    return lo, hi


def boundary_and_faces(g: LatticeGraph, inner_radii) -> tuple[set, list[Face]]:
    """Boundary vertices of the centred box ``[-n, n]^d`` inside ``g``, and its 2d faces.

    The boundary is taken with respect to Z^d: a vertex of the inner box is a
    boundary vertex when one of its lattice neighbours lies outside the inner
    box.  Faces are ordered ``(axis 0, +), (axis 0, -), (axis 1, +), ...``.
    """
    lo, hi = _inner_bounds(g, inner_radii)
    pts = [tuple(p) for p in itertools.product(*[range(l, h + 1) for l, h in zip(lo, hi)])]
    boundary = {p for p in pts if any(p[a] in (lo[a], hi[a]) for a in range(g.dim))}
    faces = []
    for a in range(g.dim):
        for sign, val in ((+1, hi[a]), (-1, lo[a])):
            faces.append(Face(a, sign, frozenset(p for p in pts if p[a] == val)))
    return boundary, faces


def reflected_images(y: Sequence[int], g: LatticeGraph, inner_radii) -> list[tuple[int, ...]]:
    """Images of ``y`` under reflection across the planes of the 2d faces."""
    lo, hi = _inner_bounds(g, inner_radii)
    out = []
    for a in range(g.dim):
        for val in (hi[a], lo[a]):
            out.append(Reflection(a, val).point(y))
    return out
