"""Slice-to-slice transfer-matrix evaluation for free-BC boxes.

The box is cut into slices perpendicular to its longest axis.  A state is a
spin configuration of one slice (2^W states for W sites per slice).  In-slice
bonds, the field and spin insertions are diagonal in the state; bonds between
consecutive slices act as a Kronecker product of 2x2 matrices and are applied
site by site, so no 2^W x 2^W matrix is ever formed.  Vectors are rescaled at
every step and the log-scales carried along.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from ..lattice import FREE, LatticeGraph

SLICE_BUDGET = 16


class TransferNotApplicable(ValueError):
    """Graph is not a free-BC box or its slices are too wide."""


class TransferOracle:
    def __init__(self, g: LatticeGraph, beta: float, H: float = 0.0, max_width: int = SLICE_BUDGET):
        if g.bc != FREE:
            raise TransferNotApplicable("transfer oracle needs free boundary conditions")
        shape = g.shape
        axis = int(np.argmax(shape))
        L = shape[axis]
        W = g.n_vertices // L
        if W > max_width:
            raise TransferNotApplicable(f"slice width {W} exceeds {max_width}")
        self.g, self.beta, self.H = g, float(beta), float(H)
        self.L, self.W = L, W
        coords = g.coords - np.asarray(g.lower)
        self.slice_of = coords[:, axis]
        other = [a for a in range(g.dim) if a != axis]
        pos = np.zeros(g.n_vertices, np.int64)
        for a in other:
            pos = pos * shape[a] + coords[:, a]
        self.pos_of = pos

        codes = np.arange(1 << W, dtype=np.int64)
        # position 0 is the most significant bit so reshape(2,)*W puts it on axis 0
        self.S = (1 - 2 * ((codes[:, None] >> (W - 1 - np.arange(W))) & 1)).astype(np.float64)

        self.inter = np.zeros((max(L - 1, 0), W))
        self.log_diag = np.zeros((L, 1 << W))
        if H:
            self.log_diag += H * self.S.sum(axis=1)
        for (u, v), J in zip(g.edges, g.couplings):
            su, sv = self.slice_of[u], self.slice_of[v]
            pu, pv = self.pos_of[u], self.pos_of[v]
            if su == sv:
                self.log_diag[su] += beta * J * self.S[:, pu] * self.S[:, pv]
            elif abs(su - sv) == 1 and pu == pv:
                self.inter[min(su, sv), pu] = beta * J
            else:
                raise TransferNotApplicable("edge is neither in-slice nor between adjacent slices")
        self._diag_shift = self.log_diag.max(axis=1, keepdims=True)
        self.diag = np.exp(self.log_diag - self._diag_shift)
        self._fwd = None
        self._bwd = None

    # -- primitives -------------------------------------------------------
    def _bond(self, k: int, v: np.ndarray) -> np.ndarray:
        """Apply the bonds between slice k and k+1 to v (states along axis 0)."""
        W = self.W
        extra = v.shape[1:]
        t = v.reshape((2,) * W + extra)
        for r in range(W):
            K = self.inter[k, r]
            a, b = math.exp(K), math.exp(-K)
            t0 = np.take(t, 0, axis=r)
            t1 = np.take(t, 1, axis=r)
            t = np.stack([a * t0 + b * t1, b * t0 + a * t1], axis=r)
        return t.reshape(v.shape)

    @staticmethod
    def _rescale(v: np.ndarray) -> tuple[np.ndarray, float]:
        m = float(np.max(np.abs(v)))
        if m == 0.0:
            return v, 0.0
        return v / m, math.log(m)

    def _forward(self):
        if self._fwd is None:
            F, c = [], []
            v, s = self._rescale(self.diag[0].copy())
            s += float(self._diag_shift[0, 0])
            F.append(v)
            c.append(s)
            for k in range(self.L - 1):
                v = self.diag[k + 1] * self._bond(k, v)
                v, ds = self._rescale(v)
                s += ds + float(self._diag_shift[k + 1, 0])
                F.append(v)
                c.append(s)
            self._fwd = (F, c)
        return self._fwd

    def _backward(self):
        if self._bwd is None:
            G = [None] * self.L
            c = [0.0] * self.L
            v = np.ones(1 << self.W)
            s = 0.0
            G[-1] = v
            for k in range(self.L - 2, -1, -1):
                v = self._bond(k, self.diag[k + 1] * v)
                v, ds = self._rescale(v)
                s += ds + float(self._diag_shift[k + 1, 0])
                G[k] = v
                c[k] = s
            self._bwd = (G, c)
        return self._bwd

    # -- public -----------------------------------------------------------
    def log_partition(self) -> float:
        F, cf = self._forward()
        return cf[-1] + math.log(float(F[-1].sum()))

    def correlation(self, A: Iterable[int]) -> float:
        """Exact ``<prod_{x in A} sigma_x>``."""
        A = sorted(set(int(a) for a in A))
        if not A:
            return 1.0
        ins = np.ones((self.L, 1 << self.W))
        for a in A:
            ins[self.slice_of[a]] *= self.S[:, self.pos_of[a]]
        v, s = self._rescale(self.diag[0] * ins[0])
        s += float(self._diag_shift[0, 0])
        for k in range(self.L - 1):
            v = self.diag[k + 1] * ins[k + 1] * self._bond(k, v)
            v, ds = self._rescale(v)
            s += ds + float(self._diag_shift[k + 1, 0])
        total = float(v.sum())
        if total == 0.0:
            return 0.0
        return math.copysign(math.exp(s + math.log(abs(total)) - self.log_partition()), total)

    def correlation_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """``(<sigma_i>, <sigma_i sigma_j>)`` for every pair of vertices."""
        F, cf = self._forward()
        G, cg = self._backward()
        logZ = self.log_partition()
        L, W, S = self.L, self.W, self.S
        # C[k1, r1, k2, r2]
        C = np.zeros((L, W, L, W))
        first = np.zeros((L, W))
        for i in range(L):
            scale = math.exp(cf[i] + cg[i] - logZ)
            marg = F[i] * G[i] * scale
            first[i] = marg @ S
            C[i, :, i, :] = (S * marg[:, None]).T @ S
            U = F[i][:, None] * S
            s = cf[i]
            for j in range(i + 1, L):
                U = self.diag[j][:, None] * self._bond(j - 1, U)
                U, ds = self._rescale(U)
                s += ds + float(self._diag_shift[j, 0])
                C[i, :, j, :] = U.T @ (S * G[j][:, None]) * math.exp(s + cg[j] - logZ)
                C[j, :, i, :] = C[i, :, j, :].T
        V = self.g.n_vertices
        idx_k, idx_r = self.slice_of, self.pos_of
        mean = first[idx_k, idx_r]
        corr = C[idx_k[:, None], idx_r[:, None], idx_k[None, :], idx_r[None, :]]
        assert corr.shape == (V, V)
        return mean, corr


def transfer_applicable(g: LatticeGraph, max_width: int = SLICE_BUDGET) -> bool:
    if g.bc != FREE:
        return False
    return g.n_vertices // max(g.shape) <= max_width
