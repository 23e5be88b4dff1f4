"""Numba kernels for single-site and cluster updates.

Every public kernel takes a ``seed`` and reseeds numba's generator on entry,
so a run is a deterministic function of the seeds drawn by the caller.
Graphs are passed as CSR adjacency ``(indptr, nbr, cpl)`` or as an edge list.
"""

import numba as nb
import numpy as np

HEATBATH = 0
METROPOLIS = 1


@nb.njit(cache=True, nogil=True)
def _local_field(spins, i, indptr, nbr, cpl):
    h = 0.0
    for k in range(indptr[i], indptr[i + 1]):
        h += cpl[k] * spins[nbr[k]]
    return h


@nb.njit(cache=True, nogil=True)
def _single_site_sweep(spins, indptr, nbr, cpl, beta, H, rule):
    V = spins.shape[0]
    for i in range(V):
        h = beta * _local_field(spins, i, indptr, nbr, cpl) + H
        # energy change of flipping spin i is 2 s_i h (in units of -log weight)
        dE = 2.0 * spins[i] * h
        if rule == HEATBATH:
            p = 1.0 / (1.0 + np.exp(dE))
        else:
            p = 1.0 if dE <= 0.0 else np.exp(-dE)
        if np.random.random() < p:
            spins[i] = -spins[i]


@nb.njit(cache=True, nogil=True)
def single_site_sweeps(spins, indptr, nbr, cpl, beta, H, rule, n_sweeps, seed):
    np.random.seed(seed)
    for _ in range(n_sweeps):
        _single_site_sweep(spins, indptr, nbr, cpl, beta, H, rule)


@nb.njit(cache=True, nogil=True)
def _wolff_step(spins, indptr, nbr, cpl, beta, H, stack, members, mark, stamp):
    """Grow one cluster and flip it unless it is pinned; returns its size.

    Each cluster site aligned with the field bonds to a ghost spin with
    probability ``1 - exp(-2|H|)``; a ghost bond pins the cluster and the flip
    is rejected.
    """
    V = spins.shape[0]
    seed_site = np.random.randint(0, V)
    s0 = spins[seed_site]
    mark[seed_site] = stamp
    stack[0] = seed_site
    top = 1
    size = 0
    pinned = False
    check_ghost = H != 0.0 and s0 == (1 if H > 0 else -1)
    p_ghost = 1.0 - np.exp(-2.0 * abs(H))
    while top > 0:
        top -= 1
        i = stack[top]
        members[size] = i
        size += 1
        if check_ghost and not pinned and np.random.random() < p_ghost:
            pinned = True
        for k in range(indptr[i], indptr[i + 1]):
            j = nbr[k]
            if mark[j] == stamp or spins[j] != s0:
                continue
            if np.random.random() < 1.0 - np.exp(-2.0 * beta * cpl[k]):
                mark[j] = stamp
                stack[top] = j
                top += 1
    if not pinned:
        for m in range(size):
            spins[members[m]] = -s0
    return size


@nb.njit(cache=True, nogil=True)
def wolff_clusters(spins, indptr, nbr, cpl, beta, H, n_clusters, target_sites, seed, mark, stamp0):
    """Run ``n_clusters`` clusters, or clusters until ``target_sites`` sites were visited.

    Returns ``(clusters built, sites visited, last stamp)``.
    """
    np.random.seed(seed)
    V = spins.shape[0]
    stack = np.empty(V, np.int64)
    members = np.empty(V, np.int64)
    stamp = stamp0
    built = 0
    visited = 0
    while True:
        if n_clusters > 0 and built >= n_clusters:
            break
        if n_clusters <= 0 and visited >= target_sites:
            break
        stamp += 1
        visited += _wolff_step(spins, indptr, nbr, cpl, beta, H, stack, members, mark, stamp)
        built += 1
    return built, visited, stamp


@nb.njit(cache=True, nogil=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@nb.njit(cache=True, nogil=True)
def _sw_step(spins, edges, cpl, beta, H, parent, size, labels):
    V = spins.shape[0]
    for i in range(V):
        parent[i] = i
        size[i] = 1
    for e in range(edges.shape[0]):
        u = edges[e, 0]
        v = edges[e, 1]
        if spins[u] != spins[v]:
            continue
        if np.random.random() < 1.0 - np.exp(-2.0 * beta * cpl[e]):
            ru = _find(parent, u)
            rv = _find(parent, v)
            if ru != rv:
                if size[ru] < size[rv]:
                    ru, rv = rv, ru
                parent[rv] = ru
                size[ru] += size[rv]
    for i in range(V):
        labels[i] = _find(parent, i)
    # new spin per cluster; with a field the cluster prefers the field direction
    for i in range(V):
        if labels[i] == i:
            if H == 0.0:
                size[i] = 1 if np.random.random() < 0.5 else -1
            else:
                p_up = 1.0 / (1.0 + np.exp(-2.0 * H * size[i]))
                size[i] = 1 if np.random.random() < p_up else -1
    for i in range(V):
        spins[i] = size[labels[i]]


@nb.njit(cache=True, nogil=True)
def sw_sweeps(spins, edges, cpl, beta, H, n_sweeps, seed, labels):
    """``n_sweeps`` Swendsen-Wang updates; ``labels`` holds the last FK clusters."""
    np.random.seed(seed)
    V = spins.shape[0]
    parent = np.empty(V, np.int64)
    size = np.empty(V, np.int64)
    for _ in range(n_sweeps):
        _sw_step(spins, edges, cpl, beta, H, parent, size, labels)


@nb.njit(cache=True, nogil=True)
def pair_connectivity(labels, xs, ys):
    """Fraction of pairs ``(xs[k], ys[k])`` in the same cluster."""
    c = 0
    for k in range(xs.shape[0]):
        if labels[xs[k]] == labels[ys[k]]:
            c += 1
    return c / xs.shape[0]


@nb.njit(cache=True, nogil=True)
def pair_products(spins, xs, ys):
    c = 0
    for k in range(xs.shape[0]):
        c += spins[xs[k]] * spins[ys[k]]
    return c / xs.shape[0]


@nb.njit(cache=True, nogil=True)
def cluster_second_moment(labels, sites, counts):
    """``sum_C |C cap sites|^2``: improved estimator of ``<(sum_{sites} s)^2>``."""
    for k in range(sites.shape[0]):
        counts[labels[sites[k]]] += 1
    tot = 0.0
    for k in range(sites.shape[0]):
        r = labels[sites[k]]
        if counts[r] > 0:
            tot += counts[r] * counts[r]
            counts[r] = 0
    return tot
