"""Hot loops behind the percolation engine, jitted with numba.

Cluster labeling is weighted-by-id union-find with path halving: unions always
hang the larger root under the smaller one, so the final label of a cluster is
the smallest occupied site id it contains.  That makes labels canonical
(independent of bond order) and gives deterministic tie-breaking downstream.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _root(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def label_clusters_masked(n_sites, bonds, bond_open, site_open):
    """Labels per site: smallest site id in the cluster, or -1 if unoccupied."""
    parent = np.arange(n_sites, dtype=np.int32)
    for b in range(bonds.shape[0]):
        if bond_open[b]:
            u = bonds[b, 0]
            v = bonds[b, 1]
            if site_open[u] and site_open[v]:
                ru = _root(parent, u)
                rv = _root(parent, v)
                if ru != rv:
                    if ru < rv:
                        parent[rv] = ru
                    else:
                        parent[ru] = rv
    labels = np.empty(n_sites, dtype=np.int32)
    for i in range(n_sites):
        if site_open[i]:
            labels[i] = _root(parent, i)
        else:
            labels[i] = -1
    return labels


@njit(cache=True)
def label_subset(site_ids, local_of, bonds, bond_open, site_open):
    """Cluster labels restricted to the induced subgraph on ``site_ids``.

    ``local_of`` maps global site id -> local index (or -1 outside the subset).
    Returns local labels (canonical smallest local index, -1 if unoccupied).
    """
    n = site_ids.shape[0]
    parent = np.arange(n, dtype=np.int32)
    for b in range(bonds.shape[0]):
        if bond_open[b]:
            u = local_of[bonds[b, 0]]
            v = local_of[bonds[b, 1]]
            if u >= 0 and v >= 0 and site_open[site_ids[u]] and site_open[site_ids[v]]:
                ru = _root(parent, u)
                rv = _root(parent, v)
                if ru != rv:
                    if ru < rv:
                        parent[rv] = ru
                    else:
                        parent[ru] = rv
    labels = np.empty(n, dtype=np.int32)
    for i in range(n):
        if site_open[site_ids[i]]:
            labels[i] = _root(parent, i)
        else:
            labels[i] = -1
    return labels


@njit(cache=True)
def bincount_labels(labels, n_sites):
    """Cluster sizes indexed by label id (0 where the id is not a label)."""
    sizes = np.zeros(n_sites, dtype=np.int64)
    for i in range(labels.shape[0]):
        if labels[i] >= 0:
            sizes[labels[i]] += 1
    return sizes
