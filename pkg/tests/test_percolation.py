"""Percolation sampling and estimators against brute-force reference code.

The reference implementations here (BFS cluster labeling, Edmonds-Karp
max-flow) are written from scratch so the fast kernels have something
independent to agree with.
"""

import collections
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perconet.lattice import Block, Lattice, face_sites, geometry
from perconet.percolation import (BoundConstants, ClusterLabeling, MCEstimate,
                                  _run_trials, count_edge_disjoint_crossings,
                                  crossing_clusters, crossing_exists,
                                  crossing_probability, label_clusters,
                                  largest_cluster_scaling, region_crossing_clusters,
                                  region_labels, resource_bound, sample,
                                  theta_estimate)


# -- reference: BFS labeling --------------------------------------------------

def bfs_partition(s):
    """Clusters as a set of frozensets, by plain BFS over open structure."""
    geo = s.geometry
    adj = collections.defaultdict(list)
    for (a, b), is_open in zip(geo.bonds, s.open_bonds):
        if is_open and s.occupied_sites[a] and s.occupied_sites[b]:
            adj[int(a)].append(int(b))
            adj[int(b)].append(int(a))
    seen = set()
    parts = set()
    for v in np.nonzero(s.occupied_sites)[0]:
        v = int(v)
        if v in seen:
            continue
        comp = {v}
        queue = [v]
        while queue:
            u = queue.pop()
            for w in adj[u]:
                if w not in comp:
                    comp.add(w)
                    queue.append(w)
        seen |= comp
        parts.add(frozenset(comp))
    return parts


def labeling_partition(labeling):
    groups = collections.defaultdict(set)
    for v, lab in enumerate(labeling.labels):
        if lab >= 0:
            groups[int(lab)].add(v)
    return set(frozenset(g) for g in groups.values())


LATTICES = [Lattice("square", (6, 6)), Lattice("hexagonal", (5, 5)),
            Lattice("triangular", (4, 4)), Lattice("diamond", (2, 2, 2)),
            Lattice("pyrochlore", (2, 2, 2)), Lattice("square", (3, 3, 3))]


@pytest.mark.parametrize("lattice", LATTICES, ids=lambda l: f"{l.kind}{l.dims}")
def test_labeling_matches_bfs(lattice):
    for i in range(40):
        p_bond = (i % 10) / 9.0
        p_site = 1.0 if i % 3 else 0.7
        s = sample(lattice, p_bond, p_site, seed=i, path=("oracle", i))
        labeling = label_clusters(s)
        assert labeling_partition(labeling) == bfs_partition(s)
        # canonical labels are the smallest member ids
        for v, lab in enumerate(labeling.labels):
            if lab >= 0:
                members = np.nonzero(labeling.labels == lab)[0]
                assert lab == members.min()


def test_full_lattice_single_cluster():
    s = sample(Lattice("square", (5, 5)), 1.0, 1.0, seed=0)
    labeling = label_clusters(s)
    assert labeling.largest_cluster_size() == 25
    assert labeling.cluster_sizes == {0: 25}
    assert labeling.size_of(0) == 25
    assert crossing_exists(s, axis=0) and crossing_exists(s, axis=1)


def test_no_bonds_gives_singletons():
    s = sample(Lattice("square", (4, 4)), 0.0, 1.0, seed=0)
    labeling = label_clusters(s)
    assert labeling.largest_cluster_size() == 1
    assert len(labeling.cluster_sizes) == 16
    assert not crossing_exists(s)


def test_empty_sites():
    s = sample(Lattice("square", (4, 4)), 1.0, 0.0, seed=0)
    labeling = label_clusters(s)
    assert labeling.largest_cluster_size() == 0
    assert (labeling.labels == -1).all()


def test_sample_is_deterministic_and_path_split():
    lat = Lattice("square", (6, 6))
    a = sample(lat, 0.5, 0.9, seed=3, path=(0, 7))
    b = sample(lat, 0.5, 0.9, seed=3, path=(0, 7))
    c = sample(lat, 0.5, 0.9, seed=3, path=(0, 8))
    assert (a.open_bonds == b.open_bonds).all()
    assert (a.occupied_sites == b.occupied_sites).all()
    assert (a.open_bonds != c.open_bonds).any()


def test_sample_probability_domain():
    with pytest.raises(ValueError):
        sample(Lattice("square", (4, 4)), 1.5)
    with pytest.raises(ValueError):
        sample(Lattice("square", (4, 4)), 0.5, -0.1)


@given(st.integers(0, 2**32), st.floats(0.05, 0.95), st.floats(0.0, 0.9))
@settings(max_examples=40, deadline=None)
def test_monotone_coupling(seed, p_lo, gap):
    """Raising p with the seed fixed only adds open bonds (and crossings)."""
    p_hi = min(1.0, p_lo + gap)
    lat = Lattice("square", (8, 8))
    lo = sample(lat, p_lo, 1.0, seed=seed)
    hi = sample(lat, p_hi, 1.0, seed=seed)
    assert not (lo.open_bonds & ~hi.open_bonds).any()
    assert crossing_exists(hi) or not crossing_exists(lo)


def test_region_labels_do_not_leak():
    # two sites joined only through a path leaving the box must stay separate
    lat = Lattice("square", (3, 3))
    geo = geometry(lat)
    s = sample(lat, 1.0, 1.0, seed=0)
    open_bonds = np.zeros_like(s.open_bonds)
    path = [(1, 1), (1, 2), (1, 3), (2, 3), (3, 3), (3, 2), (3, 1)]
    ids = [geo.site_id(c) for c in path]
    for a, b in zip(ids, ids[1:]):
        for bid, (u, v) in enumerate(geo.bonds):
            if {int(u), int(v)} == {a, b}:
                open_bonds[bid] = True
    s = type(s)(lat, 1.0, 1.0, 0, open_bonds, np.ones(geo.n_sites, dtype=bool))
    full = label_clusters(s)
    assert full.labels[ids[0]] == full.labels[ids[-1]]
    site_ids, labels = region_labels(s, (1, 1), (3, 1))
    lab = {int(v): int(l) for v, l in zip(site_ids, labels)}
    assert lab[ids[0]] != lab[ids[-1]]
    assert region_crossing_clusters(s, (1, 1), (3, 1), 0) == []


def test_crossing_clusters_block_restriction():
    lat = Lattice("square", (8, 8))
    s = sample(lat, 1.0, 1.0, seed=0)
    labeling = label_clusters(s)
    assert crossing_clusters(labeling) == [0]
    blk = Block((2, 2), 2, 2, "A")
    assert crossing_clusters(labeling, blk) == region_crossing_clusters(s, blk.lo, blk.hi, 0)


def test_mc_estimate():
    est = MCEstimate(30, 100)
    assert est.estimate == 0.3
    assert est.ci95 == pytest.approx(1.96 * math.sqrt(0.3 * 0.7 / 100))


def test_run_trials_thread_invariant():
    def trial(i):
        return (i * 2654435761) % 7 == 0

    expected = sum(int(trial(i)) for i in range(500))
    assert _run_trials(500, trial, threads=1) == expected
    assert _run_trials(500, trial, threads=4) == expected


def test_crossing_probability_extremes():
    lat = Lattice("square", (5, 5))
    assert crossing_probability(lat, 1.0, trials=20, seed=0).estimate == 1.0
    assert crossing_probability(lat, 0.0, trials=20, seed=0).estimate == 0.0
    one = crossing_probability(lat, 0.55, trials=60, seed=4, threads=1)
    four = crossing_probability(lat, 0.55, trials=60, seed=4, threads=4)
    assert one.hits == four.hits


def test_theta_estimate():
    assert theta_estimate("square", 1.0, 8, trials=10, seed=0) == 1.0
    assert theta_estimate("square", 0.0, 8, trials=10, seed=0) == 0.0
    with pytest.raises(ValueError):
        theta_estimate("square", 0.5, 1, trials=10)


# -- reference: Edmonds-Karp on the open subgraph ------------------------------

def reference_max_crossings(s):
    geo = s.geometry
    cap = collections.defaultdict(int)
    adj = collections.defaultdict(set)

    def add(u, v, c):
        cap[(u, v)] += c
        adj[u].add(v)
        adj[v].add(u)

    for (a, b), is_open in zip(geo.bonds, s.open_bonds):
        a, b = int(a), int(b)
        if is_open and s.occupied_sites[a] and s.occupied_sites[b]:
            add(a, b, 1)
            add(b, a, 1)
    big = geo.n_sites
    for u in face_sites(geo, 0, high=False):
        if s.occupied_sites[u]:
            add("S", int(u), big)
    for v in face_sites(geo, 0, high=True):
        if s.occupied_sites[v]:
            add(int(v), "T", big)
    flow = 0
    while True:
        parent = {"S": None}
        queue = collections.deque(["S"])
        while queue and "T" not in parent:
            u = queue.popleft()
            for v in adj[u]:
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if "T" not in parent:
            return flow
        bottleneck = math.inf
        v = "T"
        while parent[v] is not None:
            bottleneck = min(bottleneck, cap[(parent[v], v)])
            v = parent[v]
        v = "T"
        while parent[v] is not None:
            cap[(parent[v], v)] -= bottleneck
            cap[(v, parent[v])] += bottleneck
            v = parent[v]
        flow += bottleneck


def test_edge_disjoint_crossings_full_lattice():
    # at p=1 the minimum cut between the faces is one bond per row
    for L in (3, 5):
        s = sample(Lattice("square", (L, L)), 1.0, 1.0, seed=0)
        assert count_edge_disjoint_crossings(s) == L


def test_edge_disjoint_crossings_matches_reference():
    lat = Lattice("square", (7, 7))
    for i in range(25):
        s = sample(lat, 0.4 + 0.05 * (i % 8), 1.0, seed=i, path=("flow", i))
        assert count_edge_disjoint_crossings(s) == reference_max_crossings(s)


def test_edge_disjoint_crossings_block_and_domain():
    s = sample(Lattice("square", (8, 8)), 0.7, 1.0, seed=1)
    blk = Block((2, 2), 2, 2, "A")
    n = count_edge_disjoint_crossings(s, blk)
    assert 0 <= n <= 4
    with pytest.raises(ValueError):
        count_edge_disjoint_crossings(sample(Lattice("square", (3, 3, 3)), 0.7))


def test_largest_cluster_scaling_shapes():
    rep = largest_cluster_scaling("square", 0.3, [8, 16, 24], trials=40, seed=0)
    assert rep.sizes == [8, 16, 24]
    assert all(m > 1 for m in rep.mean_largest)
    assert rep.mean_largest == sorted(rep.mean_largest)
    assert rep.log_fit.model == "a + b*log(L)"
    assert rep.linear_fit.model == "a + b*L"
    assert rep.log_fit.slope > 0
    with pytest.raises(ValueError):
        largest_cluster_scaling("square", 0.5, [8, 16], trials=5)
    with pytest.raises(ValueError):
        largest_cluster_scaling("triangular", 0.9, [8], trials=5)


def test_resource_bound():
    assert resource_bound(16, 0.0, 2) == (1, 256)
    k, total = resource_bound(16, 0.5, 2)
    assert k == 4 and total == 16 * 16 * 16
    k3, total3 = resource_bound(9, 0.5, 3)
    assert k3 == 3 and total3 == 81 * 27
    with pytest.raises(ValueError):
        resource_bound(16, -0.1, 2)


def test_bound_constants_positive():
    BoundConstants(1, 1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        BoundConstants(1, 0, 1, 1, 1, 1)
