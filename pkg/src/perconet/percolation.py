"""Bond/site percolation sampling, cluster labeling, and Monte Carlo estimators.

Sampling is coupled across parameters: the uniforms for a given (lattice,
seed, path) are fixed and the open/occupied masks are obtained by
thresholding at (p_bond, p_site).  Raising p with the seed held fixed
therefore only adds open elements, which makes increasing events monotone
per seed and lets tests use paired-seed comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._kernels import bincount_labels, label_clusters_masked, label_subset
from ._rng import stream
from .lattice import (Block, Lattice, LatticeGeometry, bond_threshold,
                      block_site_ids, face_sites, geometry)


@dataclass
class PercolationSample:
    """One i.i.d. bond/site configuration on a lattice."""

    lattice: Lattice
    p_bond: float
    p_site: float
    seed: int
    open_bonds: np.ndarray       # bool per bond id
    occupied_sites: np.ndarray   # bool per site id

    @property
    def geometry(self) -> LatticeGeometry:
        return geometry(self.lattice)

    @property
    def open_bond_ids(self) -> np.ndarray:
        return np.nonzero(self.open_bonds)[0]

    @property
    def occupied_site_ids(self) -> np.ndarray:
        return np.nonzero(self.occupied_sites)[0]


def sample(lattice: Lattice, p_bond: float, p_site: float = 1.0, seed: int = 0,
           *, path: tuple = ()) -> PercolationSample:
    """Draw an independent configuration; identical inputs give identical output.

    ``path`` extends the RNG derivation path (e.g. a trial index) so that
    batches of samples are order- and worker-independent.
    """
    if not (0.0 <= p_bond <= 1.0 and 0.0 <= p_site <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    geo = geometry(lattice)
    rng = stream(seed, "sample", lattice.kind, *lattice.dims, *path)
    u_bond = rng.random(geo.n_bonds, dtype=np.float32)
    u_site = rng.random(geo.n_sites, dtype=np.float32)
    return PercolationSample(lattice, p_bond, p_site, seed,
                             u_bond < p_bond, u_site < p_site)


@dataclass
class ClusterLabeling:
    """Canonical cluster labels: label = smallest occupied site id in the cluster."""

    sample: PercolationSample
    labels: np.ndarray  # int32 per site; -1 for unoccupied sites

    @property
    def cluster_sizes(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels[self.labels >= 0], return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}

    def size_of(self, cluster_id: int) -> int:
        return int(np.count_nonzero(self.labels == cluster_id))

    def largest_cluster_size(self) -> int:
        if not np.any(self.labels >= 0):
            return 0
        return int(bincount_labels(self.labels, self.sample.geometry.n_sites).max())


def label_clusters(s: PercolationSample) -> ClusterLabeling:
    geo = s.geometry
    labels = label_clusters_masked(geo.n_sites, geo.bonds, s.open_bonds, s.occupied_sites)
    return ClusterLabeling(s, labels)


# -- region-restricted labeling ---------------------------------------------

def region_labels(s: PercolationSample, lo: tuple[int, ...], hi: tuple[int, ...]
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Cluster labels of the induced subgraph on the box [lo, hi].

    Returns (site_ids, labels) where labels are global site ids (the smallest
    site id of each region cluster) aligned with site_ids; -1 for unoccupied.
    Connectivity outside the box does not leak in, matching the block-event
    definitions.
    """
    geo = s.geometry
    site_ids = block_site_ids(geo, lo, hi)
    local_of = np.full(geo.n_sites, -1, dtype=np.int32)
    local_of[site_ids] = np.arange(len(site_ids), dtype=np.int32)
    local = label_subset(site_ids, local_of, geo.bonds, s.open_bonds, s.occupied_sites)
    labels = np.where(local >= 0, site_ids[np.clip(local, 0, None)], -1).astype(np.int32)
    return site_ids, labels


def _region_face_sets(geo: LatticeGeometry, lo, hi, axis):
    """Global site ids of the two opposite faces of a box along ``axis``."""
    lo_face = list(lo), list(hi)
    lo_face[1][axis] = lo[axis]
    hi_face = list(lo), list(hi)
    hi_face[0][axis] = hi[axis]
    return (block_site_ids(geo, tuple(lo_face[0]), tuple(lo_face[1])),
            block_site_ids(geo, tuple(hi_face[0]), tuple(hi_face[1])))


def region_crossing_clusters(s: PercolationSample, lo, hi, axis: int) -> list[int]:
    """Cluster ids (global canonical) crossing the box between its two axis faces."""
    geo = s.geometry
    site_ids, labels = region_labels(s, lo, hi)
    local_of = np.full(geo.n_sites, -1, dtype=np.int64)
    local_of[site_ids] = np.arange(len(site_ids))
    face_a, face_b = _region_face_sets(geo, lo, hi, axis)
    la = labels[local_of[face_a]]
    lb = labels[local_of[face_b]]
    common = np.intersect1d(la[la >= 0], lb[lb >= 0])
    return [int(c) for c in common]


def crossing_clusters(labeling: ClusterLabeling, block: Block | None = None,
                      axis: int = 0) -> list[int]:
    """Clusters with occupied sites on both opposite faces, restricted to the block.

    With ``block=None`` the whole lattice is the region and the labeling's own
    labels are used; otherwise connectivity is recomputed inside the block so
    that paths leaving and re-entering it do not count.
    """
    s = labeling.sample
    if block is None:
        geo = s.geometry
        la = labeling.labels[face_sites(geo, axis, high=False)]
        lb = labeling.labels[face_sites(geo, axis, high=True)]
        common = np.intersect1d(la[la >= 0], lb[lb >= 0])
        return [int(c) for c in common]
    return region_crossing_clusters(s, block.lo, block.hi, axis)


def crossing_exists(s: PercolationSample, axis: int = 0) -> bool:
    return len(crossing_clusters(label_clusters(s), None, axis)) > 0


# -- Monte Carlo estimators --------------------------------------------------

@dataclass
class MCEstimate:
    hits: int
    trials: int

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def ci95(self) -> float:
        p = self.estimate
        return 1.96 * math.sqrt(p * (1.0 - p) / self.trials)


def _run_trials(n_trials: int, trial_fn, threads: int = 1) -> int:
    """Sum of trial_fn(i) over i; identical for any thread count.

    Trials carry their index into the RNG derivation path, so partitioning
    across workers cannot change any individual outcome.
    """
    if threads <= 1:
        return sum(int(trial_fn(i)) for i in range(n_trials))
    from concurrent.futures import ThreadPoolExecutor
    chunks = np.array_split(np.arange(n_trials), threads * 4)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda idx: sum(int(trial_fn(int(i))) for i in idx), chunks)
        return sum(parts)


def crossing_probability(lattice: Lattice, p_bond: float, p_site: float = 1.0,
                         axis: int = 0, trials: int = 1000, seed: int = 0,
                         threads: int = 1) -> MCEstimate:
    """MC probability of a side-to-side crossing cluster along ``axis``."""
    geometry(lattice)  # build once outside the trial loop

    def trial(i: int) -> bool:
        s = sample(lattice, p_bond, p_site, seed, path=(axis, i))
        return crossing_exists(s, axis)

    return MCEstimate(_run_trials(trials, trial, threads), trials)


def theta_estimate(lattice_kind: str, p: float, L: int, trials: int,
                   seed: int = 0, threads: int = 1) -> float:
    """Finite-size stand-in for the percolation probability θ(p).

    Estimator: the fraction of configurations in which the central site
    belongs to a cluster crossing the lattice side to side (axis 0).  Bond
    percolation with fully occupied sites.
    """
    if L < 2:
        raise ValueError("need L >= 2")
    lattice = Lattice(lattice_kind, (L, L))
    geo = geometry(lattice)
    center = geo.site_id(((L + 1) // 2, (L + 1) // 2))
    lo_face = face_sites(geo, 0, high=False)
    hi_face = face_sites(geo, 0, high=True)

    def trial(i: int) -> bool:
        s = sample(lattice, p, 1.0, seed, path=("theta", i))
        labeling = label_clusters(s)
        c = labeling.labels[center]
        if c < 0:
            return False
        return bool(np.any(labeling.labels[lo_face] == c)
                    and np.any(labeling.labels[hi_face] == c))

    hits = _run_trials(trials, trial, threads)
    return hits / trials


def count_edge_disjoint_crossings(s: PercolationSample, block: Block | None = None) -> int:
    """Maximum number of edge-disjoint open left-right crossings (max-flow).

    Each open bond gets unit capacity (one arc per direction, the standard
    undirected reduction); a virtual source feeds the low face and a virtual
    sink drains the high face along axis 0.
    """
    import networkx as nx
    geo = s.geometry
    if block is None:
        if s.lattice.ndim != 2:
            raise ValueError("edge-disjoint crossing counts are defined for d=2")
        in_region = np.ones(geo.n_sites, dtype=bool)
        face_a = face_sites(geo, 0, high=False)
        face_b = face_sites(geo, 0, high=True)
    else:
        site_ids = block_site_ids(geo, block.lo, block.hi)
        in_region = np.zeros(geo.n_sites, dtype=bool)
        in_region[site_ids] = True
        face_a, face_b = _region_face_sets(geo, block.lo, block.hi, 0)
    g = nx.DiGraph()
    ok = (s.open_bonds & s.occupied_sites[geo.bonds[:, 0]]
          & s.occupied_sites[geo.bonds[:, 1]]
          & in_region[geo.bonds[:, 0]] & in_region[geo.bonds[:, 1]])
    for u, v in geo.bonds[ok]:
        g.add_edge(int(u), int(v), capacity=1)
        g.add_edge(int(v), int(u), capacity=1)
    src, snk = "S", "T"
    for u in face_a:
        if s.occupied_sites[u] and g.has_node(int(u)):
            g.add_edge(src, int(u), capacity=len(face_a) + len(face_b))
    for v in face_b:
        if s.occupied_sites[v] and g.has_node(int(v)):
            g.add_edge(int(v), snk, capacity=len(face_a) + len(face_b))
    if src not in g or snk not in g:
        return 0
    return int(nx.maximum_flow_value(g, src, snk))


@dataclass
class FitReport:
    """Least-squares fit of y against a transform of L."""

    model: str
    intercept: float
    slope: float
    r2: float
    slope_stderr: float


def _fit(x: np.ndarray, y: np.ndarray, model: str) -> FitReport:
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = max(len(x) - 2, 1)
    sigma2 = ss_res / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    return FitReport(model, float(coef[0]), float(coef[1]), r2, float(np.sqrt(cov[1, 1])))


@dataclass
class ScalingReport:
    lattice_kind: str
    p: float
    sizes: list[int]
    mean_largest: list[float]
    log_fit: FitReport
    linear_fit: FitReport


def largest_cluster_scaling(lattice_kind: str, p: float, sizes: list[int],
                            trials: int, seed: int = 0, threads: int = 1) -> ScalingReport:
    """Mean largest-cluster size per linear size L, with log and linear fits.

    Only meaningful in the subcritical phase, where the largest cluster in an
    L x L box grows like log L; supercritical inputs are rejected.
    """
    if p >= bond_threshold(lattice_kind):
        raise ValueError(f"p={p} is not subcritical for {lattice_kind}")
    means = []
    for L in sizes:
        lattice = Lattice(lattice_kind, (L, L))
        geometry(lattice)

        def trial(i: int, lattice=lattice) -> int:
            s = sample(lattice, p, 1.0, seed, path=("scaling", L, i))
            return label_clusters(s).largest_cluster_size()

        total = _run_trials(trials, trial, threads)
        means.append(total / trials)
    y = np.array(means, dtype=float)
    Ls = np.array(sizes, dtype=float)
    return ScalingReport(lattice_kind, p, list(sizes), means,
                         _fit(np.log(Ls), y, "a + b*log(L)"),
                         _fit(Ls, y, "a + b*L"))


def resource_bound(L: int, epsilon: float, d: int) -> tuple[int, int]:
    """Block-size ansatz k = ceil(L^epsilon) and total sites R = L^2 * k^d."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    k = max(1, math.ceil(L ** epsilon))
    return k, L * L * k ** d


@dataclass(frozen=True)
class BoundConstants:
    """User-supplied positive constants for illustrative bound curves.

    The existence constants of the analytic block bounds carry no published
    values; they are accepted here for plotting only and never asserted.
    """

    g: float
    a: float
    c: float
    s: float
    t: float
    beta: float

    def __post_init__(self):
        for name in ("g", "a", "c", "s", "t", "beta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"constant {name} must be strictly positive")
