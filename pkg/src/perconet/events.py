"""Crossing events on the renormalization block family, and the block-size search.

Event catalogue (regions live on the slab [1,2kL]^2 x [1,2k]^(d-2), see
``lattice``; crossings are along axis 0 unless stated):

* ``A_cross``      block A_y has a left-right crossing cluster
* ``B_atMostOne``  overlap B_y has at most one crossing cluster
* ``D_joint``      the two blocks left and right of odd column z1 cross and
                   their crossings are connected within the union region.
                   Equivalently (proved by path restriction): the union box of
                   axis-0 span 4k is itself crossed left to right.
* ``E_atMostOneC`` union region C_z has at most one crossing cluster
* ``F_jointC``     both C-partner blocks cross and E holds, joining vertical
                   neighbors through a unique cluster
* ``U_full``       all D and F events (d >= 3); all row/column G events (d=2);
                   a single block crossing when L=1
* ``G_rowcol``     full-width row (or column) strip of thickness 2k is crossed
                   along its long axis
* ``H_pairConnect`` two given sites lie in one open cluster of the sample

Event params are plain dicts: ``k``, ``L`` and an ``index`` pair where
applicable; ``orientation`` for G; ``sites`` for H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import stream
from .lattice import Block, Lattice, face_sites, geometry, slab_lattice
from .percolation import (MCEstimate, PercolationSample, _run_trials,
                          label_clusters, region_crossing_clusters, sample)

EVENT_NAMES = ("A_cross", "B_atMostOne", "D_joint", "E_atMostOneC",
               "F_jointC", "U_full", "G_rowcol", "H_pairConnect")


def _a_region(index, k, d):
    return Block(tuple(index), k, d, "A")


def _d_region(index, k, d):
    z1, z2 = index
    left = Block((z1 - 1, z2), k, d, "A")
    right = Block((z1 + 1, z2), k, d, "A")
    lo = (left.lo[0],) + left.lo[1:]
    hi = (right.hi[0],) + right.hi[1:]
    return lo, hi


def evaluate_event(s: PercolationSample, event: str, params: dict) -> bool:
    """Deterministic predicate of one event on one sample."""
    d = s.lattice.ndim
    k = params.get("k")
    if event == "A_cross":
        blk = _a_region(params["index"], k, d)
        return len(region_crossing_clusters(s, blk.lo, blk.hi, 0)) >= 1
    if event == "B_atMostOne":
        blk = Block(tuple(params["index"]), k, d, "B")
        return len(region_crossing_clusters(s, blk.lo, blk.hi, 0)) <= 1
    if event == "D_joint":
        lo, hi = _d_region(params["index"], k, d)
        return len(region_crossing_clusters(s, lo, hi, 0)) >= 1
    if event == "E_atMostOneC":
        blk = Block(tuple(params["index"]), k, d, "C")
        return len(region_crossing_clusters(s, blk.lo, blk.hi, 0)) <= 1
    if event == "F_jointC":
        z1, z2 = params["index"]
        return (evaluate_event(s, "A_cross", {"k": k, "index": (z1, z2)})
                and evaluate_event(s, "A_cross", {"k": k, "index": (z1, z2 + 2)})
                and evaluate_event(s, "E_atMostOneC", {"k": k, "index": (z1, z2)}))
    if event == "G_rowcol":
        i = params["index"]
        L = params["L"]
        span = 2 * k * L
        strip = ((2 * i - 2) * k + 1, 2 * i * k)
        if params.get("orientation", "row") == "row":
            lo = (1, strip[0]) + (1,) * (d - 2)
            hi = (span, strip[1]) + tuple(s.lattice.dims[2:])
            return len(region_crossing_clusters(s, lo, hi, 0)) >= 1
        lo = (strip[0], 1) + (1,) * (d - 2)
        hi = (strip[1], span) + tuple(s.lattice.dims[2:])
        return len(region_crossing_clusters(s, lo, hi, 1)) >= 1
    if event == "U_full":
        return _evaluate_u(s, params)
    if event == "H_pairConnect":
        labeling = label_clusters(s)
        geo = s.geometry
        a, b = params["sites"]
        ia = a if isinstance(a, (int, np.integer)) else geo.site_id(a)
        ib = b if isinstance(b, (int, np.integer)) else geo.site_id(b)
        return labeling.labels[ia] >= 0 and labeling.labels[ia] == labeling.labels[ib]
    raise ValueError(f"unknown event {event!r}")


def u_subevents(L: int, k: int, d: int) -> list[tuple[str, dict]]:
    """The events whose conjunction makes up U(L, k) on a d-dimensional slab."""
    if L == 1:
        return [("A_cross", {"k": k, "index": (2, 2)})]
    subs: list[tuple[str, dict]] = []
    if d == 2:
        for i in range(1, L + 1):
            subs.append(("G_rowcol", {"k": k, "L": L, "index": i, "orientation": "row"}))
            subs.append(("G_rowcol", {"k": k, "L": L, "index": i, "orientation": "column"}))
        return subs
    for z1 in range(3, 2 * L, 2):
        for z2 in range(2, 2 * L + 1, 2):
            subs.append(("D_joint", {"k": k, "index": (z1, z2)}))
    for z1 in range(2, 2 * L + 1, 2):
        for z2 in range(2, 2 * L - 1, 2):
            subs.append(("F_jointC", {"k": k, "index": (z1, z2)}))
    return subs


def _evaluate_u(s: PercolationSample, params: dict) -> bool:
    k, L = params["k"], params["L"]
    return all(evaluate_event(s, name, p) for name, p in u_subevents(L, k, s.lattice.ndim))


@dataclass
class EventEstimate:
    event: str
    params: dict
    hits: int
    trials: int
    seed: int
    lattice: Lattice | None = None

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def ci95(self) -> float:
        p = self.estimate
        return 1.96 * math.sqrt(p * (1.0 - p) / self.trials)


def estimate_event_probability(event: str, params: dict, p: float, trials: int,
                               seed: int = 0, threads: int = 1) -> EventEstimate:
    """MC estimate of one event's probability on the slab the params describe.

    ``p`` is the bond probability; ``params['p_site']`` (default 1) sets site
    occupation.  The slab is [1,2kL]^2 x [1,2k]^(d-2) with d = params.get('d', 2).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if event not in EVENT_NAMES:
        raise ValueError(f"unknown event {event!r}")
    k = params.get("k", 1)
    L = params.get("L", 1)
    d = params.get("d", 2)
    p_site = params.get("p_site", 1.0)
    lattice = params.get("lattice") or slab_lattice(L, k, d)
    geometry(lattice)

    def trial(i: int) -> bool:
        s = sample(lattice, p, p_site, seed, path=("event", event, i))
        return evaluate_event(s, event, params)

    hits = _run_trials(trials, trial, threads)
    return EventEstimate(event, params, hits, trials, seed, lattice)


# ---------------------------------------------------------------------------
# Block-size search: the pooled-block procedure.
#
# For each candidate k a pool of independent blocks (edge 2k, for diamond 2k
# cells per axis) is generated once.  Each block is reduced to: does it have a
# "chosen" cluster (largest cluster crossing the block along BOTH renormalized
# axes; ties to the smallest canonical label), and which face sites belong to
# it.  A populated renormalized lattice is then an L x L grid of blocks drawn
# from the pool with replacement; the bonds across each shared face are
# sampled fresh with the same (p_bond, p_site-of-endpoints-already-fixed)
# law, and a neighboring pair counts as joined iff some open cross-face bond
# has both endpoints in the two chosen clusters.  A population succeeds when
# every block has a chosen cluster and every adjacent pair is joined.
# ---------------------------------------------------------------------------


class BlockSizeSearchError(RuntimeError):
    def __init__(self, cap: int, table):
        super().__init__(f"no block size up to k_max={cap} reached the target probability")
        self.cap = cap
        self.table = table


def _block_lattice(kind: str, k: int) -> Lattice:
    if kind == "square":
        return Lattice("square", (2 * k, 2 * k))
    if kind == "diamond":
        return Lattice("diamond", (2 * k, 2 * k, 2 * k))
    raise ValueError(f"block-size search supports square and diamond, not {kind!r}")


def _seam_pattern(kind: str, k: int, axis: int):
    """Cross-face bonds between two adjacent blocks along ``axis``.

    Returns (idx_hi, idx_lo): for each seam bond, the position of its low-side
    endpoint within the high face of the first block and of its high-side
    endpoint within the low face of the second block.
    """
    blk = _block_lattice(kind, k)
    dims = list(blk.dims)
    dims[axis] *= 2
    double = geometry(Lattice(kind, tuple(dims)))
    lay = double.layers[:, axis]
    n_half = blk.dims[axis] if kind == "diamond" else 2 * k
    u, v = double.bonds[:, 0], double.bonds[:, 1]
    cross = ((lay[u] == n_half - 1) & (lay[v] == n_half)) | \
            ((lay[v] == n_half - 1) & (lay[u] == n_half))
    lo_side = np.where(lay[u] < lay[v], u, v)[cross]
    hi_side = np.where(lay[u] < lay[v], v, u)[cross]

    single = geometry(blk)
    shift = np.zeros(3 if kind == "diamond" else blk.ndim, dtype=np.int32)
    shift[axis] = 4 * blk.dims[axis] if kind == "diamond" else blk.dims[axis]
    hi_face = face_sites(single, axis, high=True)
    lo_face = face_sites(single, axis, high=False)
    pos_hi = {int(s): i for i, s in enumerate(hi_face)}
    pos_lo = {int(s): i for i, s in enumerate(lo_face)}
    idx_hi = np.array([pos_hi[single.site_id(double.coords[s])] for s in lo_side],
                      dtype=np.int64)
    idx_lo = np.array([pos_lo[single.site_id(double.coords[s] - shift)] for s in hi_side],
                      dtype=np.int64)
    return idx_hi, idx_lo


def _build_pool(kind: str, k: int, p_site: float, p_bond: float, n_blocks: int,
                seed: int, threads: int = 1):
    """Sample a pool of blocks; keep chosen-cluster face membership only."""
    blk = _block_lattice(kind, k)
    geo = geometry(blk)
    faces = {(ax, hi): face_sites(geo, ax, hi) for ax in (0, 1) for hi in (False, True)}
    has_chosen = np.zeros(n_blocks, dtype=bool)
    masks = {key: np.zeros((n_blocks, len(ids)), dtype=bool) for key, ids in faces.items()}

    def one(b: int) -> bool:
        s = sample(blk, p_bond, p_site, seed, path=("pool", kind, k, b))
        labeling = label_clusters(s)
        lab = labeling.labels
        cross0 = set(np.intersect1d(
            lab[faces[(0, False)]][lab[faces[(0, False)]] >= 0],
            lab[faces[(0, True)]][lab[faces[(0, True)]] >= 0]).tolist())
        cross1 = set(np.intersect1d(
            lab[faces[(1, False)]][lab[faces[(1, False)]] >= 0],
            lab[faces[(1, True)]][lab[faces[(1, True)]] >= 0]).tolist())
        both = cross0 & cross1
        if not both:
            return False
        counts = np.bincount(lab[lab >= 0], minlength=geo.n_sites)
        chosen = min(sorted(both), key=lambda c: (-counts[c], c))
        has_chosen[b] = True
        for key, ids in faces.items():
            masks[key][b] = lab[ids] == chosen
        return True

    _run_trials(n_blocks, one, threads)
    return has_chosen, masks


@dataclass
class BlockSizeResult:
    kind: str
    p_site: float
    p_bond: float
    L: int
    target_prob: float
    k: int
    table: list[dict] = field(default_factory=list)

    def __int__(self) -> int:
        return self.k


def block_size_search(kind: str, p_site: float, p_bond: float, L: int,
                      target_prob: float, trials: int, *, n_blocks: int | None = None,
                      seed: int = 0, k_max: int = 64, threads: int = 1) -> BlockSizeResult:
    """Smallest k whose populated-lattice success rate reaches ``target_prob``.

    ``trials`` populated renormalized lattices are assembled per k from a pool
    of ``n_blocks`` pre-generated blocks (default 10x trials).  Linear search
    k = 1, 2, ...; raises BlockSizeSearchError past ``k_max``.
    """
    if not (0.0 < target_prob < 1.0):
        raise ValueError("target_prob must lie in (0, 1)")
    if not (0.0 <= p_site <= 1.0 and 0.0 <= p_bond <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if n_blocks is None:
        n_blocks = 10 * trials
    table: list[dict] = []
    for k in range(1, k_max + 1):
        has_chosen, masks = _build_pool(kind, k, p_site, p_bond, n_blocks, seed, threads)
        pat0 = _seam_pattern(kind, k, 0)
        pat1 = _seam_pattern(kind, k, 1)

        def trial(t: int) -> bool:
            # each trial owns its stream, so early exits stay reproducible
            rng = stream(seed, "assemble", kind, k, t)
            grid = rng.integers(0, n_blocks, size=(L, L))
            if not has_chosen[grid].all():
                return False
            for i in range(L):
                for j in range(L):
                    if i + 1 < L:
                        u = rng.random(len(pat0[0]), dtype=np.float32)
                        a, b = grid[i, j], grid[i + 1, j]
                        eff = ((u < p_bond)
                               & masks[(0, True)][a][pat0[0]]
                               & masks[(0, False)][b][pat0[1]])
                        if not eff.any():
                            return False
                    if j + 1 < L:
                        u = rng.random(len(pat1[0]), dtype=np.float32)
                        a, b = grid[i, j], grid[i, j + 1]
                        eff = ((u < p_bond)
                               & masks[(1, True)][a][pat1[0]]
                               & masks[(1, False)][b][pat1[1]])
                        if not eff.any():
                            return False
            return True

        hits = _run_trials(trials, trial, threads)
        est = MCEstimate(hits, trials)
        table.append({"k": k, "trials": trials, "hits": hits,
                      "estimate": est.estimate, "ci95": est.ci95})
        if est.estimate >= target_prob:
            return BlockSizeResult(kind, p_site, p_bond, L, target_prob, k, table)
    raise BlockSizeSearchError(k_max, table)


def find_block_size(kind: str, p_site: float, p_bond: float, L: int,
                    target_prob: float, trials: int, **kw) -> int:
    """Spec'd entry point: the found k only (see block_size_search for the table)."""
    return block_size_search(kind, p_site, p_bond, L, target_prob, trials, **kw).k
