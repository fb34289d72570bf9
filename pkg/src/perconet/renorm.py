"""Renormalize percolated samples to brick-wall (hexagonal) cluster graphs.

Two pipelines reduce an open-bond sample to a hexagonal graph state on an
L x L grid of renormalized sites:

* ``fixedBlock``: tile the sample into blocks of edge ``2k``, pick one
  spanning cluster per block, route paths between designated mid qubits and
  measure everything else out (deep supercritical regime; ``k`` comes from
  ``find_block_size``).
* ``supercritical``: trace wall-hugging crossing paths in a plain 2d sample
  and keep a brick-wall subset of path segments (see ``walls``).

Both return an ``ExtractionResult`` whose measurement schedule, replayed
through the graph-rewrite rules, reproduces ``renormalized_graph`` exactly;
the reported graph is produced by applying the schedule, so soundness holds
by construction rather than by a separate proof.

Success is checked topologically: after suppressing degree-2 vertices the
result must equal the target brick-wall graph as a labelled multigraph.
Suppression is genuinely a multigraph operation; a fully interior hexagon
whose boundary carries a single junction suppresses to a self-loop, and the
open boundary leaves pendant runs, so the comparison tracks run multiplicity,
self-loops, pendant tips and floating cycles explicitly.
"""

from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .graphstate import GraphState, MeasurementSchedule
from .lattice import Block, Lattice, a_block, geometry
from .percolation import PercolationSample, _region_face_sets, region_labels

__all__ = [
    "ExtractionError", "ExtractionResult", "PathPlan", "ReductionPlan",
    "BlockPlanState", "sample_graph", "select_mid_qubit", "bfs_labels",
    "connect_blocks", "reduce_to_hexagonal", "suppressed_form",
    "hexagonal_target_form", "hexagonal_topology_matches", "extract",
]


class ExtractionError(Exception):
    """Extraction failed at a named stage; ``details`` carries diagnostics."""

    def __init__(self, stage: str, **details):
        super().__init__(f"extraction failed at stage {stage!r}" +
                         (f": {details}" if details else ""))
        self.stage = stage
        self.details = details


# -- sample graph -------------------------------------------------------------

def sample_graph(s: PercolationSample) -> GraphState:
    """The cluster state of a sample: occupied sites, open bonds as edges."""
    geo = s.geometry
    occ = s.occupied_sites
    keep = s.open_bonds & occ[geo.bonds[:, 0]] & occ[geo.bonds[:, 1]]
    verts = np.nonzero(occ)[0].tolist()
    edges = [(int(a), int(b)) for a, b in geo.bonds[keep]]
    return GraphState(verts, edges)


# -- degree-2 suppression and the target form ---------------------------------

def _label_key(x):
    return repr(x)


def suppressed_form(adj: dict, labels: dict) -> tuple:
    """Canonical labelled multigraph after suppressing degree-2 vertices.

    ``adj`` maps vertex -> set of neighbors.  Vertices of degree != 2 are
    junction-like and survive; each maximal run of degree-2 vertices between
    them becomes one edge (self-loops allowed).  Returns
    (run Counter, isolated-vertex Counter, floating-cycle count); vertices
    without a label get a private fallback so they never match a real one.
    """
    junctions = {v for v, nb in adj.items() if len(nb) != 2}
    runs = Counter()
    seen = set()
    covered = set()
    for j in sorted(junctions):
        for nb in sorted(adj[j]):
            if (j, nb) in seen:
                continue
            seen.add((j, nb))
            prev, cur = j, nb
            while cur not in junctions:
                covered.add(cur)
                (nxt,) = adj[cur] - {prev}
                seen.add((cur, nxt))
                prev, cur = cur, nxt
            seen.add((cur, prev))
            la = labels.get(j, ("?", j))
            lb = labels.get(cur, ("?", cur))
            runs[tuple(sorted((la, lb), key=_label_key))] += 1
    isolated = Counter(labels.get(v, ("?", v))
                       for v, nb in adj.items() if not nb)
    floating = 0
    pool = {v for v, nb in adj.items() if len(nb) == 2} - covered
    pool -= junctions
    while pool:
        start = min(pool)
        prev, cur = None, start
        while True:
            pool.discard(cur)
            nxt = min(adj[cur] - ({prev} if prev is not None else set()))
            prev, cur = cur, nxt
            if cur == start:
                break
        floating += 1
    return runs, isolated, floating


@lru_cache(maxsize=16)
def hexagonal_target_form(L: int) -> tuple:
    """Suppressed form of the L x L brick-wall graph, labelled by (i, j)."""
    geo = geometry(Lattice("hexagonal", (L, L)))
    adj = {v: set() for v in range(geo.n_sites)}
    for a, b in geo.bonds:
        adj[int(a)].add(int(b))
        adj[int(b)].add(int(a))
    labels = {v: tuple(int(c) for c in geo.coords[v]) for v in adj}
    return suppressed_form(adj, labels)


def _graph_adj(graph: GraphState) -> dict:
    return {v: set(graph.neighbors(v)) for v in graph.vertices}


def hexagonal_topology_matches(graph: GraphState, L: int, labels: dict) -> bool:
    """Does ``graph`` suppress to the L x L brick-wall multigraph?

    ``labels`` maps the surviving junction/tip vertices to their renormalized
    (i, j) coordinates; any unlabelled junction makes the check fail.
    """
    return suppressed_form(_graph_adj(graph), labels) == hexagonal_target_form(L)


# -- plans and results ---------------------------------------------------------

@dataclass
class PathPlan:
    """Routing choices made by the fixed-block pipeline."""

    mid_qubits: dict          # block index -> site id
    inter_block_paths: dict   # (index_a, index_b) -> tuple of site ids
    chosen_cluster: dict      # block index -> cluster label (global site id)


@dataclass
class ReductionPlan:
    """What to keep, which edges the kept set must induce, and the labels."""

    target_l: int
    kept: frozenset
    designed_edges: frozenset   # of (a, b) sorted tuples
    labels: dict                # site id -> (i, j)
    path_plan: PathPlan | None = None


@dataclass
class ExtractionResult:
    renormalized_graph: GraphState
    schedule: MeasurementSchedule
    stats: dict
    path_plan: PathPlan | None = None


# -- reduction: Z-cuts, triangle eliminations, Y-shrinks -----------------------

def reduce_to_hexagonal(g: GraphState, plan: ReductionPlan) -> ExtractionResult:
    """Measure everything outside the plan in Z, then shrink paths with Y.

    The schedule is recorded while the reduction is carried out on a mutable
    adjacency, mirroring the graph-rewrite rules step by step.  Degree-2
    vertices whose neighbors are adjacent are shrink remnants of cycles and
    stay (a hexagon with one junction bottoms out as a triangle); triangles
    whose three corners all carry arms are junction artifacts and get one
    Y-elimination, which never fires on bipartite samples.
    """
    t0 = time.perf_counter()
    kept = set(plan.kept)
    stray = kept - g.vertices
    if stray:
        raise ExtractionError("plan", missing_vertices=sorted(stray)[:8])
    adj = {v: set(g.neighbors(v)) & kept for v in kept}
    induced = {(min(a, b), max(a, b)) for a in adj for b in adj[a]}
    designed = set(plan.designed_edges)
    if induced != designed:
        raise ExtractionError("chords",
                              extra=sorted(induced - designed)[:8],
                              missing=sorted(designed - induced)[:8])
    steps = [(v, "Z") for v in sorted(g.vertices - kept)]
    n_z = len(steps)

    def _measure_y(v):
        nbs = adj.pop(v)
        for u in nbs:
            adj[u].discard(v)
        nbl = sorted(nbs)
        for i, a in enumerate(nbl):
            for b in nbl[i + 1:]:
                if b in adj[a]:
                    adj[a].discard(b)
                    adj[b].discard(a)
                else:
                    adj[a].add(b)
                    adj[b].add(a)
        steps.append((v, "Y"))

    # junction-artifact triangles first (all three corners of degree >= 3)
    while True:
        tri = None
        for v in sorted(adj):
            if len(adj[v]) < 3:
                continue
            nbl = sorted(adj[v])
            for i, a in enumerate(nbl):
                if len(adj[a]) < 3:
                    continue
                for b in nbl[i + 1:]:
                    if b in adj[a] and len(adj[b]) >= 3:
                        tri = min(v, a, b)
                        break
                if tri is not None:
                    break
            if tri is not None:
                break
        if tri is None:
            break
        _measure_y(tri)

    # shrink every degree-2 vertex whose neighbors are not yet adjacent
    changed = True
    while changed:
        changed = False
        for v in sorted(adj):
            if len(adj[v]) != 2:
                continue
            a, b = sorted(adj[v])
            if b in adj[a]:
                continue
            _measure_y(v)
            changed = True
            break

    result = GraphState._from_adj({v: frozenset(nb) for v, nb in adj.items()})
    schedule = MeasurementSchedule(tuple(steps))
    form = suppressed_form({v: set(nb) for v, nb in adj.items()}, plan.labels)
    target = hexagonal_target_form(plan.target_l)
    if form != target:
        raise ExtractionError("topology",
                              got_runs=sorted(form[0].items(), key=repr)[:12],
                              want_runs=sorted(target[0].items(), key=repr)[:12])
    stats = {
        "sites_total": g.n_vertices,
        "kept_sites": len(kept),
        "measured_z": n_z,
        "measured_y": len(steps) - n_z,
        "stage_seconds": {"reduce": time.perf_counter() - t0},
    }
    return ExtractionResult(result, schedule, stats, plan.path_plan)


# -- fixed-block pipeline ------------------------------------------------------

@dataclass
class _BlockSolve:
    block: Block
    chosen: int
    mid: int
    dists: dict      # site id -> BFS distance from mid within the block
    in_region: np.ndarray


@dataclass
class BlockPlanState:
    """Per-block crossing clusters, mid qubits and BFS labels for routing."""

    sample: PercolationSample
    L: int
    k: int
    blocks: dict = field(default_factory=dict)   # (x1, x2) -> _BlockSolve


def _region_label_map(s: PercolationSample, lo, hi):
    site_ids, labels = region_labels(s, lo, hi)
    return site_ids, dict(zip(site_ids.tolist(), labels.tolist()))


def _crossing_both_axes(s, lo, hi, site_ids, label_of):
    geo = s.geometry
    out = None
    for axis in (0, 1):
        fa, fb = _region_face_sets(geo, lo, hi, axis)
        la = {label_of[int(v)] for v in fa if label_of[int(v)] >= 0}
        lb = {label_of[int(v)] for v in fb if label_of[int(v)] >= 0}
        both = la & lb
        out = both if out is None else (out & both)
    return out


def _pick_mid(geo, cand_ids: np.ndarray, lo, hi) -> int:
    coords = geo.coords[cand_ids].astype(np.float64)
    center = (np.asarray(lo, dtype=np.float64) + np.asarray(hi)) / 2.0
    cheb = np.abs(coords - center).max(axis=1)
    keys = tuple(coords[:, ax] for ax in range(coords.shape[1] - 1, -1, -1))
    order = np.lexsort(keys + (cheb,))
    return int(cand_ids[order[0]])


def _open_neighbors(s, sid):
    geo = s.geometry
    lo, hi = geo.indptr[sid], geo.indptr[sid + 1]
    for v, b in zip(geo.nbr_sites[lo:hi], geo.nbr_bonds[lo:hi]):
        if s.open_bonds[b] and s.occupied_sites[v]:
            yield int(v)


def _bfs_in_region(s, in_region, mid) -> dict:
    dists = {mid: 0}
    q = deque([mid])
    while q:
        u = q.popleft()
        du = dists[u]
        for v in _open_neighbors(s, u):
            if in_region[v] and v not in dists:
                dists[v] = du + 1
                q.append(v)
    return dists


def _solve_block(s: PercolationSample, index, k) -> _BlockSolve:
    d = s.lattice.ndim
    blk = a_block((2 * index[0], 2 * index[1]), k, d)
    geo = s.geometry
    site_ids, label_of = _region_label_map(s, blk.lo, blk.hi)
    crossing = _crossing_both_axes(s, blk.lo, blk.hi, site_ids, label_of)
    if not crossing:
        raise ExtractionError("block-crossing", block=index)
    counts = Counter(l for l in label_of.values() if l in crossing)
    chosen = min(crossing, key=lambda c: (-counts[c], c))
    cand = np.array([sid for sid in site_ids.tolist() if label_of[sid] == chosen],
                    dtype=np.int64)
    mid = _pick_mid(geo, cand, blk.lo, blk.hi)
    in_region = np.zeros(geo.n_sites, dtype=bool)
    in_region[site_ids] = True
    dists = _bfs_in_region(s, in_region, mid)
    return _BlockSolve(blk, chosen, mid, dists, in_region)


def select_mid_qubit(labeling, block: Block, axes=(0,)) -> int:
    """Site of the largest crossing cluster nearest the block center.

    Crossing is evaluated on the induced subgraph of the block along each of
    ``axes`` (the pipeline uses both in-plane axes); largest cluster wins,
    ties go to the smallest canonical label, and nearest is Chebyshev
    distance with lexicographic coordinate tie-break.
    """
    s = labeling.sample
    geo = s.geometry
    site_ids, label_of = _region_label_map(s, block.lo, block.hi)
    crossing = None
    for axis in axes:
        fa, fb = _region_face_sets(geo, block.lo, block.hi, axis)
        la = {label_of[int(v)] for v in fa if label_of[int(v)] >= 0}
        lb = {label_of[int(v)] for v in fb if label_of[int(v)] >= 0}
        both = la & lb
        crossing = both if crossing is None else (crossing & both)
    if not crossing:
        raise ExtractionError("block-crossing", block=block.index)
    counts = Counter(l for l in label_of.values() if l in crossing)
    chosen = min(crossing, key=lambda c: (-counts[c], c))
    cand = np.array([sid for sid in site_ids.tolist() if label_of[sid] == chosen],
                    dtype=np.int64)
    return _pick_mid(geo, cand, block.lo, block.hi)


def bfs_labels(labeling, block: Block, mid: int) -> dict:
    """BFS distance from ``mid`` over open bonds inside the block.

    Sites not reachable within the block are absent from the result.
    """
    s = labeling.sample
    geo = s.geometry
    site_ids, _ = _region_label_map(s, block.lo, block.hi)
    in_region = np.zeros(geo.n_sites, dtype=bool)
    in_region[site_ids] = True
    return _bfs_in_region(s, in_region, mid)


def _walk_down(s, solve: _BlockSolve, start: int) -> list:
    """Descending-distance walk from ``start`` to the block mid qubit."""
    geo = s.geometry
    path = [start]
    d = solve.dists[start]
    cur = start
    while d > 0:
        best = None
        for v in _open_neighbors(s, cur):
            if solve.in_region[v] and solve.dists.get(v) == d - 1:
                key = tuple(int(c) for c in geo.coords[v])
                if best is None or key < best[0]:
                    best = (key, v)
        cur = best[1]
        path.append(cur)
        d -= 1
    return path


def _seam_candidates(s, state: BlockPlanState, a_idx, b_idx) -> list:
    """Open bonds between the chosen clusters of two adjacent blocks."""
    geo = s.geometry
    sa, sb = state.blocks[a_idx], state.blocks[b_idx]
    diff = [i for i in range(2) if a_idx[i] != b_idx[i]]
    if len(diff) != 1 or abs(a_idx[diff[0]] - b_idx[diff[0]]) != 1:
        raise ValueError(f"blocks {a_idx} and {b_idx} are not adjacent")
    axis = diff[0]
    if a_idx[axis] > b_idx[axis]:
        sa, sb = sb, sa
        a_idx, b_idx = b_idx, a_idx
    lo_f = list(sa.block.lo)
    hi_f = list(sa.block.hi)
    lo_f[axis] = hi_f[axis]
    from .lattice import block_site_ids
    face = block_site_ids(geo, tuple(lo_f), tuple(hi_f))
    out = []
    for u in face.tolist():
        if sa.dists.get(u) is None:
            continue
        lo_i, hi_i = geo.indptr[u], geo.indptr[u + 1]
        for v, b in zip(geo.nbr_sites[lo_i:hi_i], geo.nbr_bonds[lo_i:hi_i]):
            v = int(v)
            if (s.open_bonds[b] and s.occupied_sites[v]
                    and sb.in_region[v] and sb.dists.get(v) is not None):
                out.append((u, v))
    return out


def _best_seam_bond(geo, sa, sb, candidates):
    def key(uv):
        u, v = uv
        return (sa.dists[u] + sb.dists[v],
                tuple(int(c) for c in geo.coords[u]),
                tuple(int(c) for c in geo.coords[v]))
    return min(candidates, key=key)


def connect_blocks(state: BlockPlanState, a_idx, b_idx) -> tuple:
    """Composite path mid(a) .. s1, s2 .. mid(b) across the shared face.

    The seam bond (s1, s2) minimizes the summed BFS distances to the two mid
    qubits; each half is the descending-distance walk, so different paths
    into the same block merge and stay merged.
    """
    s = state.sample
    geo = s.geometry
    cands = _seam_candidates(s, state, a_idx, b_idx)
    if not cands:
        raise ExtractionError("pair-connection", pair=(a_idx, b_idx))
    swapped = False
    diff = [i for i in range(2) if a_idx[i] != b_idx[i]][0]
    if a_idx[diff] > b_idx[diff]:
        swapped = True
        a_idx, b_idx = b_idx, a_idx
    sa, sb = state.blocks[a_idx], state.blocks[b_idx]
    s1, s2 = _best_seam_bond(geo, sa, sb, cands)
    half_a = _walk_down(s, sa, s1)
    half_b = _walk_down(s, sb, s2)
    path = list(reversed(half_a)) + half_b
    if swapped:
        path.reverse()
    return tuple(path)


def _leaf_prune(adj: dict, kept: set, terminals: set):
    changed = True
    while changed:
        changed = False
        for v in sorted(kept - terminals):
            if len(adj[v] & kept) <= 1:
                kept.discard(v)
                changed = True


def _find_cycle(adj: dict, kept: set):
    """One cycle of the induced graph on ``kept``, or None."""
    seen = set()
    for root in sorted(kept):
        if root in seen:
            continue
        parent = {root: None}
        stack = [root]
        seen.add(root)
        while stack:
            u = stack.pop()
            for v in sorted(adj[u] & kept):
                if v == parent[u]:
                    continue
                if v in parent:
                    # walk both endpoints up to the common ancestor
                    pa = [u]
                    while pa[-1] is not None:
                        pa.append(parent[pa[-1]])
                    anc = set(pa)
                    cyc = [v]
                    while cyc[-1] not in anc:
                        cyc.append(parent[cyc[-1]])
                    join = cyc[-1]
                    cycize = pa[:pa.index(join) + 1]
                    return cyc + cycize[:-1]
                parent[v] = u
                stack.append(v)
                seen.add(v)
    return None


def _terminals_connected(adj, kept, terminals):
    terms = sorted(terminals)
    if len(terms) <= 1:
        return True
    seen = {terms[0]}
    q = deque(seen)
    while q:
        u = q.popleft()
        for v in adj[u] & kept:
            if v not in seen:
                seen.add(v)
                q.append(v)
    return all(t in seen for t in terms)


def _prune_block_tree(s, solve: _BlockSolve, kept: set, terminals: set):
    """Shrink ``kept`` to an induced tree containing the terminals."""
    geo = s.geometry
    adj = {v: set(u for u in _open_neighbors(s, v) if solve.in_region[u])
           for v in kept}
    for v in kept:
        adj[v] &= kept
    for v in kept:
        for u in adj[v]:
            adj[u].add(v)
    _leaf_prune(adj, kept, terminals)
    while True:
        cyc = _find_cycle(adj, kept)
        if cyc is None:
            break
        removed = False
        for v in sorted(cyc, key=lambda x: tuple(int(c) for c in geo.coords[x])):
            if v in terminals:
                continue
            trial = kept - {v}
            if _terminals_connected(adj, trial, terminals):
                kept.discard(v)
                _leaf_prune(adj, kept, terminals)
                removed = True
                break
        if not removed:
            raise ExtractionError("block-prune", block=solve.block.index)
    if not _terminals_connected(adj, kept, terminals):
        raise ExtractionError("block-prune", block=solve.block.index)


def _extract_fixed_block(s: PercolationSample, L: int, k: int) -> ExtractionResult:
    t0 = time.perf_counter()
    lat = s.lattice
    d = lat.ndim
    want = (2 * k * L, 2 * k * L) + (2 * k,) * (d - 2)
    if lat.kind != "square" or tuple(lat.dims) != want:
        raise ExtractionError("layout", expected=want, got=tuple(lat.dims),
                              kind=lat.kind)
    geo = s.geometry
    state = BlockPlanState(s, L, k)
    for x1 in range(1, L + 1):
        for x2 in range(1, L + 1):
            state.blocks[(x1, x2)] = _solve_block(s, (x1, x2), k)
    t_blocks = time.perf_counter()

    pairs = []
    for x1 in range(1, L + 1):
        for x2 in range(1, L + 1):
            if x1 + 1 <= L:
                pairs.append(((x1, x2), (x1 + 1, x2)))
            if x2 + 1 <= L:
                pairs.append(((x1, x2), (x1, x2 + 1)))
    seam = {}
    for a, b in pairs:
        cands = _seam_candidates(s, state, a, b)
        if not cands:
            raise ExtractionError("pair-connection", pair=(a, b))
        seam[(a, b)] = cands
    routed = [(a, b) for a, b in pairs
              if a[1] == b[1] or (a[0] + a[1]) % 2 == 0]

    designated = {}
    plan_paths = {}
    for a, b in routed:
        sa, sb = state.blocks[a], state.blocks[b]
        designated[(a, b)] = _best_seam_bond(geo, sa, sb, seam[(a, b)])
        plan_paths[(a, b)] = connect_blocks(state, a, b)

    def rebuild(block_terms):
        kept = {}
        for idx, solve in state.blocks.items():
            terms = block_terms.get(idx, set())
            sites = set()
            for t in terms:
                sites.update(_walk_down(s, solve, t))
            if not terms:
                sites = {solve.mid}
            kept[idx] = sites
            _prune_block_tree(s, solve, sites, terms)
        return kept

    def terms_of(desig):
        out = {idx: set() for idx in state.blocks}
        for (a, b), (u, v) in desig.items():
            out[a].add(u)
            out[b].add(v)
        return out

    kept_b = rebuild(terms_of(designated))
    # seam-chord repair: every open bond between two kept sets must be the
    # designated one; extra bonds on routed seams force a re-designation and
    # re-prune, extras on unrouted seams are irreducible.
    for _round in range(50):
        extras = False
        for a, b in pairs:
            hot = [(u, v) for u, v in seam[(a, b)]
                   if u in kept_b[a] and v in kept_b[b]]
            if (a, b) in designated:
                if len(hot) > 1 or (hot and hot[0] != designated[(a, b)]):
                    sa, sb = state.blocks[a], state.blocks[b]
                    designated[(a, b)] = _best_seam_bond(geo, sa, sb, hot)
                    extras = True
            elif hot:
                raise ExtractionError("seam-chord", pair=(a, b),
                                      bonds=hot[:4])
        if not extras:
            break
        new_kept = rebuild(terms_of(designated))
        if new_kept == kept_b:
            raise ExtractionError("seam-chord", detail="irreducible")
        kept_b = new_kept
    else:
        raise ExtractionError("seam-chord", detail="repair did not settle")

    kept = set().union(*kept_b.values())
    designed = set()
    for idx, sites in kept_b.items():
        for v in sites:
            for u in _open_neighbors(s, v):
                if u in sites:
                    designed.add((min(u, v), max(u, v)))
    for (u, v) in designated.values():
        designed.add((min(u, v), max(u, v)))

    degree = Counter()
    for a, b in designed:
        degree[a] += 1
        degree[b] += 1
    labels = {}
    for idx, sites in kept_b.items():
        junctions = [v for v in sorted(sites) if degree[v] != 2]
        if len(junctions) > 1:
            raise ExtractionError("junctions", block=idx, sites=junctions)
        if junctions:
            labels[junctions[0]] = idx
    if L == 1:
        only = state.blocks[(1, 1)]
        kept = {only.mid}
        designed = set()
        labels = {only.mid: (1, 1)}

    plan = ReductionPlan(
        target_l=L,
        kept=frozenset(kept),
        designed_edges=frozenset(designed),
        labels=labels,
        path_plan=PathPlan(
            mid_qubits={idx: sv.mid for idx, sv in state.blocks.items()},
            inter_block_paths=plan_paths,
            chosen_cluster={idx: sv.chosen for idx, sv in state.blocks.items()},
        ),
    )
    t_route = time.perf_counter()
    result = reduce_to_hexagonal(sample_graph(s), plan)
    result.stats["pipeline"] = "fixedBlock"
    result.stats["k"] = k
    result.stats["L"] = L
    result.stats["sites_consumed"] = geo.n_sites
    result.stats["stage_seconds"]["blocks"] = t_blocks - t0
    result.stats["stage_seconds"]["routing"] = t_route - t_blocks
    return result


# -- dispatcher ----------------------------------------------------------------

def extract(s: PercolationSample, target=None, **kw) -> ExtractionResult:
    """Run one extraction pipeline against a sample.

    ``target`` is a mapping with keys ``L``, ``pipeline`` ("fixedBlock" or
    "supercritical") and, for fixedBlock, the block half-width ``k``; the
    same keys may be passed as keywords.  Raises ExtractionError (carrying
    the failed stage and diagnostics) when the sample does not support the
    target.
    """
    cfg = dict(target or {})
    cfg.update(kw)
    if "L" not in cfg:
        raise ValueError("target must define L")
    L = int(cfg["L"])
    pipeline = cfg.get("pipeline", "supercritical")
    if pipeline == "fixedBlock":
        if cfg.get("k") is None:
            raise ValueError("fixedBlock target must define k")
        return _extract_fixed_block(s, L, int(cfg["k"]))
    if pipeline == "supercritical":
        from .walls import extract_supercritical
        return extract_supercritical(s, L)
    raise ValueError(f"unknown pipeline {pipeline!r}")
