"""Wall-hugging crossing paths and the supercritical 2d extraction pipeline.

``wall_follower`` traces the crossing path that hugs one wall of a 2d square
sample: a depth-first walk that always tries to turn toward the wall first,
so the first path found from the wall-most start site is the extremal one.
Passing the previously found path (with a minimum gap) yields the next path
beyond it; repeated calls enumerate a nested, site-disjoint family.

``extract_supercritical`` builds L horizontal paths (gap >= 3, so adjacent
rows share no bond and every junction is an honest T), a west-to-east family
of vertical paths thinned to every third, and keeps one bridge segment per
(column, row-gap) pair in brick-wall parity.  Bridge anchors are then pulled
tight: a bridge site adjacent to its row beyond the anchor re-anchors the
bridge, and a bridge site adjacent to several row sites reroutes the row
through it (T-junction at the abutment).  Anything irreducible rejects the
sample; the caller sees ExtractionError with the failed stage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .lattice import geometry
from .percolation import PercolationSample
from .renorm import (ExtractionError, PathPlan, ReductionPlan, _open_neighbors,
                     reduce_to_hexagonal, sample_graph)

__all__ = ["wall_follower", "shortcut_path", "extract_supercritical"]

_E, _N, _W, _S = (1, 0), (0, 1), (-1, 0), (0, -1)
_RIGHT = {_E: _S, _S: _W, _W: _N, _N: _E}
_LEFT = {v: k for k, v in _RIGHT.items()}

# hugged wall -> (initial heading, start face (axis, value-index), goal)
_SIDES = {
    "south": (_E, 0, "lo", 0, "hi"),
    "north": (_W, 0, "hi", 0, "lo"),
    "east": (_N, 1, "lo", 1, "hi"),
    "west": (_S, 1, "hi", 1, "lo"),
}


def _dilate(s: PercolationSample, path, radius: int) -> np.ndarray:
    """Sites within ``radius`` lattice steps of ``path`` (geometric, not open)."""
    geo = s.geometry
    out = np.zeros(geo.n_sites, dtype=bool)
    if not path:
        return out
    frontier = [int(v) for v in path]
    out[frontier] = True
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for v in geo.nbr_sites[geo.indptr[u]:geo.indptr[u + 1]]:
                if not out[v]:
                    out[v] = True
                    nxt.append(int(v))
        frontier = nxt
    return out


def _block_wall_side(s, blocked, wall_ax, wall_val):
    """Flood-fill the wall side of the blocked barrier and block it too.

    A crossing path cuts the rectangle in two; without this, the strip
    between the wall and the previous path would open up again once the
    dilation radius is passed.
    """
    geo = s.geometry
    frontier = [v for v in range(geo.n_sites)
                if geo.coords[v][wall_ax] == wall_val and not blocked[v]]
    blocked[frontier] = True
    while frontier:
        nxt = []
        for u in frontier:
            for v in geo.nbr_sites[geo.indptr[u]:geo.indptr[u + 1]]:
                if not blocked[v]:
                    blocked[v] = True
                    nxt.append(int(v))
        frontier = nxt


def _step(s, geo, dims, sid, delta):
    x, y = geo.coords[sid]
    tx, ty = int(x) + delta[0], int(y) + delta[1]
    if not (1 <= tx <= dims[0] and 1 <= ty <= dims[1]):
        return None
    tid = (tx - 1) * dims[1] + (ty - 1)
    lo, hi = geo.indptr[sid], geo.indptr[sid + 1]
    for v, b in zip(geo.nbr_sites[lo:hi], geo.nbr_bonds[lo:hi]):
        if v == tid:
            if s.open_bonds[b] and s.occupied_sites[tid]:
                return int(tid)
            return None
    return None


def wall_follower(s: PercolationSample, side: str, previous_path=None,
                  min_gap: int = 1):
    """Extremal open crossing path hugging ``side``, or None.

    ``side`` names the hugged wall ("south"/"north" cross west-east,
    "east"/"west" cross south-north).  Sites within ``min_gap - 1`` steps of
    ``previous_path`` are blocked, so successive calls walk away from the
    wall; with min_gap = 3 consecutive paths share no bond.  Returns a tuple
    of site ids (loop-free, not necessarily chord-free) in crossing order.
    """
    lat = s.lattice
    if lat.kind != "square" or lat.ndim != 2:
        raise ValueError("wall_follower needs a 2d square sample")
    if side not in _SIDES:
        raise ValueError(f"side must be one of {sorted(_SIDES)}")
    geo = geometry(lat)
    dims = lat.dims
    heading0, start_ax, start_end, goal_ax, goal_end = _SIDES[side]
    start_val = 1 if start_end == "lo" else dims[start_ax]
    goal_val = 1 if goal_end == "lo" else dims[goal_ax]
    wall_ax = 1 - start_ax
    wall_low = side in ("south", "west")
    blocked = _dilate(s, previous_path, max(0, min_gap - 1))
    if previous_path:
        _block_wall_side(s, blocked, wall_ax, 1 if wall_low else dims[wall_ax])

    starts = [v for v in range(geo.n_sites)
              if geo.coords[v][start_ax] == start_val]
    # nearest-the-wall first; the wall is on the right of the heading
    starts.sort(key=lambda v: geo.coords[v][wall_ax],
                reverse=not wall_low)

    visited = set()
    for s0 in starts:
        if blocked[s0] or not s.occupied_sites[s0] or s0 in visited:
            continue
        if geo.coords[s0][goal_ax] == goal_val:
            return (s0,)
        visited.add(s0)
        path = [s0]
        heads = [heading0]
        iters = [None]
        while path:
            cur = path[-1]
            h = heads[-1]
            if iters[-1] is None:
                cands = []
                for d in (_RIGHT[h], h, _LEFT[h]):
                    v = _step(s, geo, dims, cur, d)
                    if v is not None and not blocked[v]:
                        cands.append((v, d))
                iters[-1] = iter(cands)
            moved = False
            for v, d in iters[-1]:
                if v in visited:
                    continue
                visited.add(v)
                path.append(v)
                heads.append(d)
                iters.append(None)
                if geo.coords[v][goal_ax] == goal_val:
                    return tuple(path)
                moved = True
                break
            if not moved:
                path.pop()
                heads.pop()
                iters.pop()
    return None


def shortcut_path(s: PercolationSample, path) -> tuple:
    """Chord-free subpath with the same endpoints.

    Greedily jumps to the farthest open-adjacent successor, so no two
    non-consecutive sites of the result share an open bond.
    """
    path = list(path)
    pos = {site: i for i, site in enumerate(path)}
    out = [path[0]]
    i = 0
    while i < len(path) - 1:
        best = i + 1
        for v in _open_neighbors(s, path[i]):
            j = pos.get(v)
            if j is not None and j > best:
                best = j
        out.append(path[best])
        i = best
    return tuple(out)


# -- bridge machinery ----------------------------------------------------------

def _derive_bridges(columns, rows, L):
    row_of = {}
    for j, r in enumerate(rows, start=1):
        for site in r:
            if site in row_of:
                raise ExtractionError("rows-collide", site=int(site))
            row_of[site] = j
    bridges = {}
    for i, col in enumerate(columns, start=1):
        contacts = [(t, row_of[site]) for t, site in enumerate(col)
                    if site in row_of]
        need = {g for g in range(1, L) if (i + g) % 2 == 0}
        got = {}
        for (ta, ja), (tb, jb) in zip(contacts, contacts[1:]):
            if jb == ja + 1 and ja in need and ja not in got:
                got[ja] = list(col[ta:tb + 1])
            elif jb == ja - 1 and jb in need and jb not in got:
                got[jb] = list(reversed(col[ta:tb + 1]))
        missing = need - set(got)
        if missing:
            raise ExtractionError("bridge", column=i, gaps=sorted(missing))
        for g, seg in got.items():
            bridges[(i, g)] = seg
    return bridges


@dataclass
class _Reroute:
    row: int        # 1-based row index
    new_row: list


def _fix_bridge(s, seg, row_lists, g, other_sets):
    """Tighten one bridge; returns (seg, None) or (seg, _Reroute).

    Re-anchors while an interior site still touches row g or g+1 beyond the
    anchor bond; an interior site touching several row sites becomes a row
    T-junction via a reroute (handled by the caller, which restarts).
    Interior adjacency to any other row is an irreducible chord.
    """
    row_lo, row_hi = row_lists[g - 1], row_lists[g]
    set_lo, set_hi = set(row_lo), set(row_hi)
    for _ in range(200):
        n = len(seg)
        hit = None
        for t in range(n - 2, 0, -1):
            hs = [h for h in _open_neighbors(s, seg[t])
                  if h in set_lo and not (t == 1 and h == seg[0])]
            if hs:
                hit = (t, hs, True)
                break
        if hit is None:
            for t in range(1, n - 1):
                hs = [h for h in _open_neighbors(s, seg[t])
                      if h in set_hi and not (t == n - 2 and h == seg[-1])]
                if hs:
                    hit = (t, hs, False)
                    break
        if hit is None:
            for t in range(1, n - 1):
                for h in _open_neighbors(s, seg[t]):
                    if any(h in o for o in other_sets):
                        raise ExtractionError("bridge-chord", gap=g,
                                              site=int(seg[t]))
            return seg, None
        t, hs, low_end = hit
        row_list = row_lo if low_end else row_hi
        anchor = seg[0] if low_end else seg[-1]
        edge_t = 1 if low_end else n - 2
        if len(hs) == 1 and t != edge_t:
            if low_end:
                seg = [hs[0]] + seg[t:]
            else:
                seg = seg[:t + 1] + [hs[0]]
            continue
        # abutment: seg[t] touches several row sites (the old anchor counts
        # when t sits right at the bridge end); reroute the row through it
        contact = set(hs)
        if t == edge_t:
            contact.add(anchor)
        idxs = sorted(row_list.index(h) for h in contact)
        new_row = row_list[:idxs[0] + 1] + [seg[t]] + row_list[idxs[-1]:]
        return seg, _Reroute(g if low_end else g + 1, new_row)
    raise ExtractionError("bridge-fix-unstable", gap=g)


# -- the pipeline ---------------------------------------------------------------

def extract_supercritical(s: PercolationSample, L: int):
    """Renormalize a plain 2d square sample to the L x L brick-wall graph."""
    lat = s.lattice
    if lat.kind != "square" or lat.ndim != 2 or L < 2:
        raise ExtractionError("layout", kind=lat.kind, dims=tuple(lat.dims), L=L)
    t0 = time.perf_counter()

    rows = []
    prev = None
    for j in range(L):
        p = wall_follower(s, "south", prev, min_gap=3)
        if p is None:
            raise ExtractionError("path-count", family="horizontal",
                                  achieved=j, needed=L)
        p = list(shortcut_path(s, p))
        rows.append(p)
        prev = p

    needed = 3 * (L - 1) + 1
    founds = []
    prev = None
    while len(founds) < needed:
        p = wall_follower(s, "east", prev, min_gap=1)
        if p is None:
            raise ExtractionError("path-count", family="vertical",
                                  achieved=len(founds), needed=needed)
        p = list(shortcut_path(s, p))
        founds.append(p)
        prev = p
    columns = list(reversed(founds[0::3]))   # west to east
    t_paths = time.perf_counter()

    bridges = None
    for _round in range(50):
        bridges = _derive_bridges(columns, rows, L)
        reroute = None
        for key in sorted(bridges):
            other = [set(rows[m]) for m in range(L)
                     if m + 1 not in (key[1], key[1] + 1)]
            seg, rr = _fix_bridge(s, bridges[key], rows, key[1], other)
            bridges[key] = seg
            if rr is not None:
                reroute = rr
                break
        if reroute is None:
            break
        rows[reroute.row - 1] = reroute.new_row
    else:
        raise ExtractionError("reroute-unstable")

    labels = {}
    row_anchor_pos = {j: [] for j in range(1, L + 1)}
    for (i, g), seg in bridges.items():
        for site, j in ((seg[0], g), (seg[-1], g + 1)):
            lbl = (i, j)
            if labels.get(site, lbl) != lbl:
                raise ExtractionError("anchors", site=int(site),
                                      labels=(labels[site], lbl))
            labels[site] = lbl
            row_anchor_pos[j].append(rows[j - 1].index(site))

    kept_rows = []
    for j in range(1, L + 1):
        row = rows[j - 1]
        idxs = sorted(row_anchor_pos[j])
        if not idxs:
            raise ExtractionError("anchors", row=j, detail="no anchors")
        imin, imax = idxs[0], idxs[-1]
        west_leaf = (j == L and L % 2 == 1)
        east_leaf = (j == L) or (j == 1 and L % 2 == 0)
        if west_leaf and imin == 0:
            raise ExtractionError("tail", row=j, side="west")
        if east_leaf and imax == len(row) - 1:
            raise ExtractionError("tail", row=j, side="east")
        lo = 0 if west_leaf else imin
        hi = len(row) - 1 if east_leaf else imax
        if west_leaf:
            labels[row[0]] = (1, j)
        if east_leaf:
            labels[row[-1]] = (L, j)
        kept_rows.append(row[lo:hi + 1])

    designed = set()
    kept = set()
    for r in kept_rows:
        kept.update(r)
        designed.update((min(a, b), max(a, b)) for a, b in zip(r, r[1:]))
    for seg in bridges.values():
        kept.update(seg)
        designed.update((min(a, b), max(a, b)) for a, b in zip(seg, seg[1:]))

    plan = ReductionPlan(
        target_l=L,
        kept=frozenset(kept),
        designed_edges=frozenset(designed),
        labels=labels,
        path_plan=PathPlan(
            mid_qubits={lbl: site for site, lbl in labels.items()},
            inter_block_paths={((i, g), (i, g + 1)): tuple(seg)
                               for (i, g), seg in bridges.items()},
            chosen_cluster={},
        ),
    )
    t_plan = time.perf_counter()
    result = reduce_to_hexagonal(sample_graph(s), plan)
    result.stats["pipeline"] = "supercritical"
    result.stats["L"] = L
    result.stats["rows"] = L
    result.stats["verticals_traced"] = needed
    result.stats["stage_seconds"]["paths"] = t_paths - t0
    result.stats["stage_seconds"]["bridges"] = t_plan - t_paths
    return result
