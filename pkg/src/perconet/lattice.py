"""Finite lattices with open boundaries, and the renormalization block geometry.

Supported lattice kinds and their integer embeddings:

* ``square``: hypercubic in d >= 2 dimensions; ``dims`` counts sites per axis
  and coordinates are 1-based, so axis ``i`` runs over ``1..dims[i]``.
* ``hexagonal``: honeycomb in brick-wall form on a 1-based 2-d grid.  All
  horizontal bonds ``(x, y)-(x+1, y)`` exist; the vertical bond
  ``(x, y)-(x, y+1)`` exists iff ``x + y`` is even.  Interior degree 3.
* ``triangular``: 1-based 2-d grid with horizontal, vertical, and one
  diagonal family ``(x, y)-(x+1, y+1)``.  Interior degree 6.
* ``diamond``: ``dims`` counts conventional cubic cells per axis (8 sites per
  cell).  A cell with 0-based index ``(i, j, k)`` occupies the coordinate cube
  ``[4i, 4i+3] x ...`` and holds one fcc sublattice at offsets
  ``(0,0,0), (0,2,2), (2,0,2), (2,2,0)`` and its partner shifted by
  ``(1,1,1)``.  Bonds are the four tetrahedral displacements
  ``(1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)`` from the first sublattice.
  Interior degree 4.
* ``pyrochlore``: covering lattice of ``diamond`` with the same cell dims.
  Sites are the diamond bonds (embedded at the sum of the two endpoint
  coordinates); two sites are adjacent iff the underlying bonds share an
  endpoint.  Interior degree 6.

Crossing events refer to "faces" of a lattice or block.  For grid-embedded
kinds a face along an axis is the set of sites with extreme coordinate; for
diamond and pyrochlore it is the set of sites touching the extreme cell
layer (coordinate ``// 4``).

Only open boundaries are supported.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

KINDS = ("square", "diamond", "pyrochlore", "hexagonal", "triangular")

# Bond percolation thresholds used for precondition checks and reports.
# Hexagonal and triangular are the exact dual pair values; the diamond value
# is the accepted numerical estimate.
BOND_THRESHOLDS = {
    ("square", 2): 0.5,
    ("diamond", 3): 0.389,
    ("hexagonal", 2): 1.0 - 2.0 * math.sin(math.pi / 18.0),
    ("triangular", 2): 2.0 * math.sin(math.pi / 18.0),
}

# Site thresholds (literature values) used only to sanity-check mixed
# site/bond parameters; never asserted in tests.
SITE_THRESHOLDS = {
    ("square", 2): 0.592746,
    ("diamond", 3): 0.4301,
}


def bond_threshold(kind: str, d: int | None = None) -> float:
    """Bond percolation threshold for the given kind (see BOND_THRESHOLDS)."""
    if kind == "square" and d not in (None, 2):
        raise KeyError(f"no tabulated bond threshold for square d={d}")
    d = {"square": 2, "diamond": 3, "hexagonal": 2, "triangular": 2}.get(kind, d)
    try:
        return BOND_THRESHOLDS[(kind, d)]
    except KeyError:
        raise KeyError(f"no tabulated bond threshold for kind {kind!r}") from None


_FIXED_NDIM = {"diamond": 3, "pyrochlore": 3, "hexagonal": 2, "triangular": 2}


@dataclass(frozen=True)
class Lattice:
    """A finite lattice descriptor: kind, per-axis extent, open boundary."""

    kind: str
    dims: tuple[int, ...]
    boundary: str = "open"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if self.kind not in KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.boundary != "open":
            raise ValueError("only open boundaries are supported")
        if any(n < 1 for n in self.dims):
            raise ValueError("all dims must be positive")
        want = _FIXED_NDIM.get(self.kind)
        if want is not None and len(self.dims) != want:
            raise ValueError(f"{self.kind} lattice needs {want} dims, got {len(self.dims)}")
        if self.kind == "square" and len(self.dims) < 2:
            raise ValueError("square lattice needs d >= 2")

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "dims": list(self.dims)})

    @classmethod
    def from_json(cls, text: str | dict) -> "Lattice":
        doc = json.loads(text) if isinstance(text, str) else text
        return cls(kind=doc["kind"], dims=tuple(doc["dims"]))


class LatticeGeometry:
    """Concrete site/bond arrays for a lattice.

    Attributes
    ----------
    coords : (n_sites, ndim) int32 embedding coordinates
    bonds : (n_bonds, 2) int32 site ids, first id < second id
    indptr, nbr_sites, nbr_bonds : CSR adjacency over site ids
    """

    def __init__(self, lattice: Lattice, coords: np.ndarray, bonds: np.ndarray,
                 layers: np.ndarray, n_layers: tuple[int, ...]):
        self.lattice = lattice
        self.coords = coords
        self.bonds = bonds
        self.n_sites = len(coords)
        self.n_bonds = len(bonds)
        # per-site integer layer along each axis; faces are extreme layers
        self.layers = layers
        self.n_layers = n_layers
        self._build_adjacency()
        self._site_lookup: dict[tuple[int, ...], int] | None = None

    def _build_adjacency(self):
        n, m = self.n_sites, self.n_bonds
        ends = np.concatenate([self.bonds[:, 0], self.bonds[:, 1]]) if m else np.empty(0, np.int32)
        other = np.concatenate([self.bonds[:, 1], self.bonds[:, 0]]) if m else np.empty(0, np.int32)
        bond_ids = np.concatenate([np.arange(m), np.arange(m)]).astype(np.int32)
        order = np.argsort(ends, kind="stable")
        self.nbr_sites = other[order].astype(np.int32)
        self.nbr_bonds = bond_ids[order]
        counts = np.bincount(ends, minlength=n) if m else np.zeros(n, np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    def site_id(self, coord) -> int:
        if self._site_lookup is None:
            self._site_lookup = {tuple(int(c) for c in row): i
                                 for i, row in enumerate(self.coords)}
        sid = self._site_lookup.get(tuple(int(c) for c in coord))
        if sid is None:
            raise KeyError(f"no site at {tuple(coord)} in {self.lattice.kind}{self.lattice.dims}")
        return sid

    def face_sites(self, axis: int, high: bool) -> np.ndarray:
        """Site ids on the extreme layer of ``axis`` (low face or high face)."""
        target = self.n_layers[axis] - 1 if high else 0
        return np.nonzero(self.layers[:, axis] == target)[0].astype(np.int32)

    def neighbor_ids(self, sid: int) -> np.ndarray:
        return self.nbr_sites[self.indptr[sid]:self.indptr[sid + 1]]


def _square_geometry(lattice: Lattice) -> LatticeGeometry:
    dims = lattice.dims
    d = len(dims)
    grids = np.indices(dims).reshape(d, -1).T.astype(np.int32)
    coords = grids + 1  # 1-based
    n = coords.shape[0]
    strides = np.ones(d, dtype=np.int64)
    for i in range(d - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    ids = np.arange(n, dtype=np.int64)
    bond_parts = []
    for axis in range(d):
        keep = grids[:, axis] < dims[axis] - 1
        a = ids[keep]
        bond_parts.append(np.stack([a, a + strides[axis]], axis=1))
    bonds = np.concatenate(bond_parts).astype(np.int32) if bond_parts else np.empty((0, 2), np.int32)
    layers = grids.copy()
    return LatticeGeometry(lattice, coords, bonds, layers, dims)


def _hexagonal_geometry(lattice: Lattice) -> LatticeGeometry:
    nx_, ny = lattice.dims
    grids = np.indices((nx_, ny)).reshape(2, -1).T.astype(np.int32)
    coords = grids + 1
    ids = np.arange(len(coords), dtype=np.int64)
    horiz = grids[:, 0] < nx_ - 1
    parts = [np.stack([ids[horiz], ids[horiz] + ny], axis=1)]
    # vertical bond at (x, y) iff x + y even in 1-based coordinates
    vert = (grids[:, 1] < ny - 1) & ((coords[:, 0] + coords[:, 1]) % 2 == 0)
    parts.append(np.stack([ids[vert], ids[vert] + 1], axis=1))
    bonds = np.concatenate(parts).astype(np.int32)
    return LatticeGeometry(lattice, coords, bonds, grids.copy(), lattice.dims)


def _triangular_geometry(lattice: Lattice) -> LatticeGeometry:
    nx_, ny = lattice.dims
    grids = np.indices((nx_, ny)).reshape(2, -1).T.astype(np.int32)
    coords = grids + 1
    ids = np.arange(len(coords), dtype=np.int64)
    parts = []
    horiz = grids[:, 0] < nx_ - 1
    parts.append(np.stack([ids[horiz], ids[horiz] + ny], axis=1))
    vert = grids[:, 1] < ny - 1
    parts.append(np.stack([ids[vert], ids[vert] + 1], axis=1))
    diag = horiz & vert
    parts.append(np.stack([ids[diag], ids[diag] + ny + 1], axis=1))
    bonds = np.concatenate(parts).astype(np.int32)
    return LatticeGeometry(lattice, coords, bonds, grids.copy(), lattice.dims)


_DIAMOND_BASIS = np.array(
    [(0, 0, 0), (0, 2, 2), (2, 0, 2), (2, 2, 0),
     (1, 1, 1), (1, 3, 3), (3, 1, 3), (3, 3, 1)], dtype=np.int32)
_DIAMOND_STEPS = np.array(
    [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=np.int32)


def _diamond_ids(coords: np.ndarray, cells: tuple[int, int, int]) -> np.ndarray:
    """Arithmetic coord -> site id for the diamond embedding; -1 if invalid."""
    cell = coords >> 2
    offs = coords & 3
    basis = np.full(len(coords), -1, dtype=np.int64)
    for b, off in enumerate(_DIAMOND_BASIS):
        basis[np.all(offs == off, axis=1)] = b
    valid = (basis >= 0)
    for ax in range(3):
        valid &= (coords[:, ax] >= 0) & (cell[:, ax] < cells[ax])
    ids = ((cell[:, 0].astype(np.int64) * cells[1] + cell[:, 1]) * cells[2] + cell[:, 2]) * 8 + basis
    ids[~valid] = -1
    return ids


def _diamond_geometry(lattice: Lattice) -> LatticeGeometry:
    cells = lattice.dims
    cell_idx = np.indices(cells).reshape(3, -1).T.astype(np.int32)
    # site order: cell-major, basis-minor, matching _diamond_ids
    coords = (cell_idx[:, None, :] * 4 + _DIAMOND_BASIS[None, :, :]).reshape(-1, 3)
    a_sites = np.nonzero(coords[:, 0] % 2 == 0)[0]
    parts = []
    for step in _DIAMOND_STEPS:
        target = _diamond_ids(coords[a_sites] + step, cells)
        keep = target >= 0
        parts.append(np.stack([a_sites[keep], target[keep]], axis=1))
    bonds = np.concatenate(parts)
    bonds = np.sort(bonds, axis=1).astype(np.int32)
    layers = (coords >> 2).astype(np.int32)
    return LatticeGeometry(lattice, coords, bonds, layers, cells)


def _pyrochlore_geometry(lattice: Lattice) -> LatticeGeometry:
    base = geometry(Lattice("diamond", lattice.dims))
    # one covering site per diamond bond, at the endpoint coordinate sum
    coords = (base.coords[base.bonds[:, 0]] + base.coords[base.bonds[:, 1]]).astype(np.int32)
    pairs = set()
    for sid in range(base.n_sites):
        incident = base.nbr_bonds[base.indptr[sid]:base.indptr[sid + 1]]
        for i in range(len(incident)):
            for j in range(i + 1, len(incident)):
                a, b = int(incident[i]), int(incident[j])
                pairs.add((a, b) if a < b else (b, a))
    bonds = np.array(sorted(pairs), dtype=np.int32) if pairs else np.empty((0, 2), np.int32)
    # a covering site touches every cell layer either endpoint lies in
    lay_a = base.layers[base.bonds[:, 0]]
    lay_b = base.layers[base.bonds[:, 1]]
    layers = np.minimum(lay_a, lay_b).astype(np.int32)
    geo = LatticeGeometry(lattice, coords, bonds, layers, lattice.dims)
    geo._layers_hi = np.maximum(lay_a, lay_b).astype(np.int32)
    return geo


@lru_cache(maxsize=32)
def geometry(lattice: Lattice) -> LatticeGeometry:
    """Build (and cache) the site/bond arrays for ``lattice``."""
    builder = {
        "square": _square_geometry,
        "hexagonal": _hexagonal_geometry,
        "triangular": _triangular_geometry,
        "diamond": _diamond_geometry,
        "pyrochlore": _pyrochlore_geometry,
    }[lattice.kind]
    geo = builder(lattice)
    if not hasattr(geo, "_layers_hi"):
        geo._layers_hi = geo.layers
    return geo


def face_sites(geo: LatticeGeometry, axis: int, high: bool) -> np.ndarray:
    """Sites touching the extreme layer along ``axis`` (handles pyrochlore)."""
    if high:
        return np.nonzero(geo._layers_hi[:, axis] == geo.n_layers[axis] - 1)[0].astype(np.int32)
    return np.nonzero(geo.layers[:, axis] == 0)[0].astype(np.int32)


def neighbors(lattice: Lattice, site) -> list[tuple[tuple[int, ...], int]]:
    """Neighbor coordinates of ``site`` with their bond ids."""
    geo = geometry(lattice)
    sid = geo.site_id(site)
    lo, hi = geo.indptr[sid], geo.indptr[sid + 1]
    return [(tuple(int(c) for c in geo.coords[nb]), int(bd))
            for nb, bd in zip(geo.nbr_sites[lo:hi], geo.nbr_bonds[lo:hi])]


def covering_lattice(lattice: Lattice) -> Lattice:
    """Covering lattice whose sites are the input's bonds (diamond -> pyrochlore)."""
    if lattice.kind != "diamond":
        raise ValueError("covering lattice is implemented for the diamond kind only")
    return Lattice("pyrochlore", lattice.dims)


def doubled_square(lattice: Lattice) -> tuple[Lattice, Lattice]:
    """The two disjoint square sublattices produced by the doubling surgery.

    Swapping at every second site of an n x n square lattice splits it into
    two diagonal square lattices with lattice constant sqrt(2).  Each is
    represented here as an axis-aligned square patch of equivalent site
    count; the bulk topology is identical and that is all the doubled-lattice
    comparison consumes.
    """
    if lattice.kind != "square" or lattice.ndim != 2:
        raise ValueError("doubling surgery applies to 2-d square lattices")
    n = lattice.dims[0] * lattice.dims[1]
    m = max(2, round(math.sqrt(n / 2.0)))
    return Lattice("square", (m, m)), Lattice("square", (m, m))


# ---------------------------------------------------------------------------
# Renormalization block geometry (hypercubic slabs).
#
# The slab for renormalized size L and block parameter k in dimension d is
# the hypercubic lattice [1, 2kL]^2 x [1, 2k]^(d-2).  The overlapping block
# family A_y, y in [2, 2L]^2, consists of hypercubes of edge 2k:
#
#   axis 0: sites (y1-2)k+1 .. y1*k     axis 1: sites (y2-2)k+1 .. y2*k
#   axes >= 2: the full thickness 1 .. 2k
#
# The L^2 disjoint blocks are A_y at even y = 2x, x in [1, L]^2; they tile
# the slab exactly.  B_y = A_y intersect A_(y1+1, y2) is the overlap of two
# horizontally consecutive blocks (width k); C_z = A_z union A_(z1, z2+2) is
# the union of two vertically neighboring disjoint blocks (a 2k x 4k box).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    """One region of the block family; ``k`` is the block parameter (edge 2k)."""

    index: tuple[int, int]
    k: int
    d: int
    kind: str  # "A", "B", or "C"
    lo: tuple[int, ...] = field(init=False)
    hi: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        i1, i2 = self.index
        k, d = self.k, self.d
        if d < 2 or k < 1:
            raise ValueError("block needs d >= 2 and k >= 1")
        thick = [(1, 2 * k)] * (d - 2)
        if self.kind == "A":
            spans = [((i1 - 2) * k + 1, i1 * k), ((i2 - 2) * k + 1, i2 * k)]
        elif self.kind == "B":
            spans = [((i1 - 1) * k + 1, i1 * k), ((i2 - 2) * k + 1, i2 * k)]
        elif self.kind == "C":
            spans = [((i1 - 2) * k + 1, i1 * k), ((i2 - 2) * k + 1, (i2 + 2) * k)]
        else:
            raise ValueError(f"unknown block kind {self.kind!r}")
        spans.extend(thick)
        object.__setattr__(self, "lo", tuple(s[0] for s in spans))
        object.__setattr__(self, "hi", tuple(s[1] for s in spans))

    def extended(self, pad: int, dims: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Bounds grown symmetrically by ``pad`` in the thickness axes, clamped to ``dims``."""
        lo = list(self.lo)
        hi = list(self.hi)
        for ax in range(2, self.d):
            lo[ax] = max(1, lo[ax] - pad)
            hi[ax] = min(dims[ax], hi[ax] + pad)
        return tuple(lo), tuple(hi)


def slab_lattice(L: int, k: int, d: int) -> Lattice:
    """The hypercubic slab [1, 2kL]^2 x [1, 2k]^(d-2) hosting the block family."""
    if L < 1 or k < 1 or d < 2:
        raise ValueError("need L >= 1, k >= 1, d >= 2")
    return Lattice("square", (2 * k * L, 2 * k * L) + (2 * k,) * (d - 2))


def a_block(y: tuple[int, int], k: int, d: int) -> Block:
    if not all(2 <= yi <= 10**9 for yi in y):
        raise ValueError(f"A-block index out of range: {y}")
    return Block(tuple(y), k, d, "A")


def enumerate_blocks(L: int, k: int, d: int) -> dict[str, list[Block]]:
    """All blocks of the slab: L^2 disjoint A, the B overlaps, the C unions."""
    blocks: dict[str, list[Block]] = {"A": [], "B": [], "C": []}
    for x1 in range(1, L + 1):
        for x2 in range(1, L + 1):
            blocks["A"].append(Block((2 * x1, 2 * x2), k, d, "A"))
    for y1 in range(2, 2 * L):
        for y2 in range(2, 2 * L + 1, 2):
            blocks["B"].append(Block((y1, y2), k, d, "B"))
    for z1 in range(2, 2 * L + 1, 2):
        for z2 in range(2, 2 * (L - 1) + 1, 2):
            blocks["C"].append(Block((z1, z2), k, d, "C"))
    return blocks


def block_site_ids(geo: LatticeGeometry, lo: tuple[int, ...], hi: tuple[int, ...]) -> np.ndarray:
    """Site ids of the axis-aligned box [lo, hi] (1-based, inclusive) in a hypercubic slab."""
    if geo.lattice.kind != "square":
        raise ValueError("block regions are defined on hypercubic slabs")
    dims = geo.lattice.dims
    axes = [np.arange(l - 1, h) for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.zeros(mesh[0].size, dtype=np.int64)
    for ax, m in enumerate(mesh):
        stride = int(np.prod(dims[ax + 1:], dtype=np.int64))
        flat = flat + m.reshape(-1).astype(np.int64) * stride
    return flat.astype(np.int32)
