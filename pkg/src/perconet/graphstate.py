"""Graph states as simple graphs, and the measurement calculus on them.

Vertices are integer ids.  All rewrites return new GraphState values; the
byproduct Pauli/Clifford corrections of random measurement outcomes are not
tracked here (graphs are compared up to local corrections, which the
statevector oracle certifies on small instances).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ._rng import stream


class GraphState:
    """Immutable simple undirected graph with integer vertex ids."""

    __slots__ = ("_adj", "_edges")

    def __init__(self, vertices, edges=()):
        adj: dict[int, set[int]] = {int(v): set() for v in vertices}
        for e in edges:
            a, b = (int(x) for x in e)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if a not in adj or b not in adj:
                raise ValueError(f"edge ({a}, {b}) references a missing vertex")
            adj[a].add(b)
            adj[b].add(a)
        self._adj = {v: frozenset(nb) for v, nb in adj.items()}
        self._edges: frozenset | None = None

    @classmethod
    def _from_adj(cls, adj: dict[int, frozenset]) -> "GraphState":
        g = object.__new__(cls)
        g._adj = adj
        g._edges = None
        return g

    @property
    def vertices(self) -> frozenset:
        return frozenset(self._adj)

    @property
    def edges(self) -> frozenset:
        if self._edges is None:
            self._edges = frozenset((a, b) for a, nbrs in self._adj.items()
                                    for b in nbrs if a < b)
        return self._edges

    def neighbors(self, a: int) -> frozenset:
        return self._adj[a]

    def degree(self, a: int) -> int:
        return len(self._adj[a])

    def has_edge(self, a: int, b: int) -> bool:
        return b in self._adj.get(a, ())

    @property
    def n_vertices(self) -> int:
        return len(self._adj)

    def __contains__(self, v: int) -> bool:
        return v in self._adj

    def __eq__(self, other) -> bool:
        return isinstance(other, GraphState) and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    def __repr__(self) -> str:
        return f"GraphState({sorted(self._adj)}, {sorted(self.edges)})"

    def to_json(self) -> str:
        return json.dumps({"vertices": sorted(self._adj),
                           "edges": sorted([a, b] for a, b in self.edges)})

    @classmethod
    def from_json(cls, text: str | dict) -> "GraphState":
        doc = json.loads(text) if isinstance(text, str) else text
        return cls(doc["vertices"], doc["edges"])


def _require(g: GraphState, a: int):
    if a not in g:
        raise ValueError(f"vertex {a} not in graph")


def local_complement(g: GraphState, a: int) -> GraphState:
    """Toggle every edge between two neighbors of ``a``; ``a`` itself untouched."""
    _require(g, a)
    nbset = g._adj[a]
    adj = dict(g._adj)
    for u in nbset:
        # toggle u's edges to the other neighbors; the edge to a survives
        adj[u] = adj[u] ^ (nbset - {u})
    return GraphState._from_adj(adj)


def _delete_vertex(g: GraphState, a: int) -> GraphState:
    adj = dict(g._adj)
    nbrs = adj.pop(a)
    for b in nbrs:
        adj[b] = adj[b] - {a}
    return GraphState._from_adj(adj)


def measure_z(g: GraphState, a: int) -> GraphState:
    """A sigma_z measurement cuts the vertex: induced subgraph on V minus a."""
    _require(g, a)
    return _delete_vertex(g, a)


def measure_y(g: GraphState, a: int) -> GraphState:
    """A sigma_y measurement locally complements at ``a``, then deletes it."""
    _require(g, a)
    return _delete_vertex(local_complement(g, a), a)


def measure_x(g: GraphState, a: int, pivot: int | None = None) -> GraphState:
    """The sigma_x rewrite with a pivot neighbor b0.

    G' = tau_b0( tau_a( tau_b0(G) ) minus a ); an isolated vertex is simply
    removed.  Default pivot: the lowest-id neighbor.
    """
    _require(g, a)
    nbrs = g.neighbors(a)
    if not nbrs:
        return _delete_vertex(g, a)
    if pivot is None:
        pivot = min(nbrs)
    elif pivot not in nbrs:
        raise ValueError(f"pivot {pivot} is not a neighbor of {a}")
    h = local_complement(g, pivot)
    h = _delete_vertex(local_complement(h, a), a)
    return local_complement(h, pivot)


def shrink_path(g: GraphState, path) -> GraphState:
    """Collapse a chain of degree-2 vertices to a single edge.

    ``path`` is the full ordered walk [u, i1, ..., im, w]; the interior
    vertices must have degree exactly 2 and the endpoints must not already be
    adjacent (that configuration is a triangle once shrunk, and y-measuring it
    would remove the edge instead).
    """
    path = [int(v) for v in path]
    if len(path) < 2:
        raise ValueError("path needs at least two vertices")
    for u, v in zip(path, path[1:]):
        if not g.has_edge(u, v):
            raise ValueError(f"({u}, {v}) is not an edge of the graph")
    if len(path) == 2:
        return g
    u, w = path[0], path[-1]
    if g.has_edge(u, w):
        raise ValueError("endpoints already adjacent; shrinking would toggle the edge off")
    for v in path[1:-1]:
        if g.degree(v) != 2:
            raise ValueError(f"interior vertex {v} has degree {g.degree(v)}, not 2")
    for v in path[1:-1]:
        g = measure_y(g, v)
    assert g.has_edge(u, w)
    return g


def eliminate_triangle(g: GraphState, triangle) -> tuple[GraphState, int]:
    """Destroy a triangle in favor of a T-junction by y-measuring one corner.

    The corner with the lowest id is measured; returns (new graph, measured id).
    """
    a, b, c = sorted(int(v) for v in triangle)
    for u, v in ((a, b), (a, c), (b, c)):
        if not g.has_edge(u, v):
            raise ValueError(f"({u}, {v}) missing; not a triangle")
    return measure_y(g, a), a


@dataclass(frozen=True)
class MeasurementSchedule:
    """Ordered single-qubit Pauli measurements (vertex, basis in {X, Y, Z})."""

    steps: tuple[tuple[int, str], ...]

    def __post_init__(self):
        steps = tuple((int(v), str(b).upper()) for v, b in self.steps)
        object.__setattr__(self, "steps", steps)
        seen = set()
        for v, b in steps:
            if b not in ("X", "Y", "Z"):
                raise ValueError(f"basis {b!r} must be X, Y or Z")
            if v in seen:
                raise ValueError(f"vertex {v} measured twice")
            seen.add(v)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def to_json(self) -> str:
        return json.dumps([[v, b] for v, b in self.steps])

    @classmethod
    def from_json(cls, text: str | list) -> "MeasurementSchedule":
        doc = json.loads(text) if isinstance(text, str) else text
        return cls(tuple((v, b) for v, b in doc))


def apply_schedule(g: GraphState, schedule: MeasurementSchedule) -> GraphState:
    """Apply the per-basis rewrites in order; X uses the default pivot."""
    for v, basis in schedule:
        if basis == "Z":
            g = measure_z(g, v)
        elif basis == "Y":
            g = measure_y(g, v)
        else:
            g = measure_x(g, v)
    return g


# -- five-star fusion ---------------------------------------------------------

def star(center: int, arms) -> GraphState:
    arms = list(arms)
    return GraphState([center, *arms], [(center, a) for a in arms])


def fuse(g: GraphState, a: int, b: int) -> GraphState:
    """Successful type-I fusion: ``b`` is consumed, ``a`` inherits b's neighbors."""
    _require(g, a)
    _require(g, b)
    merged = (g.neighbors(a) | g.neighbors(b)) - {a, b}
    adj = {v: set(nb) for v, nb in g._adj.items() if v != b}
    adj[a] = set(merged)
    for v in adj:
        if v == a:
            continue
        adj[v].discard(b)
        if v in merged:
            adj[v].add(a)
        else:
            adj[v].discard(a)
    return GraphState._from_adj({v: frozenset(nb) for v, nb in adj.items()})


@dataclass(frozen=True)
class FusionOutcome:
    success: bool
    result_graph: GraphState
    probability: float


def fuse_stars(p_gate: float, seed: int = 0) -> FusionOutcome:
    """One run of the two-attempt five-star fusion protocol.

    Two 5-qubit stars (centers 0 and 5, arms 1-4 and 6-9).  A fusion gate is
    tried on the arm pair (4, 9); on success the chain is contracted with a
    sigma_x measurement and the redundant center leaf is removed, leaving a
    single 7-qubit star.  On failure the gate acts as sigma_z on both arms and
    a second gate is tried directly on the two centers; its failure separates
    the six remaining arm qubits.  Overall success probability 1-(1-p_gate)^2.
    """
    if not 0.0 <= p_gate <= 1.0:
        raise ValueError("p_gate must lie in [0, 1]")
    rng = stream(seed, "fusion")
    g = GraphState(range(10), [(0, i) for i in (1, 2, 3, 4)]
                   + [(5, i) for i in (6, 7, 8, 9)])
    p_success = 1.0 - (1.0 - p_gate) ** 2
    if rng.random() < p_gate:
        g = fuse(g, 4, 9)                  # arm merge: chain 0-4-5 with side arms
        g = measure_x(g, 4, pivot=0)       # contract: star with a redundant leaf
        g = measure_z(g, 0)                # collapse the redundant encoding
        return FusionOutcome(True, g, p_success)
    g = measure_z(measure_z(g, 4), 9)      # failed gate = sigma_z on both qubits
    if rng.random() < p_gate:
        g = fuse(g, 0, 5)                  # center merge: six-arm star directly
        return FusionOutcome(True, g, p_success)
    g = measure_z(measure_z(g, 0), 5)
    return FusionOutcome(False, g, (1.0 - p_gate) ** 2)
