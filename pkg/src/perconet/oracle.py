"""Exact dense statevector checks for small graph states.

This module is the ground truth the graph rewrites are certified against: it
builds graph states from their definition (|+> everywhere, a controlled-Z per
edge), measures Pauli operators projectively, and searches for the local
single-qubit Clifford corrections that relate a post-measurement state to a
candidate graph state.  Everything is dense and capped at a small qubit count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graphstate import GraphState

DEFAULT_CAP = 14

_EIGVECS = {
    "Z": {+1: np.array([1.0, 0.0], dtype=complex),
          -1: np.array([0.0, 1.0], dtype=complex)},
    "X": {+1: np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
          -1: np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)},
    "Y": {+1: np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2),
          -1: np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2)},
}


@dataclass
class Statevector:
    """Dense amplitudes, one tensor axis per qubit, axis i = i-th sorted vertex."""

    amplitudes: np.ndarray
    qubit_order: dict[int, int]

    def __post_init__(self):
        n = self.amplitudes.ndim
        if self.amplitudes.shape != (2,) * n:
            raise ValueError("amplitudes must have shape (2,)*n")
        if sorted(self.qubit_order.values()) != list(range(n)):
            raise ValueError("qubit_order must map vertices onto axes 0..n-1")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |psi| = {norm}")

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.ndim

    def axis_of(self, vertex: int) -> int:
        return self.qubit_order[vertex]


def build_graph_state(g: GraphState, cap: int = DEFAULT_CAP) -> Statevector:
    """|+>^n with a controlled-Z applied across every edge."""
    n = g.n_vertices
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the cap of {cap}")
    order = {v: i for i, v in enumerate(sorted(g.vertices))}
    psi = np.full((2,) * n, 2.0 ** (-n / 2.0), dtype=complex)
    for a, b in g.edges:
        i, j = order[a], order[b]
        idx = [slice(None)] * n
        idx[i] = 1
        idx[j] = 1
        psi[tuple(idx)] *= -1.0
    return Statevector(psi, order)


def _apply_x(psi: np.ndarray, axis: int) -> np.ndarray:
    return np.flip(psi, axis=axis)


def _apply_z(psi: np.ndarray, axis: int) -> np.ndarray:
    out = psi.copy()
    idx = [slice(None)] * psi.ndim
    idx[axis] = 1
    out[tuple(idx)] *= -1.0
    return out


def check_stabilizers(g: GraphState, psi: Statevector, tol: float = 1e-8) -> bool:
    """True iff K(a) = X_a prod_{b in N(a)} Z_b fixes psi for every vertex a."""
    if psi.n_qubits != g.n_vertices:
        raise ValueError("state dimension does not match the graph")
    for a in sorted(g.vertices):
        phi = _apply_x(psi.amplitudes, psi.axis_of(a))
        for b in g.neighbors(a):
            phi = _apply_z(phi, psi.axis_of(b))
        if not np.allclose(phi, psi.amplitudes, atol=tol):
            return False
    return True


@dataclass
class PauliMeasurementResult:
    outcome: int
    probability: float
    post_state: Statevector


def _project_out(psi: Statevector, qubit: int, basis: str, outcome: int):
    """(probability, post Statevector or None) for one outcome."""
    axis = psi.axis_of(qubit)
    v = _EIGVECS[basis][outcome]
    # <v|psi> along the measured axis removes that axis; the remaining axes
    # keep their relative order, so sorted-vertex alignment is preserved
    reduced = np.tensordot(v.conj(), psi.amplitudes, axes=([0], [axis]))
    prob = float(np.linalg.norm(reduced) ** 2)
    if prob <= 1e-12:
        return prob, None
    order = {q: (ax if ax < axis else ax - 1)
             for q, ax in psi.qubit_order.items() if q != qubit}
    return prob, Statevector(reduced / np.sqrt(prob), order)


def measure_pauli(psi: Statevector, qubit: int, basis: str,
                  forced_outcome: int | None = None) -> PauliMeasurementResult:
    """Projective Pauli measurement; the measured qubit leaves the register.

    Without ``forced_outcome`` the +1 branch is taken when it has nonzero
    probability (a deterministic convention; use both_outcomes to enumerate).
    On graph states every outcome probability is 0, 1/2 or 1.
    """
    if basis not in _EIGVECS:
        raise ValueError(f"basis {basis!r} must be X, Y or Z")
    if qubit not in psi.qubit_order:
        raise ValueError(f"qubit {qubit} not present")
    if forced_outcome is not None:
        if forced_outcome not in (+1, -1):
            raise ValueError("outcome must be +1 or -1")
        prob, post = _project_out(psi, qubit, basis, forced_outcome)
        if post is None:
            raise ValueError(f"outcome {forced_outcome:+d} has probability {prob}")
        return PauliMeasurementResult(forced_outcome, prob, post)
    prob, post = _project_out(psi, qubit, basis, +1)
    if post is not None:
        return PauliMeasurementResult(+1, prob, post)
    prob, post = _project_out(psi, qubit, basis, -1)
    return PauliMeasurementResult(-1, prob, post)


def both_outcomes(psi: Statevector, qubit: int, basis: str) -> list[PauliMeasurementResult]:
    """The outcomes with nonzero probability, as PauliMeasurementResults."""
    out = []
    for s in (+1, -1):
        prob, post = _project_out(psi, qubit, basis, s)
        if post is not None:
            out.append(PauliMeasurementResult(s, prob, post))
    return out


# -- single-qubit Clifford group (24 elements up to global phase) -------------

def _phase_canonical(u: np.ndarray) -> tuple:
    flat = u.ravel()
    k = np.flatnonzero(np.abs(flat) > 1e-9)[0]
    v = flat / (flat[k] / np.abs(flat[k]))
    return tuple(np.round(v, 9))


def _clifford_table() -> list[np.ndarray]:
    eye = np.eye(2, dtype=complex)
    s = np.diag([1.0, 1.0j])
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1.0j], [1.0j, 0]], dtype=complex)
    z = np.diag([1.0, -1.0])
    sdg = s.conj().T
    sqrt_y = (eye - 1.0j * y) / np.sqrt(2)     # rotation mapping Z to X
    sqrt_y_dg = sqrt_y.conj().T
    # common measurement byproducts first so the search exits early
    seeds = [eye, z, s, sdg, x, y, h, sqrt_y, sqrt_y_dg,
             z @ s, x @ s, y @ s, h @ s, h @ sdg, s @ h, sdg @ h]
    table: list[np.ndarray] = []
    seen: set[tuple] = set()

    def push(u):
        key = _phase_canonical(u)
        if key not in seen:
            seen.add(key)
            table.append(u)

    for u in seeds:
        push(u)
    frontier = list(table)
    while frontier:
        nxt = []
        for u in frontier:
            for gate in (s, h):
                w = gate @ u
                key = _phase_canonical(w)
                if key not in seen:
                    seen.add(key)
                    table.append(w)
                    nxt.append(w)
        frontier = nxt
    assert len(table) == 24, f"Clifford table has {len(table)} elements"
    return table


_CLIFFORDS = _clifford_table()


def _single_qubit_spectra(psi: np.ndarray) -> list[np.ndarray]:
    """Sorted squared Schmidt spectrum across each single-qubit bipartition."""
    n = psi.ndim
    spectra = []
    for ax in range(n):
        m = np.moveaxis(psi, ax, 0).reshape(2, -1)
        vals = np.sort(np.linalg.svd(m, compute_uv=False) ** 2)
        spectra.append(vals)
    return spectra


def _correction_search(post: np.ndarray, target: np.ndarray,
                       candidate_axes: list[int], tol: float) -> bool:
    """Is (prod_i U_i on candidate axes) post == target up to global phase?

    Searches the 24^m product-Clifford space depth-first on a transfer tensor,
    pruning branches whose best achievable overlap (nuclear norm of the
    remaining contraction) falls below 1.
    """
    n = post.ndim
    rest = [ax for ax in range(n) if ax not in candidate_axes]
    # K has one (target, post) axis pair per candidate, contracted over the rest
    K = np.tensordot(target.conj(), post, axes=(rest, rest))
    m = len(candidate_axes)
    # axes of K: m target-side then m post-side; pair them up per candidate
    perm = [i for pair in zip(range(m), range(m, 2 * m)) for i in pair]
    K = K.transpose(perm)  # (t1, p1, t2, p2, ...)

    def dfs(tensor: np.ndarray, depth: int) -> bool:
        if depth == m:
            return abs(complex(tensor)) >= 1.0 - tol
        for u in _CLIFFORDS:
            # contract candidate `depth`: sum_{t,p} tensor[t,p,...] * u[t,p]
            nxt = np.tensordot(u, tensor, axes=([0, 1], [0, 1]))
            r = m - depth - 1
            if r:
                mat = nxt.transpose([2 * i for i in range(r)]
                                    + [2 * i + 1 for i in range(r)]).reshape(2 ** r, 2 ** r)
                if np.linalg.svd(mat, compute_uv=False).sum() < 1.0 - 1e-6:
                    continue
            if dfs(nxt, depth + 1):
                return True
        return False

    return dfs(K, 0)


def verify_rewrite(g: GraphState, vertex: int, basis: str, expected: GraphState,
                   cap: int = DEFAULT_CAP, tol: float = 1e-8) -> bool:
    """Certify a graph rewrite against the statevector simulation.

    True iff for every nonzero-probability outcome of measuring ``basis`` on
    ``vertex`` of the graph state of ``g``, the post-measurement state equals
    the graph state of ``expected`` up to single-qubit Clifford corrections on
    the former neighborhood (widened to second neighbors as a fallback).
    """
    if expected.vertices != g.vertices - {vertex}:
        return False
    psi = build_graph_state(g, cap)
    target = build_graph_state(expected, cap) if expected.n_vertices else None
    nbrs = set(g.neighbors(vertex))
    second = set().union(*(g.neighbors(b) for b in nbrs)) - {vertex} if nbrs else set()
    for res in both_outcomes(psi, vertex, basis):
        post = res.post_state
        if post.n_qubits == 0:
            if target is not None:
                return False
            continue
        if target is None:
            return False
        t = target.amplitudes
        p = post.amplitudes
        # single-qubit Schmidt spectra are invariant under local corrections
        for sa, sb in zip(_single_qubit_spectra(p), _single_qubit_spectra(t)):
            if not np.allclose(sa, sb, atol=1e-8):
                return False
        if abs(np.vdot(t, p)) >= 1.0 - tol:
            continue
        axes = sorted(post.axis_of(b) for b in nbrs)
        if axes and _correction_search(p, t, axes, tol):
            continue
        wide = sorted(post.axis_of(b) for b in (nbrs | second))
        if wide != axes and _correction_search(p, t, wide, tol):
            continue
        return False
    return True
