"""Entanglement percolation with pure two-qubit states in Schmidt form.

Every link of a quantum network carries |phi> = sqrt(lambda1)|00> +
sqrt(lambda2)|11> with lambda1 >= lambda2.  Local conversion of such a link
into a maximally entangled pair succeeds with the singlet conversion
probability (SCP), and a network strategy turns the lattice of partially
entangled links into a classical percolation problem whose edge probability
depends on the strategy.  This module implements the single-link and
two-link conversions (Procrustean filtering, entanglement swapping, the
concurrence of a repeater chain) and the lattice strategies that beat naive
conversion: hexagonal-to-triangular swapping and the two square-lattice
constructions (distillation of doubled edges, and splitting the doubled
square lattice into two independent copies).

States are pure and already in Schmidt form throughout; mixed states and
general LOCC optimization are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import Lattice, bond_threshold, face_sites, geometry
from .percolation import label_clusters, sample

STRATEGIES = ("CEP", "Swap", "HexToTri", "SquareDistill", "SquareDouble")

# Largest lambda1 for which the distilled doubled square edge still converts
# into a singlet deterministically: solve (1 - lambda2')^2 = 1/2 for
# 4*lambda1*lambda2, i.e. lambda1*(1-lambda1) = sqrt(2*(sqrt(2)-1))/4.
LAMBDA1_STAR = 0.5 * (1.0 + math.sqrt(1.0 - math.sqrt(2.0 * (math.sqrt(2.0) - 1.0))))


@dataclass(frozen=True)
class SchmidtPair:
    """Schmidt coefficients (lambda1, lambda2) of a pure two-qubit state."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (self.lambda1 >= self.lambda2 >= 0.0):
            raise ValueError("need lambda1 >= lambda2 >= 0")
        if abs(self.lambda1 + self.lambda2 - 1.0) > 1e-12:
            raise ValueError("Schmidt coefficients must sum to 1")

    @classmethod
    def from_lambda1(cls, lambda1: float) -> "SchmidtPair":
        return cls(float(lambda1), 1.0 - float(lambda1))

    def state(self) -> np.ndarray:
        """Amplitudes as a 2x2 matrix T with |phi> = sum T[j,k] |j,k>."""
        return np.diag([math.sqrt(self.lambda1), math.sqrt(self.lambda2)])

    def concurrence(self) -> float:
        return 2.0 * math.sqrt(self.lambda1 * self.lambda2)


@dataclass(frozen=True)
class TwoQubitMatrix:
    """Amplitude matrix of a normalized pure two-qubit state.

    ``t[j, k]`` is the amplitude of |j,k>; the Frobenius norm must be 1.
    Used for measurement outcomes in repeater chains, where outcome r of a
    two-qubit measurement is the projector onto the state with matrix t.
    """

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex)
        if t.shape != (2, 2):
            raise ValueError("need a 2x2 amplitude matrix")
        if abs(np.linalg.norm(t) - 1.0) > 1e-12:
            raise ValueError("amplitude matrix must have Frobenius norm 1")
        object.__setattr__(self, "t", t)

    @property
    def abs_det(self) -> float:
        return abs(self.t[0, 0] * self.t[1, 1] - self.t[0, 1] * self.t[1, 0])


def bell_measurement() -> tuple[TwoQubitMatrix, ...]:
    """The four Bell states as amplitude matrices (the swap measurement)."""
    r = 1.0 / math.sqrt(2.0)
    return (TwoQubitMatrix(np.array([[r, 0], [0, r]])),
            TwoQubitMatrix(np.array([[r, 0], [0, -r]])),
            TwoQubitMatrix(np.array([[0, r], [r, 0]])),
            TwoQubitMatrix(np.array([[0, r], [-r, 0]])))


@dataclass
class StrategyReport:
    """Outcome of mapping a network strategy onto classical percolation.

    ``percolates`` is derived: the strategy yields an infinite cluster iff
    the edge probability it induces exceeds the threshold of the lattice it
    is played on.
    """

    strategy: str
    edge_probability: float
    threshold: float
    percolates: bool = field(init=False)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        self.percolates = self.edge_probability > self.threshold


# -- Single-link and two-link conversions -------------------------------------

def scp(pair: SchmidtPair, copies: int = 1) -> float:
    """Optimal probability of converting the link into a singlet.

    For one copy of the state this is min(1, 2*lambda2); for two copies the
    optimal joint conversion succeeds with min(1, 2*(1 - lambda1^2)).
    """
    if copies == 1:
        return min(1.0, 2.0 * (1.0 - pair.lambda1))
    if copies == 2:
        return min(1.0, 2.0 * (1.0 - pair.lambda1 ** 2))
    raise ValueError("copies must be 1 or 2")


@dataclass
class ProcrusteanFilter:
    """Local filter (m_a on side A, m_b on side B) achieving the SCP."""

    m_a: np.ndarray
    m_b: np.ndarray
    success: float


def procrustean_filter(pair: SchmidtPair) -> ProcrusteanFilter:
    """One-sided filter cutting the larger Schmidt coefficient down to size.

    Success leaves the maximally entangled state; the success probability is
    the one-copy SCP, which is optimal.
    """
    m_a = np.diag([math.sqrt(pair.lambda2 / pair.lambda1), 1.0])
    return ProcrusteanFilter(m_a, np.eye(2), scp(pair, 1))


@dataclass(frozen=True)
class SwapOutcome:
    probability: float
    pair: SchmidtPair


def swap(pair_ab: SchmidtPair, pair_bc: SchmidtPair) -> tuple[SwapOutcome, ...]:
    """Entanglement swapping at B via a Bell measurement in the zz basis.

    Both links must carry the same state.  Two outcomes (probability
    (lambda1^2 + lambda2^2)/2 each) leave A and C sharing the state with
    Schmidt coefficients (lambda1^2, lambda2^2)/(lambda1^2 + lambda2^2); the
    other two (probability lambda1*lambda2 each) leave a maximally entangled
    AC pair.  The expected SCP over outcomes equals the one-copy SCP of the
    input link, so swapping costs nothing in conversion probability.
    """
    if abs(pair_ab.lambda1 - pair_bc.lambda1) > 1e-12:
        raise ValueError("swap requires identical input pairs")
    l1, l2 = pair_ab.lambda1, pair_ab.lambda2
    s = l1 ** 2 + l2 ** 2
    p_max = s / 2.0
    p_min = l1 * l2
    skewed = SchmidtPair(l1 ** 2 / s, 1.0 - l1 ** 2 / s)
    maximal = SchmidtPair(0.5, 0.5)
    return (SwapOutcome(p_max, skewed), SwapOutcome(p_max, skewed),
            SwapOutcome(p_min, maximal), SwapOutcome(p_min, maximal))


def expected_scp(outcomes: tuple[SwapOutcome, ...]) -> float:
    return sum(o.probability * scp(o.pair, 1) for o in outcomes)


def chain_concurrence(pairs, measurements, tol: float = 1e-9) -> float:
    """Average concurrence between the ends of a repeater chain.

    ``pairs`` holds the N+1 links; ``measurements`` holds, for each of the N
    intermediate stations, the list of TwoQubitMatrix outcomes of the
    two-qubit measurement performed there.  Each station's outcomes must
    form a complete measurement (the outcome projectors resolve the
    identity on the two measured qubits).

    For outcome r = (r_1, ..., r_N) the end-to-end state has amplitude
    matrix proportional to T_1 M_{r_1} T_2 ... M_{r_N} T_{N+1}, and the
    average concurrence is sum_r 2*|det(...)|.  The determinant factorizes,
    so the average is 2 * prod |det T_i| * prod_i (sum_r |det M_i^{(r)}|).
    """
    pairs = list(pairs)
    measurements = [list(site) for site in measurements]
    if not pairs:
        raise ValueError("need at least one pair")
    if len(measurements) != len(pairs) - 1:
        raise ValueError(f"{len(pairs)} pairs need {len(pairs) - 1} "
                         f"measurement sites, got {len(measurements)}")
    eye4 = np.eye(4)
    for i, site in enumerate(measurements):
        vecs = [np.asarray(m.t, dtype=complex).reshape(4) for m in site]
        total = sum(np.outer(v, v.conj()) for v in vecs)
        if np.max(np.abs(total - eye4)) > tol:
            raise ValueError(f"measurement site {i} is not complete")
    c = 2.0
    for pair in pairs:
        c *= math.sqrt(pair.lambda1 * pair.lambda2)
    for site in measurements:
        c *= sum(m.abs_det for m in site)
    return c


# -- Lattice strategies --------------------------------------------------------

def hex_to_tri(pair: SchmidtPair) -> tuple[StrategyReport, StrategyReport]:
    """Compare CEP with swapping on a hexagonal lattice of doubled links.

    Every hexagonal edge carries two copies of the state.  CEP converts both
    copies jointly, giving edge probability 2*(1 - lambda1^2) on the
    hexagonal lattice itself.  The quantum strategy swaps one copy through
    every degree-3 vertex of one sublattice, producing a triangular lattice
    whose edges convert independently with the one-copy SCP.  Each report
    carries the threshold of the lattice the strategy is played on.
    """
    cep = StrategyReport("CEP", scp(pair, 2), bond_threshold("hexagonal"))
    quantum = StrategyReport("HexToTri", scp(pair, 1), bond_threshold("triangular"))
    return cep, quantum


def hex_to_tri_window() -> tuple[float, float]:
    """The lambda1 interval where swapping percolates but CEP does not."""
    s = math.sin(math.pi / 18.0)
    return math.sqrt(0.5 + s), 1.0 - s


def hex_to_tri_sweep(lambda1_values) -> list[dict]:
    """Rows of (lambda1, per-strategy probability/threshold/verdict)."""
    rows = []
    for lambda1 in lambda1_values:
        cep, quantum = hex_to_tri(SchmidtPair.from_lambda1(float(lambda1)))
        rows.append({
            "lambda1": float(lambda1),
            "cep_probability": cep.edge_probability,
            "cep_threshold": cep.threshold,
            "cep_percolates": cep.percolates,
            "quantum_probability": quantum.edge_probability,
            "quantum_threshold": quantum.threshold,
            "quantum_percolates": quantum.percolates,
        })
    return rows


@dataclass
class SquareDistillResult:
    """Distilling the two copies on a doubled square edge, then converting."""

    lambda2_prime: float
    lambda1_double_prime: float
    deterministic_singlet: bool


def square_distill(pair: SchmidtPair) -> SquareDistillResult:
    """Distill a doubled square edge and report the final conversion.

    The optimal distillation of |phi>^(x)2 is deterministic and yields the
    two-qubit state with smaller Schmidt coefficient lambda2' =
    (1 - sqrt(1 - (4*lambda1*lambda2)^2))/2.  Swapping two such edges in
    series leaves the largest coefficient lambda1'' = max(1/2, (1-lambda2')^2);
    the final state is maximally entangled (lambda1'' = 1/2) exactly when
    lambda1 <= LAMBDA1_STAR.
    """
    prod = 4.0 * pair.lambda1 * pair.lambda2
    lambda2_prime = 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - prod ** 2)))
    lambda1_prime = 1.0 - lambda2_prime
    lambda1_dp = max(0.5, lambda1_prime ** 2)
    return SquareDistillResult(lambda2_prime, lambda1_dp, lambda1_dp == 0.5)


@dataclass
class SquareDoubleReport:
    """Monte Carlo comparison for splitting the doubled square lattice.

    ``lhs_estimate`` is theta^2*(2 - theta^2), the probability that a far
    pair is reachable after splitting the doubled lattice into two
    independent square lattices; ``rhs_bound_estimate`` is the bound
    theta^2*(2 - P(A<->A'))^2 on the single-lattice strategy, with A, A'
    adjacent sites at the center and A<->A' the event that both belong to
    the spanning cluster.  ``aa_prime_factor`` = 2 - P(A<->A') is compared
    against sqrt(2), the value of sqrt(2 - theta^2) at the threshold.
    """

    p: float
    L: int
    trials: int
    theta: float
    pair_probability: float
    lhs_estimate: float
    rhs_bound_estimate: float
    aa_prime_factor: float
    reference_factor: float = math.sqrt(2.0)


def square_double_compare(p: float, L: int, trials: int, seed: int = 0,
                          threads: int = 1) -> SquareDoubleReport:
    """Estimate both sides of the doubled-square comparison by Monte Carlo.

    Bond percolation on an L x L square lattice at bond probability p (the
    converted-edge probability).  theta is estimated as the probability that
    the central site lies in a side-to-side crossing cluster, and P(A<->A')
    as the probability that the two central neighbors are connected through
    a crossing cluster, the finite-size proxy for both sites belonging to
    the infinite cluster.
    """
    if p < bond_threshold("square"):
        raise ValueError(f"p={p} is subcritical for the square lattice")
    if L < 16:
        raise ValueError("need L >= 16")
    lattice = Lattice("square", (L, L))
    geo = geometry(lattice)
    mid = (L + 1) // 2
    center = geo.site_id((mid, mid))
    neighbor = geo.site_id((mid + 1, mid))
    lo_face = face_sites(geo, 0, high=False)
    hi_face = face_sites(geo, 0, high=True)

    def trial(i: int) -> tuple[bool, bool]:
        s = sample(lattice, p, 1.0, seed, path=("double", i))
        labels = label_clusters(s).labels
        c = labels[center]
        crossing = bool(np.any(labels[lo_face] == c)
                        and np.any(labels[hi_face] == c))
        return crossing, crossing and bool(labels[neighbor] == c)

    theta_hits = pair_hits = 0
    if threads <= 1:
        for i in range(trials):
            a, b = trial(i)
            theta_hits += a
            pair_hits += b
    else:
        from concurrent.futures import ThreadPoolExecutor

        def part(idx) -> tuple[int, int]:
            th = ph = 0
            for i in idx:
                a, b = trial(int(i))
                th += a
                ph += b
            return th, ph

        chunks = np.array_split(np.arange(trials), threads * 4)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for th, ph in pool.map(part, chunks):
                theta_hits += th
                pair_hits += ph

    theta = theta_hits / trials
    pair_prob = pair_hits / trials
    return SquareDoubleReport(
        p=p, L=L, trials=trials, theta=theta, pair_probability=pair_prob,
        lhs_estimate=theta ** 2 * (2.0 - theta ** 2),
        rhs_bound_estimate=theta ** 2 * (2.0 - pair_prob) ** 2,
        aa_prime_factor=2.0 - pair_prob)
