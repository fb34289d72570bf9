"""Acceptance gate: one test per advertised guarantee.

Each test is self-contained and seed-pinned, so `pytest -v tests/test_acceptance.py`
prints one pass/fail line per guarantee.  The slow entries stay far inside
their wall-clock budgets on a single core (the diamond sweep dominates at a
few minutes).
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from perconet._rng import stream
from perconet.entanglement import (LAMBDA1_STAR, SchmidtPair, expected_scp,
                                   hex_to_tri, scp, square_distill,
                                   square_double_compare, swap)
from perconet.events import block_size_search
from perconet.graphstate import (GraphState, apply_schedule, fuse_stars,
                                 measure_y, measure_z)
from perconet.lattice import Lattice, bond_threshold, geometry
from perconet.oracle import build_graph_state, check_stabilizers, verify_rewrite
from perconet.percolation import (count_edge_disjoint_crossings,
                                  crossing_probability,
                                  largest_cluster_scaling, sample)
from perconet.renorm import (ExtractionError, extract,
                             hexagonal_topology_matches, sample_graph)


def _linear_fit(x, y):
    """Least squares y = a + b x; returns (a, b, r2, slope_stderr)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(resid @ resid) / ss_tot
    dof = len(x) - 2
    se = 0.0
    if dof > 0:
        se = math.sqrt(float(resid @ resid) / dof / float(np.sum((x - x.mean()) ** 2)))
    return float(coef[0]), float(coef[1]), r2, se


def _half_crossing_point(ps, estimates):
    """Linear interpolation of the p where the crossing curve passes 1/2."""
    assert estimates[0] < 0.5 < estimates[-1], "grid does not bracket 1/2"
    for (p0, q0), (p1, q1) in zip(zip(ps, estimates), zip(ps[1:], estimates[1:])):
        if q0 <= 0.5 <= q1:
            return p0 + (p1 - p0) * (0.5 - q0) / (q1 - q0)
    raise AssertionError("crossing curve is not monotone through 1/2")


def test_criterion_01_rewrite_rules_certified_on_every_small_graph():
    """Z and Y rules hold, both outcomes, on all connected graphs up to 6 vertices."""
    import networkx as nx
    from networkx.generators.atlas import graph_atlas_g

    t0 = time.perf_counter()
    graphs = checks = passed = 0
    for G in graph_atlas_g()[1:]:
        n = G.number_of_nodes()
        if n > 6:
            break
        if n == 0 or not nx.is_connected(G):
            continue
        graphs += 1
        g = GraphState(range(n), G.edges())
        for v in range(n):
            for basis, rule in (("Z", measure_z), ("Y", measure_y)):
                checks += 1
                passed += verify_rewrite(g, v, basis, rule(g, v))
    assert graphs == 143
    assert checks == 1620
    assert passed == checks
    assert time.perf_counter() - t0 < 300


def test_criterion_02_statevectors_satisfy_all_stabilizers():
    good = 0
    for i in range(1000):
        rng = stream(2024, "stab", i)
        n = int(rng.integers(1, 11))
        mask = rng.random((n, n)) < 0.4
        edges = [(a, b) for a in range(n) for b in range(a + 1, n) if mask[a, b]]
        g = GraphState(range(n), edges)
        good += check_stabilizers(g, build_graph_state(g), tol=1e-8)
    assert good == 1000


def test_criterion_03_square_crossing_threshold():
    lat = Lattice("square", (64, 64))
    ps = (0.48, 0.50, 0.52)
    estimates = [crossing_probability(lat, p, trials=4000, seed=3).estimate
                 for p in ps]
    p_half = _half_crossing_point(ps, estimates)
    assert abs(p_half - 0.50) <= 0.02


def test_criterion_04_diamond_crossing_threshold():
    lat = Lattice("diamond", (32, 32, 32))
    ps = (0.38, 0.389, 0.40)
    estimates = [crossing_probability(lat, p, trials=10_000, seed=1).estimate
                 for p in ps]
    p_half = _half_crossing_point(ps, estimates)
    assert abs(p_half - 0.389) <= 0.02


def test_criterion_05_block_size_grows_at_most_logarithmically():
    t0 = time.perf_counter()
    sizes = (4, 8, 16, 32)
    ks = []
    for L in sizes:
        res = block_size_search("diamond", 0.9, 0.5, L, 0.5, trials=100,
                                n_blocks=1000, seed=0, k_max=12)
        assert res.table[-1]["estimate"] >= 0.5
        ks.append(res.k)
    assert all(b >= a for a, b in zip(ks, ks[1:])), f"k(L) not nondecreasing: {ks}"
    x = np.log(np.array(sizes, float))
    y = np.array(ks, float)
    if float(np.sum((y - y.mean()) ** 2)) > 0:
        _, _, r2_log, _ = _linear_fit(x, y)                  # k = a + b log L
        a_p, b_p, _, se = _linear_fit(x, np.log(y))          # k = A * L^b
        pred = np.exp(a_p + b_p * x)
        r2_pow = 1.0 - float(np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2))
        ci = (b_p - 1.96 * se, b_p + 1.96 * se)
        assert r2_log > r2_pow or ci[0] <= 0.0 <= ci[1], \
            f"power law preferred: r2_log={r2_log:.3f} r2_pow={r2_pow:.3f} ci={ci}"
    assert time.perf_counter() - t0 < 900


def test_criterion_06_fusion_success_rate_at_half():
    hits = sum(fuse_stars(0.5, seed).success for seed in range(100_000))
    assert abs(hits / 1e5 - 0.75) <= 0.01


def test_criterion_07_subcritical_largest_cluster_grows_like_log():
    rep = largest_cluster_scaling("square", 0.3, [16, 32, 64, 128],
                                  trials=200, seed=7)
    assert rep.log_fit.r2 > 0.9


def test_criterion_08_supercritical_extraction_rate_and_exactness():
    L, p = 3, 0.8
    # size the lattice the way the block-size search does: smallest k whose
    # pilot success rate clears the 0.9 target at its 95% lower bound
    chosen = None
    for k in range(1, 9):
        n = 2 * k * L
        lat = Lattice("square", (n, n))
        geometry(lat)
        ok = 0
        for i in range(100):
            s = sample(lat, p, 1.0, seed=5, path=("c8-pilot", k, i))
            try:
                extract(s, L=L)
                ok += 1
            except ExtractionError:
                pass
        phat = ok / 100
        if phat - 1.96 * math.sqrt(phat * (1 - phat) / 100) >= 0.9:
            chosen = k
            break
    assert chosen is not None, "no block size cleared the pilot"

    n = 2 * chosen * L
    lat = Lattice("square", (n, n))
    geometry(lat)
    successes = 0
    for i in range(100):
        s = sample(lat, p, 1.0, seed=6, path=("c8", i))
        try:
            res = extract(s, L=L)
        except ExtractionError:
            continue
        labels = {site: lbl for lbl, site in res.path_plan.mid_qubits.items()}
        assert hexagonal_topology_matches(res.renormalized_graph, L, labels)
        # every success must replay exactly under the recorded schedule
        assert apply_schedule(sample_graph(s), res.schedule) == res.renormalized_graph
        successes += 1
    assert successes >= 90


def test_criterion_09_edge_disjoint_crossings_scale_linearly():
    sizes = (16, 32, 64)
    means = []
    for n in sizes:
        lat = Lattice("square", (n, n))
        geometry(lat)
        vals = [count_edge_disjoint_crossings(
                    sample(lat, 0.7, 1.0, seed=9, path=("flow", n, i)))
                for i in range(100)]
        means.append(float(np.mean(vals)))
    _, slope, r2, _ = _linear_fit(sizes, means)
    assert slope > 0
    assert r2 > 0.9


def test_criterion_10_swap_preserves_singlet_conversion_rate():
    for lam in np.linspace(0.5, 1.0, 1000):
        pair = SchmidtPair.from_lambda1(float(lam))
        expected = min(1.0, 2.0 * (1.0 - float(lam)))
        assert abs(expected_scp(swap(pair, pair)) - expected) < 1e-12


def test_criterion_11_quantum_preprocessing_beats_direct_conversion():
    pair = SchmidtPair.from_lambda1(0.823)
    cep, quantum = hex_to_tri(pair)
    assert cep.edge_probability < 0.6527 < bond_threshold("hexagonal") + 1e-4
    assert quantum.edge_probability > 0.3473 > bond_threshold("triangular") - 1e-4
    assert not cep.percolates and quantum.percolates
    # Monte Carlo confirmation on L=64 lattices (crossings along the axis
    # with the sparse bond direction)
    cep_mc = crossing_probability(Lattice("hexagonal", (64, 64)),
                                  cep.edge_probability, axis=1,
                                  trials=1000, seed=11)
    q_mc = crossing_probability(Lattice("triangular", (64, 64)),
                                quantum.edge_probability, axis=1,
                                trials=1000, seed=11)
    assert cep_mc.estimate < 0.5
    assert q_mc.estimate > 0.5


def test_criterion_12_deterministic_singlet_boundary():
    assert abs(LAMBDA1_STAR - 0.6499) <= 5e-4
    for lam in np.linspace(0.5, 0.8, 3001):
        res = square_distill(SchmidtPair.from_lambda1(float(lam)))
        assert res.deterministic_singlet == (lam <= LAMBDA1_STAR), lam


def test_criterion_13_doubled_square_factor_vs_sqrt_two():
    t0 = time.perf_counter()
    rep = square_double_compare(0.52, 128, 10_000, seed=0)
    assert abs(rep.aa_prime_factor - 1.31) <= 0.05
    assert rep.reference_factor == pytest.approx(math.sqrt(2))
    assert rep.aa_prime_factor < rep.reference_factor
    assert time.perf_counter() - t0 < 600


def test_criterion_14_reruns_are_byte_identical(tmp_path):
    configs = (
        {"experiment": "squareDouble", "p": 0.6, "L": 16, "trials": 400,
         "seed": 14},
        {"experiment": "events", "L": 2, "k": 2, "p_bond": 0.6, "trials": 300,
         "seed": 14},
    )
    for base in configs:
        blobs = []
        for run, threads in enumerate((1, 2, 3, 1)):
            out = tmp_path / f"{base['experiment']}-{run}"
            cfg_path = tmp_path / f"{base['experiment']}-{run}.json"
            cfg_path.write_text(json.dumps({**base, "out": str(out)}))
            proc = subprocess.run(
                [sys.executable, "-m", "perconet.cli", base["experiment"],
                 "--config", str(cfg_path), "--threads", str(threads)],
                capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            blobs.append((out / f"{base['experiment']}.csv").read_bytes())
        assert len(set(blobs)) == 1, f"{base['experiment']} CSV not reproducible"
