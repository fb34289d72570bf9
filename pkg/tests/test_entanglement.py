"""Entanglement strategies: closed forms cross-checked against direct linear algebra."""

import itertools
import math

import numpy as np
import pytest

from perconet.entanglement import (LAMBDA1_STAR, STRATEGIES, ProcrusteanFilter,
                                   SchmidtPair, SquareDistillResult,
                                   StrategyReport, SwapOutcome, TwoQubitMatrix,
                                   bell_measurement, chain_concurrence,
                                   expected_scp, hex_to_tri, hex_to_tri_sweep,
                                   hex_to_tri_window, procrustean_filter, scp,
                                   square_distill, square_double_compare, swap)
from perconet.lattice import bond_threshold


def test_schmidt_pair():
    pair = SchmidtPair(0.8, 0.2)
    assert pair.concurrence() == pytest.approx(2 * math.sqrt(0.16))
    assert np.allclose(pair.state(), np.diag([math.sqrt(0.8), math.sqrt(0.2)]))
    assert SchmidtPair.from_lambda1(0.6) == SchmidtPair(0.6, 0.4)
    with pytest.raises(ValueError):
        SchmidtPair(0.4, 0.6)
    with pytest.raises(ValueError):
        SchmidtPair(0.8, 0.1)
    with pytest.raises(ValueError):
        SchmidtPair(1.2, -0.2)


def test_two_qubit_matrix():
    m = TwoQubitMatrix(np.eye(2) / math.sqrt(2))
    assert m.abs_det == pytest.approx(0.5)
    with pytest.raises(ValueError):
        TwoQubitMatrix(np.eye(2))
    with pytest.raises(ValueError):
        TwoQubitMatrix(np.ones((2, 3)) / math.sqrt(6))


def test_bell_measurement_is_complete():
    outcomes = bell_measurement()
    assert len(outcomes) == 4
    total = sum(np.outer(m.t.reshape(4), m.t.reshape(4).conj()) for m in outcomes)
    assert np.allclose(total, np.eye(4), atol=1e-12)
    for m in outcomes:
        assert m.abs_det == pytest.approx(0.5)


def test_strategy_report():
    r = StrategyReport("CEP", 0.7, 0.6527)
    assert r.percolates
    assert not StrategyReport("Swap", 0.6, 0.6527).percolates
    with pytest.raises(ValueError):
        StrategyReport("Teleport", 0.5, 0.5)
    assert STRATEGIES == ("CEP", "Swap", "HexToTri", "SquareDistill", "SquareDouble")


def test_scp_values():
    assert scp(SchmidtPair(0.5, 0.5)) == 1.0
    assert scp(SchmidtPair(1.0, 0.0)) == 0.0
    assert scp(SchmidtPair(0.75, 0.25)) == pytest.approx(0.5)
    assert scp(SchmidtPair(0.75, 0.25), copies=2) == pytest.approx(0.875)
    assert scp(SchmidtPair(0.6, 0.4), copies=2) == 1.0
    with pytest.raises(ValueError):
        scp(SchmidtPair(0.6, 0.4), copies=3)


def test_procrustean_filter_state_check():
    """Applying the filter to the state leaves a singlet with the SCP weight."""
    for lambda1 in (0.5, 0.62, 0.8, 0.97):
        pair = SchmidtPair.from_lambda1(lambda1)
        f = procrustean_filter(pair)
        assert isinstance(f, ProcrusteanFilter)
        assert f.success == pytest.approx(2 * (1 - lambda1))
        t_out = f.m_a @ pair.state() @ f.m_b.T
        assert np.linalg.norm(t_out) ** 2 == pytest.approx(f.success)
        spectrum = np.linalg.svd(t_out / np.linalg.norm(t_out), compute_uv=False) ** 2
        assert np.allclose(spectrum, [0.5, 0.5], atol=1e-12)
        # the filter element is physical: m^dagger m <= identity
        eigs = np.linalg.eigvalsh(f.m_a.conj().T @ f.m_a)
        assert eigs.max() <= 1 + 1e-12


def test_swap_against_statevector():
    """Bell-projecting the joint state reproduces the outcome table."""
    for lambda1 in (0.5, 0.6, 0.75, 0.9, 0.99):
        pair = SchmidtPair.from_lambda1(lambda1)
        outcomes = swap(pair, pair)
        t1 = pair.state()
        t2 = pair.state()
        direct = []
        for m in bell_measurement():
            t_ac = t1 @ m.t.conj() @ t2
            prob = float(np.linalg.norm(t_ac) ** 2)
            spec = np.sort(np.linalg.svd(t_ac, compute_uv=False) ** 2)[::-1]
            direct.append((prob, spec[0] / prob))
        got = sorted((o.probability, o.pair.lambda1) for o in outcomes)
        assert np.allclose(sorted(direct), got, atol=1e-12)
        assert sum(o.probability for o in outcomes) == pytest.approx(1.0)


def test_swap_frozen_example():
    pair = SchmidtPair(0.8, 0.2)
    outcomes = swap(pair, pair)
    probs = sorted(o.probability for o in outcomes)
    assert probs == pytest.approx([0.16, 0.16, 0.34, 0.34])
    skewed = max(o.pair.lambda1 for o in outcomes)
    assert skewed == pytest.approx(0.64 / 0.68)
    assert min(o.pair.lambda1 for o in outcomes) == 0.5
    with pytest.raises(ValueError):
        swap(pair, SchmidtPair(0.7, 0.3))


def test_swap_preserves_scp():
    """Expected SCP after swapping equals the one-copy SCP, to 1e-12."""
    for lambda1 in np.linspace(0.5, 1.0, 1001):
        pair = SchmidtPair.from_lambda1(float(lambda1))
        assert abs(expected_scp(swap(pair, pair)) - scp(pair, 1)) < 1e-12


def test_chain_concurrence_no_station():
    pair = SchmidtPair(0.8, 0.2)
    assert chain_concurrence([pair], []) == pytest.approx(pair.concurrence())


def test_chain_concurrence_direct_enumeration():
    """Factorized formula vs the explicit sum over outcome tuples (N=2)."""
    pairs = [SchmidtPair.from_lambda1(x) for x in (0.7, 0.85, 0.6)]
    sites = [bell_measurement(), bell_measurement()]
    total = 0.0
    for m1, m2 in itertools.product(*sites):
        t = pairs[0].state() @ m1.t.conj() @ pairs[1].state() @ m2.t.conj() @ pairs[2].state()
        total += 2 * abs(np.linalg.det(t))
    assert chain_concurrence(pairs, sites) == pytest.approx(total, abs=1e-12)


def test_chain_concurrence_bell_chain():
    bell = SchmidtPair(0.5, 0.5)
    for n in range(4):
        c = chain_concurrence([bell] * (n + 1), [bell_measurement()] * n)
        assert c == pytest.approx(1.0)


def test_chain_concurrence_exponential_decay():
    pair = SchmidtPair(0.8, 0.2)
    cs = [chain_concurrence([pair] * (n + 1), [bell_measurement()] * n)
          for n in range(6)]
    for n, c in enumerate(cs):
        assert c == pytest.approx(0.8 ** (n + 1))
    slopes = np.diff(np.log(cs))
    assert np.allclose(slopes, math.log(0.8), atol=1e-12)


def test_chain_concurrence_validation():
    pair = SchmidtPair(0.8, 0.2)
    with pytest.raises(ValueError):
        chain_concurrence([], [])
    with pytest.raises(ValueError):
        chain_concurrence([pair, pair], [])
    incomplete = list(bell_measurement())[:3]
    with pytest.raises(ValueError):
        chain_concurrence([pair, pair], [incomplete])


def test_hex_to_tri_at_advantage_point():
    cep, quantum = hex_to_tri(SchmidtPair.from_lambda1(0.823))
    assert cep.edge_probability == pytest.approx(2 * (1 - 0.823 ** 2))
    assert cep.threshold == pytest.approx(bond_threshold("hexagonal"))
    assert not cep.percolates
    assert quantum.edge_probability == pytest.approx(0.354)
    assert quantum.threshold == pytest.approx(bond_threshold("triangular"))
    assert quantum.percolates


def test_hex_to_tri_window():
    lo, hi = hex_to_tri_window()
    s = math.sin(math.pi / 18)
    assert lo == pytest.approx(math.sqrt(0.5 + s), abs=1e-15)
    assert hi == pytest.approx(1 - s, abs=1e-15)
    assert 0.82 < lo < hi < 0.827
    # inside the window only the swap strategy percolates
    for lam in np.linspace(lo + 1e-9, hi - 1e-9, 101):
        cep, quantum = hex_to_tri(SchmidtPair.from_lambda1(float(lam)))
        assert quantum.percolates and not cep.percolates
    # below it CEP percolates too; above it nothing does
    cep, quantum = hex_to_tri(SchmidtPair.from_lambda1(0.7))
    assert cep.percolates and quantum.percolates
    cep, quantum = hex_to_tri(SchmidtPair.from_lambda1(0.9))
    assert not cep.percolates and not quantum.percolates


def test_hex_to_tri_sweep_rows():
    rows = hex_to_tri_sweep([0.7, 0.823])
    assert [r["lambda1"] for r in rows] == [0.7, 0.823]
    for r in rows:
        cep, quantum = hex_to_tri(SchmidtPair.from_lambda1(r["lambda1"]))
        assert r["cep_probability"] == cep.edge_probability
        assert r["cep_percolates"] == cep.percolates
        assert r["quantum_threshold"] == quantum.threshold
        assert set(r) == {"lambda1", "cep_probability", "cep_threshold",
                          "cep_percolates", "quantum_probability",
                          "quantum_threshold", "quantum_percolates"}


def test_square_distill_cases():
    res = square_distill(SchmidtPair(0.5, 0.5))
    assert isinstance(res, SquareDistillResult)
    assert res.lambda2_prime == pytest.approx(0.5)
    assert res.deterministic_singlet
    res6 = square_distill(SchmidtPair(0.6, 0.4))
    assert res6.lambda2_prime == pytest.approx(0.36)
    assert res6.lambda1_double_prime == 0.5
    assert res6.deterministic_singlet
    res66 = square_distill(SchmidtPair(0.66, 0.34))
    assert res66.lambda1_double_prime > 0.5
    assert not res66.deterministic_singlet


def test_lambda1_star():
    assert LAMBDA1_STAR == pytest.approx(0.6498501575537587, abs=1e-15)
    # the closed form solves (1 - lambda2')^2 = 1/2 exactly at the boundary
    prod = 4 * LAMBDA1_STAR * (1 - LAMBDA1_STAR)
    lambda2p = 0.5 * (1 - math.sqrt(1 - prod ** 2))
    assert (1 - lambda2p) ** 2 == pytest.approx(0.5, abs=1e-12)
    # the deterministic-singlet predicate flips exactly there
    for lam in np.linspace(0.5, 0.75, 2001):
        got = square_distill(SchmidtPair.from_lambda1(float(lam))).deterministic_singlet
        assert got == (lam <= LAMBDA1_STAR)


def test_square_double_compare_full_lattice():
    rep = square_double_compare(1.0, 16, trials=30, seed=0)
    assert rep.theta == 1.0 and rep.pair_probability == 1.0
    assert rep.lhs_estimate == 1.0
    assert rep.rhs_bound_estimate == 1.0
    assert rep.aa_prime_factor == 1.0
    assert rep.reference_factor == pytest.approx(math.sqrt(2))


def test_square_double_compare_thread_invariance():
    one = square_double_compare(0.6, 16, trials=200, seed=3, threads=1)
    four = square_double_compare(0.6, 16, trials=200, seed=3, threads=4)
    assert one.theta == four.theta
    assert one.pair_probability == four.pair_probability
    assert 0.0 < one.pair_probability <= one.theta <= 1.0


def test_square_double_compare_domain():
    with pytest.raises(ValueError):
        square_double_compare(0.3, 16, trials=10)
    with pytest.raises(ValueError):
        square_double_compare(0.6, 8, trials=10)
