import logging
import math

import pytest

from maxtour import (
    PRESETS,
    CombinedCostOracle,
    Instance,
    ModularOracle,
    TooLargeError,
    brute_force_derangement,
    brute_force_tour,
    brute_force_two_matching,
    curvature,
    edge_lengths,
    greedy_tour,
    matching_pipeline,
    verify_certificates,
)

from _corpus import coverage_instance, k4_modular, modular_instance


@pytest.mark.parametrize("n", range(3, 9))
def test_tour_counts_undirected(n):
    inst, o = modular_instance(n, n)
    assert brute_force_tour(inst, o).enumerated == math.factorial(n - 1) // 2


@pytest.mark.parametrize("n", range(2, 7))
def test_tour_counts_directed(n):
    inst, o = modular_instance(n, n, directed=True)
    assert brute_force_tour(inst, o).enumerated == math.factorial(n - 1)


def test_k4_brute_force_tour():
    inst, o = k4_modular()
    res = brute_force_tour(inst, o)
    assert res.value == 13 and res.enumerated == 3
    assert res.optimum == inst.edge_set([(0, 1), (1, 2), (2, 3), (0, 3)])
    assert res.value == o.evaluate(res.optimum)


def test_triangle_tour():
    inst, o = modular_instance(3, 0)
    assert brute_force_tour(inst, o).optimum == frozenset({0, 1, 2})


@pytest.mark.parametrize("seed", range(5))
def test_symmetric_directed_matches_undirected(seed):
    und, uo = modular_instance(6, seed)
    d = Instance(6, directed=True)
    do = ModularOracle(d, [uo.weights[und.edge_id(u, v)] for u, v in d.edges])
    assert brute_force_tour(d, do).value == brute_force_tour(und, uo).value


def test_two_matching_examples():
    inst = Instance(4)
    assert brute_force_two_matching(inst, weights=[1.0] * 6).value == 4
    assert brute_force_two_matching(inst, weights=[0.0] * 6).value == 0
    with pytest.raises(ValueError):
        brute_force_two_matching(inst)


@pytest.mark.parametrize("seed", range(6))
def test_two_matching_at_least_tour(seed):
    inst, o = coverage_instance(7, seed)
    assert brute_force_two_matching(inst, oracle=o).value >= brute_force_tour(inst, o).value
    d, do = coverage_instance(5, seed, directed=True)
    assert brute_force_two_matching(d, oracle=do).value >= brute_force_tour(d, do).value


def test_maximal_enumeration_counts():
    for n, maximal in ((4, 7), (5, 37), (6, 187)):
        inst, o = modular_instance(n, 0)
        assert brute_force_two_matching(inst, oracle=o).enumerated == maximal


def test_caps(caplog):
    inst, o = modular_instance(11, 0)
    with pytest.raises(TooLargeError):
        brute_force_tour(inst, o)
    with pytest.raises(TooLargeError):
        brute_force_two_matching(*modular_instance(9, 0)[:1], weights=[1.0] * 36)
    with pytest.raises(TooLargeError):
        brute_force_two_matching(modular_instance(8, 0, directed=True)[0], weights=[1.0] * 56)
    small, so = modular_instance(4, 0)
    with caplog.at_level(logging.WARNING):
        brute_force_tour(small, so, cap=12)
    assert "cap raised" in caplog.text


def test_derangement_brute_force():
    perm, value = brute_force_derangement([[0, 2], [3, 0]])
    assert perm == [1, 0] and value == 5


def test_verify_k4_greedy():
    inst, o = k4_modular()
    rep = greedy_tour(inst, o, kappa=0.0)
    (v,) = verify_certificates(inst, o, [rep])
    assert v.passed and v.bound == 6.5 and v.optimum == 13


@pytest.mark.parametrize("seed", range(4))
def test_verify_modular_k7_pipeline(seed):
    inst, o = modular_instance(7, seed)
    rep = matching_pipeline(inst, o, PRESETS["LGmatching"], kappa=0.0)
    (v,) = verify_certificates(inst, o, [rep])
    assert v.check == "ratio-vs-two-matching"
    assert v.passed and v.bound == pytest.approx(2 / 3 * v.optimum)


@pytest.mark.parametrize("seed", range(4))
def test_verify_raw_cost_beta_one(seed):
    inst, cov = coverage_instance(6, seed)
    f = CombinedCostOracle(cov, edge_lengths(inst), 1.0, "raw")
    kappa = curvature(f.shifted()).kappa
    reps = [greedy_tour(inst, f, kappa=kappa), matching_pipeline(inst, f.shifted(), PRESETS["GM"], kappa=kappa)]
    verdicts = verify_certificates(inst, f, reps, kappa_shifted=kappa)
    assert len(verdicts) == 6
    assert all(v.passed for v in verdicts), verdicts


def test_verify_refuses_normalized():
    inst, cov = coverage_instance(5, 0)
    f = CombinedCostOracle(cov, edge_lengths(inst), 0.5, "normalized")
    with pytest.raises(ValueError):
        verify_certificates(inst, f, [greedy_tour(inst, f)])


def test_verify_reports_failures():
    inst, o = k4_modular()
    rep = greedy_tour(inst, o, kappa=0.0)
    rep.value = 1.0  # tampered report
    (v,) = verify_certificates(inst, o, [rep])
    assert not v.passed
