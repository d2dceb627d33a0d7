import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from maxtour import (
    PRESETS,
    CardinalityOracle,
    Completion,
    ContractError,
    CoverageOracle,
    IndependenceSystem,
    Instance,
    InvalidInstanceError,
    MatchingSource,
    ModularOracle,
    OracleNotSubmodularError,
    PipelineConfig,
    Reduction,
    SystemKind,
    ValueOracle,
    best_edge_reduction,
    brute_force_derangement,
    brute_force_two_matching,
    complete_tour,
    curvature,
    decompose_matching,
    greedy_matching,
    greedy_matching_directed,
    greedy_tour,
    is_independent,
    is_tour,
    linear_relaxation_matching,
    matching_pipeline,
    max_assignment,
    max_weight_two_matching,
    pipeline_ratio,
    reduce_matching,
    reduce_set,
    relaxed_weights,
)

from _corpus import coverage_instance, modular_instance, random_subset


def _value(weights, s):
    return math.fsum(weights[e] for e in s)


def test_two_matching_all_ones_k4():
    inst = Instance(4)
    m = max_weight_two_matching(inst, [1.0] * 6)
    assert len(m) == 4
    assert is_independent(inst, SystemKind.TWO_MATCHING, m)
    assert all(sum(v in inst.edges[e] for e in m) == 2 for v in range(4))


def test_two_matching_zero_and_negative_weights():
    inst = Instance(5)
    assert _value([0.0] * 10, max_weight_two_matching(inst, [0.0] * 10)) == 0
    w = [-1.0] * 10
    w[3] = 2.0
    assert max_weight_two_matching(inst, w) == frozenset({3})


def _subset_brute_force(inst, weights):
    # independent of the recursive enumerator: scan every subset
    best = 0.0
    m = inst.num_edges
    for mask in range(1 << m):
        s = [e for e in range(m) if mask >> e & 1]
        if is_independent(inst, SystemKind.TWO_MATCHING, s):
            best = max(best, _value(weights, s))
    return best


@pytest.mark.parametrize("seed", range(8))
def test_two_matching_matches_subset_scan(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 6))
    inst = Instance(n)
    w = rng.uniform(-2, 10, inst.num_edges)
    assert _value(w, max_weight_two_matching(inst, w)) == _subset_brute_force(inst, w)


@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
def test_two_matching_matches_brute_force(n, seed):
    inst = Instance(n)
    w = np.random.default_rng(seed).uniform(-1, 10, inst.num_edges)
    m = max_weight_two_matching(inst, w)
    assert is_independent(inst, SystemKind.TWO_MATCHING, m)
    assert _value(w, m) == brute_force_two_matching(inst, weights=w).value


def test_assignment_examples():
    w = np.array([[0, 9, 1], [1, 0, 9], [9, 1, 0]], dtype=float)
    assert max_assignment(w) == [1, 2, 0]
    assert max_assignment(np.array([[5.0, 2.0], [3.0, 7.0]])) == [1, 0]
    with pytest.raises(InvalidInstanceError):
        max_assignment(np.zeros((1, 1)))


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_assignment_matches_derangements(n, seed):
    w = np.random.default_rng(seed).uniform(-5, 10, (n, n))
    sigma = max_assignment(w)
    assert all(sigma[i] != i for i in range(n))
    _, best = brute_force_derangement(w)
    assert math.fsum(w[i, sigma[i]] for i in range(n)) == best


def test_relaxed_weights_upper_bound():
    inst, o = coverage_instance(8, 21)
    w = relaxed_weights(o)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        s = random_subset(rng, inst.num_edges, rng.random())
        assert _value(w, s) >= o.evaluate(s)


@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
def test_linear_relaxation_exact_for_modular(n, seed):
    inst, o = modular_instance(n, seed)
    rep = linear_relaxation_matching(inst, o, kappa=0.0)
    assert rep.certificate.ratio == 1.0
    assert rep.value == brute_force_two_matching(inst, oracle=o).value


def test_linear_relaxation_on_duplicates_has_zero_ratio():
    inst = Instance(3, coords=[(10, 10), (50, 50), (10, 10)])
    o = CoverageOracle(inst, [3.0] * 3)
    kappa = curvature(o).kappa
    assert kappa == 1.0
    assert linear_relaxation_matching(inst, o, kappa=kappa).certificate.ratio == 0.0


def test_linear_relaxation_k7_coverage():
    inst, o = coverage_instance(7, 77, thickness="uniform")
    kappa = curvature(o).kappa
    rep = linear_relaxation_matching(inst, o, kappa=kappa)
    opt = brute_force_two_matching(inst, oracle=o).value
    assert rep.value >= (1 - kappa) * opt * (1 - 1e-9)


def test_linear_relaxation_directed():
    inst, o = modular_instance(5, 3, directed=True)
    rep = linear_relaxation_matching(inst, o, kappa=0.0)
    assert rep.certificate.reference == "assignment"
    assert rep.value == brute_force_two_matching(inst, oracle=o).value


def test_reduce_set_cardinality_takes_first_candidate():
    inst = Instance(8)
    o = CardinalityOracle(inst)
    parts = [[0, 1, 2], [3, 4, 5, 6], [7, 8, 9]]
    removed = reduce_set(o, parts)
    assert removed == frozenset({0, 3, 7})
    total = frozenset(range(10))
    assert o.evaluate(total - removed) == 7 >= 2 / 3 * 10


def test_reduce_set_first_elements_lightest():
    inst = Instance(4)
    o = ModularOracle(inst, [1.0, 5.0, 5.0, 1.0, 5.0, 5.0])
    assert reduce_set(o, [[0, 1, 2], [3, 4, 5]]) == frozenset({0, 3})


def test_reduce_set_skips_failing_candidate():
    # the first element of each part carries most of the weight, so
    # candidate 0 keeps 4 of 24 and candidate 1 is the first to pass
    inst = Instance(4)
    o = ModularOracle(inst, [10.0, 1.0, 1.0, 10.0, 1.0, 1.0])
    parts = [[0, 1, 2], [3, 4, 5]]
    assert o.evaluate({1, 2, 4, 5}) < 2 / 3 * 24
    removed = reduce_set(o, parts)
    assert removed == frozenset({1, 4})
    assert o.evaluate(frozenset(range(6)) - removed) >= 2 / 3 * 24


def test_reduce_set_contract_errors():
    inst = Instance(5)
    o = CardinalityOracle(inst)
    with pytest.raises(ContractError):
        reduce_set(o, [[0, 1], [1, 2]])
    with pytest.raises(ContractError):
        reduce_set(o, [[0, 1], [2]])
    with pytest.raises(ContractError):
        reduce_set(o, [[0, 1]], universe=[0, 2])
    assert reduce_set(o, []) == frozenset()


class _AllOrNothing(ValueOracle):
    """1 on the full edge set, 0 elsewhere: monotone but not submodular."""

    def _value(self, s):
        return float(len(s) == self.instance.num_edges)


def test_reduce_set_detects_non_submodular_oracle():
    inst = Instance(3)
    with pytest.raises(OracleNotSubmodularError):
        reduce_set(_AllOrNothing(inst), [[0, 1, 2]])


def test_reduce_matching_hamiltonian_cycle():
    inst, o = coverage_instance(8, 4)
    tour = greedy_tour(inst, o).solution
    reduced = reduce_matching(inst, o, tour)
    assert len(tour - reduced) == 1
    assert o.evaluate(reduced) >= (1 - 1 / 8) * o.evaluate(tour)


def test_reduce_matching_two_triangles():
    inst, o = coverage_instance(6, 8)
    m = inst.cycle_edges([0, 1, 2]) | inst.cycle_edges([3, 4, 5])
    reduced = reduce_matching(inst, o, m)
    assert len(m - reduced) == 2
    assert all(c.kind == "path" for c in decompose_matching(inst, reduced))
    assert o.evaluate(reduced) >= 2 / 3 * o.evaluate(m)


def test_reduce_matching_keeps_path_edge():
    inst = Instance(5)
    o = ModularOracle(inst, [1.0] * 10)
    m = inst.cycle_edges([0, 1, 2]) | {inst.edge_id(3, 4)}
    reduced = reduce_matching(inst, o, m)
    assert inst.edge_id(3, 4) in reduced
    assert len(reduced) == 3


def test_reduce_matching_directed_two_cycle():
    inst, o = coverage_instance(5, 6, directed=True)
    m = inst.cycle_edges([0, 1]) | inst.cycle_edges([2, 3, 4])
    reduced = reduce_matching(inst, o, m)
    assert len(m - reduced) == 2
    assert o.evaluate(reduced) >= 0.5 * o.evaluate(m)


def test_reduce_matching_rejects_bad_degrees():
    inst = Instance(5)
    o = CardinalityOracle(inst)
    with pytest.raises(ContractError):
        reduce_matching(inst, o, {0, 1, 2})


@pytest.mark.parametrize("seed", range(6))
def test_reductions_on_k10_matchings(seed):
    inst, o = coverage_instance(10, 300 + seed)
    m = greedy_matching(inst, o).solution
    cycles = [c for c in decompose_matching(inst, m) if c.kind == "subtour"]
    k = min((len(c.edges) for c in cycles), default=None)
    fm = o.evaluate(m)
    for reduced in (reduce_matching(inst, o, m), best_edge_reduction(inst, o, m)):
        assert is_independent(inst, SystemKind.TSP_UNDIRECTED, reduced)
        if k is not None:
            assert o.evaluate(reduced) >= (1 - 1 / k) * fm * (1 - 1e-12)
            assert o.evaluate(reduced) >= 2 / 3 * fm * (1 - 1e-12)


def test_best_edge_removes_lightest_edge_per_cycle():
    inst = Instance(6)
    w = np.arange(1.0, 16.0)
    o = ModularOracle(inst, w)
    m = inst.cycle_edges([0, 1, 2]) | inst.cycle_edges([3, 4, 5])
    reduced = best_edge_reduction(inst, o, m)
    assert m - reduced == {inst.edge_id(0, 1), inst.edge_id(3, 4)}


@given(st.integers(4, 9), st.integers(0, 2**32 - 1))
def test_best_edge_beats_reduce_set_on_one_cycle(n, seed):
    inst, o = coverage_instance(n, seed, thickness="uniform")
    order = np.random.default_rng(seed).permutation(n)
    cycle = inst.cycle_edges(order.tolist())
    a = o.evaluate(best_edge_reduction(inst, o, cycle))
    b = o.evaluate(reduce_matching(inst, o, cycle))
    assert a >= b
    assert a >= (1 - 1 / n) * o.evaluate(cycle) * (1 - 1e-12)


def test_complete_tour_cases():
    inst, o = coverage_instance(8, 12)
    tour = greedy_tour(inst, o).solution
    for mode in Completion:
        assert complete_tour(inst, o, tour, mode) == tour
    assert complete_tour(inst, o, (), Completion.GREEDY) == tour
    with pytest.raises(ContractError):
        complete_tour(inst, o, inst.cycle_edges([0, 1, 2]))


@given(st.integers(3, 10), st.integers(0, 2**32 - 1), st.sampled_from(list(Completion)), st.booleans())
def test_complete_tour_contains_partial(n, seed, mode, directed):
    inst, o = coverage_instance(n, seed, directed=directed)
    rng = np.random.default_rng(seed)
    kind = SystemKind.TSP_DIRECTED if directed else SystemKind.TSP_UNDIRECTED
    system = IndependenceSystem(inst, kind)
    for e in map(int, rng.permutation(inst.num_edges)):
        if len(system) >= n - 2:
            break
        if system.can_add(e) and rng.random() < 0.5:
            system.add(e)
    partial = system.edges
    tour = complete_tour(inst, o, partial, mode, seed=seed)
    assert is_tour(inst, tour) and partial <= tour
    assert o.evaluate(tour) >= o.evaluate(partial)
    assert tour == complete_tour(inst, o, partial, mode, seed=seed)


def test_presets():
    assert PRESETS["GM"] == PipelineConfig("greedy", "best-edge", "greedy")
    assert PRESETS["GM2"] == PipelineConfig("greedy", "reduceset", "greedy")
    assert PRESETS["GM3"] == PipelineConfig("greedy", "reduceset", "arbitrary")
    assert PRESETS["LGmatching"] == PipelineConfig("best-of-both", "best-edge", "greedy")
    assert PRESETS["Lmatching"] == PipelineConfig("linear", "best-edge", "greedy")
    assert PRESETS["GM"].reduction is Reduction.BEST_EDGE


def test_pipeline_ratio_beats_greedy_below_threshold():
    threshold = (math.sqrt(3) - 1) / 2
    for kappa in np.linspace(0, 1, 101):
        pipe = pipeline_ratio(MatchingSource.BEST_OF_BOTH, kappa, directed=False)
        assert pipe == pytest.approx(max(2 / (3 * (2 + kappa)), 2 / 3 * (1 - kappa)), rel=1e-15)
        if kappa < threshold - 1e-9:
            assert pipe > 1 / (2 + kappa)
        elif kappa > threshold + 1e-9:
            assert pipe < 1 / (2 + kappa)
    assert pipeline_ratio(MatchingSource.BEST_OF_BOTH, 0.0, directed=True) == 0.5


@pytest.mark.parametrize("seed", range(5))
def test_modular_pipeline_two_thirds(seed):
    inst, o = modular_instance(7, seed)
    rep = matching_pipeline(inst, o, PRESETS["LGmatching"], kappa=0.0)
    assert rep.certificate.ratio == pytest.approx(2 / 3)
    opt = brute_force_two_matching(inst, oracle=o).value
    assert rep.value >= 2 / 3 * opt * (1 - 1e-9)


@pytest.mark.parametrize("name", ["GM", "GM2", "GM3", "LGmatching", "Lmatching"])
def test_pipelines_return_tours(name):
    for seed in range(3):
        inst, o = coverage_instance(10, 40 + seed)
        rep = matching_pipeline(inst, o, PRESETS[name], seed=seed, name=name)
        assert is_tour(inst, rep.solution)
        assert rep.algorithm == name
        assert rep.value == o.evaluate(rep.solution)
        dinst, do = coverage_instance(6, 40 + seed, directed=True)
        assert is_tour(dinst, matching_pipeline(dinst, do, PRESETS[name], seed=seed).solution)


def test_best_of_both_keeps_larger_matching():
    inst, o = coverage_instance(9, 3)
    rep = matching_pipeline(inst, o, PRESETS["LGmatching"])
    g = greedy_matching(inst, o).value
    lin = linear_relaxation_matching(inst, o).value
    assert rep.details["matching_value"] == max(g, lin)


def test_pipeline_rejects_small_instances():
    inst = Instance(2)
    with pytest.raises(InvalidInstanceError):
        matching_pipeline(inst, CardinalityOracle(inst))


def test_greedy_directed_matching_reference():
    inst, o = modular_instance(5, 0, directed=True)
    rep = greedy_matching_directed(inst, o)
    assert rep.certificate.reference == "assignment"
    assert is_independent(inst, SystemKind.DEGREE_IN_OUT, rep.solution)


def test_subset_scan_counts_agree_with_enumerator():
    # every simple 2-matching of K4 and K5, counted two ways
    for n, expected in ((4, 41), (5, 253)):
        inst = Instance(n)
        count = sum(
            1
            for r in range(inst.num_edges + 1)
            for s in itertools.combinations(range(inst.num_edges), r)
            if is_independent(inst, SystemKind.TWO_MATCHING, s)
        )
        assert count == expected
        assert brute_force_two_matching(inst, weights=[-1.0] * inst.num_edges).enumerated == expected
