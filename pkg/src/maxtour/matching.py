"""Tours built from 2-matchings.

A 2-matching (or, on digraphs, an in/out-degree <= 1 arc set) is obtained
greedily or from the modular relaxation ``w~(S) = sum_e f({e})`` solved
exactly. One edge is then removed from every cycle and the leftover paths are
joined into a tour.
"""

from __future__ import annotations

import enum
import functools
import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import (
    ContractError,
    IndependenceSystem,
    Instance,
    InvalidInstanceError,
    SystemKind,
    decompose_matching,
    is_independent,
    is_tour,
)
from .greedy import (
    Certificate,
    SolveReport,
    _run_greedy,
    greedy_matching,
    greedy_matching_directed,
)
from .objectives import ValueOracle

# relative slack for the retained-value test; absorbs float summation noise only
_RETAIN_RTOL = 1e-12


class OracleNotSubmodularError(RuntimeError):
    """No aligned removal kept the guaranteed share of the value."""


def relaxed_weights(oracle: ValueOracle) -> list[float]:
    """Per-edge singleton values ``f({e})``, the largest marginal each edge can have."""
    return oracle.singleton_values()


def max_weight_two_matching(inst: Instance, weights: Sequence[float]) -> frozenset[int]:
    """Exact maximum-weight simple 2-matching (degree <= 2, not necessarily perfect).

    Reduction to ordinary matching: every vertex gets two copies, every edge
    ``uv`` becomes a path ``u* - a - b - v*`` with weight ``w`` on each of its
    three links. An optimal matching there is worth ``sum(w) + OPT``; edges
    whose two inner nodes are both matched to vertex copies form an optimal
    2-matching. Non-positive edges can never help and are dropped.
    """
    if inst.directed:
        raise InvalidInstanceError("undirected instance required")
    if len(weights) != inst.num_edges:
        raise ContractError("one weight per edge required")
    return _two_matching(inst, tuple(float(w) for w in weights))


# the blossom search is pure Python and dominates at n=50; LGmatching and
# Lmatching solve the same relaxation on the same instance, so memoise it
@functools.lru_cache(maxsize=16)
def _two_matching(inst: Instance, weights: tuple[float, ...]) -> frozenset[int]:
    n = inst.n
    g = nx.Graph()
    g.add_nodes_from(range(2 * n))
    kept = [e for e, w in enumerate(weights) if w > 0 and math.isfinite(w)]
    for idx, e in enumerate(kept):
        u, v = inst.edges[e]
        w = float(weights[e])
        a, b = 2 * n + 2 * idx, 2 * n + 2 * idx + 1
        g.add_edge(a, b, weight=w)
        for c in (0, 1):
            g.add_edge(2 * u + c, a, weight=w)
            g.add_edge(2 * v + c, b, weight=w)
    mate = {}
    for x, y in nx.max_weight_matching(g, maxcardinality=False):
        mate[x], mate[y] = y, x

    def to_copy(x):
        return x in mate and mate[x] < 2 * n

    chosen = [e for idx, e in enumerate(kept) if to_copy(2 * n + 2 * idx) and to_copy(2 * n + 2 * idx + 1)]
    result = frozenset(chosen)
    assert is_independent(inst, SystemKind.TWO_MATCHING, result)
    return result


def max_assignment(weights) -> list[int]:
    """Fixed-point-free permutation ``sigma`` maximising ``sum_i W[i, sigma(i)]``.

    The diagonal of ``weights`` is ignored (treated as forbidden).
    """
    w = np.array(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ContractError("square weight matrix required")
    if w.shape[0] < 2:
        raise InvalidInstanceError("assignment needs at least 2 vertices")
    np.fill_diagonal(w, -np.inf)
    rows, cols = linear_sum_assignment(w, maximize=True)
    sigma = [0] * len(rows)
    for i, j in zip(rows, cols):
        sigma[int(i)] = int(j)
    return sigma


def _reference(inst: Instance) -> str:
    return "assignment" if inst.directed else "two-matching"


def linear_relaxation_matching(
    inst: Instance, oracle: ValueOracle, *, kappa: float | None = None
) -> SolveReport:
    """Optimal 2-matching (or assignment) for the singleton-value weights.

    Guarantee ``(1 - kappa)`` against the best 2-matching under the true oracle.
    """
    start, t0 = oracle.calls, time.perf_counter()
    weights = relaxed_weights(oracle)
    if inst.directed:
        mat = np.zeros((inst.n, inst.n))
        for e, (u, v) in enumerate(inst.edges):
            mat[u, v] = weights[e]
        sigma = max_assignment(mat)
        solution = frozenset(inst.edge_id(i, j) for i, j in enumerate(sigma))
    else:
        solution = max_weight_two_matching(inst, weights)
    calls = oracle.calls - start
    wall = time.perf_counter() - t0
    ratio = 1.0 - (1.0 if kappa is None else kappa)
    return SolveReport(
        algorithm="linear-assignment" if inst.directed else "linear-2-matching",
        solution=solution,
        value=oracle.evaluate(solution),
        oracle_calls=calls,
        wall_time=wall,
        certificate=Certificate(None, kappa, ratio, _reference(inst)),
        details={"relaxed_value": math.fsum(weights[e] for e in solution)},
    )


def reduce_set(
    oracle: ValueOracle,
    parts: Sequence[Iterable[int]],
    universe: Iterable[int] | None = None,
) -> frozenset[int]:
    """Pick one element per part so that removing them keeps ``(k-1)/k`` of the value.

    ``k`` is the smallest part size. Candidate ``i`` takes the ``i``-th smallest
    id of every part; candidates ``0..k-1`` are disjoint and at least one of
    them always passes for a monotone submodular ``f``. ``universe`` (default:
    the union of the parts) is the set being reduced; it may hold extra
    elements that are never removed.
    """
    parts = [sorted(p) for p in parts]
    if not parts:
        return frozenset()
    flat = [e for p in parts for e in p]
    if len(flat) != len(set(flat)):
        raise ContractError("parts must be disjoint")
    if min(len(p) for p in parts) < 2:
        raise ContractError("every part needs at least 2 elements")
    total = frozenset(flat) if universe is None else frozenset(universe)
    if not total.issuperset(flat):
        raise ContractError("parts must lie inside the universe")
    k = min(len(p) for p in parts)
    f_total = oracle.evaluate(total)
    target = (k - 1) / k * f_total
    slack = _RETAIN_RTOL * abs(f_total)
    for i in range(k):
        removed = frozenset(p[i] for p in parts)
        if oracle.evaluate(total - removed) >= target - slack:
            return removed
    raise OracleNotSubmodularError(
        f"none of the {k} aligned removals kept {k - 1}/{k} of {f_total}"
    )


def _cycles(inst: Instance, m: frozenset[int]):
    return [c for c in decompose_matching(inst, m) if c.kind == "subtour"]


def reduce_matching(inst: Instance, oracle: ValueOracle, m: Iterable[int]) -> frozenset[int]:
    """Break every cycle of ``m`` by removing one edge each, via :func:`reduce_set`.

    Path edges stay in the universe but are never candidates for removal.
    """
    m = frozenset(m)
    parts = [c.edges for c in _cycles(inst, m) if len(c.edges) > 1]
    if not parts:
        return m
    return m - reduce_set(oracle, parts, universe=m)


def best_edge_reduction(inst: Instance, oracle: ValueOracle, m: Iterable[int]) -> frozenset[int]:
    """Remove from each cycle, in turn, the edge whose removal loses the least."""
    current = frozenset(m)
    for cycle in _cycles(inst, current):
        best_e, best_v = None, -math.inf
        for e in sorted(cycle.edges):
            v = oracle.evaluate(current - {e})
            if v > best_v:
                best_e, best_v = e, v
        current = current - {best_e}
    return current


class Completion(str, enum.Enum):
    GREEDY = "greedy"
    ARBITRARY = "arbitrary"


def _tour_kind(inst: Instance) -> SystemKind:
    return SystemKind.TSP_DIRECTED if inst.directed else SystemKind.TSP_UNDIRECTED


def complete_tour(
    inst: Instance,
    oracle: ValueOracle,
    partial: Iterable[int],
    mode: Completion | str = Completion.GREEDY,
    seed: int = 0,
    *,
    lazy: bool = True,
) -> frozenset[int]:
    """Extend a subtour-free edge set to a tour.

    ``greedy`` resumes the greedy tour from ``partial``; ``arbitrary`` chains
    the remaining paths and isolated vertices in a seeded random order (random
    orientation too, on undirected graphs) without consulting the oracle.
    """
    partial = frozenset(partial)
    kind = _tour_kind(inst)
    if not is_independent(inst, kind, partial):
        raise ContractError("partial edge set is not subtour-free and degree-feasible")
    mode = Completion(mode)
    if mode is Completion.GREEDY:
        system = IndependenceSystem(inst, kind, sorted(partial))
        _run_greedy(oracle, system, lazy)
        tour = system.edges
    else:
        tour = _chain_paths(inst, partial, np.random.default_rng(seed))
    assert is_tour(inst, tour)
    return tour


def _chain_paths(inst: Instance, partial: frozenset[int], rng: np.random.Generator) -> frozenset[int]:
    comps = decompose_matching(inst, partial)
    if len(comps) == 1 and comps[0].kind == "subtour":
        return partial
    touched = {v for c in comps for v in c.vertices}
    chains = [list(c.vertices) for c in comps]
    chains += [[v] for v in range(inst.n) if v not in touched]
    order = rng.permutation(len(chains))
    chains = [chains[i] for i in order]
    if not inst.directed:
        chains = [c[::-1] if rng.random() < 0.5 else c for c in chains]
    joins = [
        inst.edge_id(chains[i][-1], chains[(i + 1) % len(chains)][0]) for i in range(len(chains))
    ]
    return partial | frozenset(joins)


class MatchingSource(str, enum.Enum):
    GREEDY = "greedy"
    LINEAR = "linear"
    BEST_OF_BOTH = "best-of-both"


class Reduction(str, enum.Enum):
    BEST_EDGE = "best-edge"
    REDUCESET = "reduceset"


@dataclass(frozen=True)
class PipelineConfig:
    source: MatchingSource = MatchingSource.BEST_OF_BOTH
    reduction: Reduction = Reduction.REDUCESET
    completion: Completion = Completion.GREEDY

    def __post_init__(self):
        object.__setattr__(self, "source", MatchingSource(self.source))
        object.__setattr__(self, "reduction", Reduction(self.reduction))
        object.__setattr__(self, "completion", Completion(self.completion))


PRESETS = {
    "GM": PipelineConfig(MatchingSource.GREEDY, Reduction.BEST_EDGE, Completion.GREEDY),
    "GM2": PipelineConfig(MatchingSource.GREEDY, Reduction.REDUCESET, Completion.GREEDY),
    "GM3": PipelineConfig(MatchingSource.GREEDY, Reduction.REDUCESET, Completion.ARBITRARY),
    "LGmatching": PipelineConfig(MatchingSource.BEST_OF_BOTH, Reduction.BEST_EDGE, Completion.GREEDY),
    "Lmatching": PipelineConfig(MatchingSource.LINEAR, Reduction.BEST_EDGE, Completion.GREEDY),
}


def pipeline_ratio(source: MatchingSource, kappa: float | None, directed: bool) -> float:
    """Guarantee of the pipeline relative to the best 2-matching (or assignment)."""
    kappa = 1.0 if kappa is None else kappa
    keep = 0.5 if directed else 2.0 / 3.0
    greedy_part = keep / (2.0 + kappa)
    linear_part = keep * (1.0 - kappa)
    if source is MatchingSource.GREEDY:
        return greedy_part
    if source is MatchingSource.LINEAR:
        return linear_part
    return max(greedy_part, linear_part)


def matching_pipeline(
    inst: Instance,
    oracle: ValueOracle,
    cfg: PipelineConfig = PipelineConfig(),
    *,
    kappa: float | None = None,
    seed: int = 0,
    name: str = "matching-tour",
) -> SolveReport:
    """2-matching, then cycle breaking, then tour completion."""
    if inst.n < (2 if inst.directed else 3):
        raise InvalidInstanceError("instance too small for a tour")
    start, t0 = oracle.calls, time.perf_counter()
    candidates = []
    if cfg.source in (MatchingSource.GREEDY, MatchingSource.BEST_OF_BOTH):
        run = greedy_matching_directed if inst.directed else greedy_matching
        candidates.append(("greedy", run(inst, oracle)))
    if cfg.source in (MatchingSource.LINEAR, MatchingSource.BEST_OF_BOTH):
        candidates.append(("linear", linear_relaxation_matching(inst, oracle)))
    picked, matched = max(candidates, key=lambda c: c[1].value)  # ties keep greedy
    if cfg.reduction is Reduction.REDUCESET:
        reduced = reduce_matching(inst, oracle, matched.solution)
    else:
        reduced = best_edge_reduction(inst, oracle, matched.solution)
    tour = complete_tour(inst, oracle, reduced, cfg.completion, seed)
    calls = oracle.calls - start
    wall = time.perf_counter() - t0
    return SolveReport(
        algorithm=name,
        solution=tour,
        value=oracle.evaluate(tour),
        oracle_calls=calls,
        wall_time=wall,
        certificate=Certificate(None, kappa, pipeline_ratio(cfg.source, kappa, inst.directed), _reference(inst)),
        details={
            "pipeline_source": cfg.source.value,
            "source": picked,
            "matching": sorted(matched.solution),
            "matching_value": matched.value,
            "reduced": sorted(reduced),
            "reduced_value": oracle.evaluate(reduced),
        },
    )
