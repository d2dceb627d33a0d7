"""Greedy maximisation of a set function over an independence system.

Two interchangeable engines: ``greedy_general`` recomputes every marginal
after each accepted edge, ``greedy_lazy`` keeps stale marginals in a max-heap
and refreshes an entry only when it reaches the top. Both break ties towards
the lowest edge id and return the same set for submodular oracles.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .graph import IndependenceSystem, Instance, InvalidInstanceError, SystemKind, is_tour
from .objectives import ValueOracle


@dataclass
class Certificate:
    """Approximation guarantee ``value >= ratio * OPT(reference)``.

    ``reference`` names the optimum the ratio is measured against: ``"tour"``,
    ``"two-matching"`` or ``"assignment"``. With ``kappa`` unknown the ratio is
    computed for the worst case ``kappa = 1``.
    """

    p: float | None
    kappa: float | None
    ratio: float
    reference: str


@dataclass
class TraceStep:
    edge: int
    gain: float
    rejected: int


@dataclass
class SolveReport:
    algorithm: str
    solution: frozenset[int]
    value: float
    oracle_calls: int
    wall_time: float
    certificate: Certificate | None = None
    trace: list[TraceStep] | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["solution"] = sorted(self.solution)
        return d


def greedy_ratio(p: float, kappa: float | None) -> float:
    return 1.0 / (p + (1.0 if kappa is None else kappa))


@dataclass
class _Stats:
    evaluations: int = 0
    demotions: int = 0


def _run_greedy(
    oracle: ValueOracle,
    system: IndependenceSystem,
    lazy: bool,
    candidates: Iterable[int] | None = None,
) -> tuple[list[TraceStep], _Stats]:
    """Grow ``system`` greedily; returns the pick trace and evaluation stats."""
    pool = range(oracle.instance.num_edges) if candidates is None else candidates
    remaining = sorted(e for e in pool if e not in system)
    run = _lazy if lazy else _naive
    return run(oracle, system, remaining)


def _naive(oracle, system, remaining):
    stats = _Stats()
    trace: list[TraceStep] = []
    current = system.edges
    remaining = list(remaining)
    gains: dict[int, float] | None = None
    rejected = 0
    while remaining:
        if gains is None:
            if system.is_maximal(remaining):
                break
            gains = {e: oracle.gain(current, e) for e in remaining}
            stats.evaluations += len(remaining)
        best = max(remaining, key=lambda e: (gains[e], -e))
        remaining.remove(best)
        if not system.can_add(best):
            rejected += 1
            continue
        system.add(best)
        current = current | {best}
        trace.append(TraceStep(best, gains[best], rejected))
        gains, rejected = None, 0
    return trace, stats


def _lazy(oracle, system, remaining):
    stats = _Stats()
    trace: list[TraceStep] = []
    current = system.edges
    heap = [(-math.inf, e) for e in remaining]  # already sorted, so a valid heap
    fresh_at: dict[int, int] = {}
    bound_of: dict[int, float] = {}
    round_no = 0
    rejected = 0
    done = system.is_maximal(remaining)
    while heap and not done:
        _, e = heapq.heappop(heap)
        if not system.can_add(e):
            rejected += 1
            continue
        if fresh_at.get(e) == round_no:
            system.add(e)
            current = current | {e}
            trace.append(TraceStep(e, bound_of[e], rejected))
            round_no += 1
            rejected = 0
            done = system.is_maximal(e for _, e in heap)
            continue
        gain = oracle.gain(current, e)
        stats.evaluations += 1
        if e in bound_of and gain < bound_of[e]:
            stats.demotions += 1
        bound_of[e] = gain
        fresh_at[e] = round_no
        heapq.heappush(heap, (-gain, e))
    return trace, stats


def _report(name, oracle, system, lazy, cert_p, kappa, reference, trace_flag, candidates=None):
    start_calls, t0 = oracle.calls, time.perf_counter()
    trace, stats = _run_greedy(oracle, system, lazy, candidates)
    wall = time.perf_counter() - t0
    calls = oracle.calls - start_calls
    solution = system.edges
    return SolveReport(
        algorithm=name,
        solution=solution,
        value=oracle.evaluate(solution),
        oracle_calls=calls,
        wall_time=wall,
        certificate=Certificate(cert_p, kappa, greedy_ratio(cert_p, kappa), reference),
        trace=trace if trace_flag else None,
        details={
            "system": system.kind.value,
            "system_p": system.p,
            "lazy": lazy,
            "evaluations": stats.evaluations,
            "demotions": stats.demotions,
        },
    )


_REFERENCE = {
    SystemKind.TSP_UNDIRECTED: "tour",
    SystemKind.TSP_DIRECTED: "tour",
    SystemKind.TWO_MATCHING: "two-matching",
    SystemKind.DEGREE_IN_OUT: "assignment",
}


def greedy_general(
    oracle: ValueOracle, system: IndependenceSystem, *, kappa: float | None = None, trace: bool = False
) -> SolveReport:
    """Plain greedy: every marginal is recomputed after each accepted edge."""
    return _report("greedy", oracle, system, False, system.p, kappa, _REFERENCE[system.kind], trace)


def greedy_lazy(
    oracle: ValueOracle, system: IndependenceSystem, *, kappa: float | None = None, trace: bool = False
) -> SolveReport:
    """Accelerated greedy with a max-heap of stale marginals.

    Infeasible edges are dropped before any re-evaluation. Requires
    diminishing returns for the stale bounds to stay valid.
    """
    return _report("greedy-lazy", oracle, system, True, system.p, kappa, _REFERENCE[system.kind], trace)


def _require_undirected(inst: Instance, min_n: int):
    if inst.directed:
        raise InvalidInstanceError("undirected instance required")
    if inst.n < min_n:
        raise InvalidInstanceError(f"need at least {min_n} vertices, got {inst.n}")


def _require_directed(inst: Instance, min_n: int):
    if not inst.directed:
        raise InvalidInstanceError("directed instance required")
    if inst.n < min_n:
        raise InvalidInstanceError(f"need at least {min_n} vertices, got {inst.n}")


def greedy_tour(
    inst: Instance, oracle: ValueOracle, *, kappa: float | None = None, lazy: bool = True, trace: bool = False
) -> SolveReport:
    """Greedy Hamiltonian tour: degree <= 2 and no subtours, guarantee ``1/(2+kappa)``."""
    _require_undirected(inst, 3)
    system = IndependenceSystem(inst, SystemKind.TSP_UNDIRECTED)
    report = _report("GT", oracle, system, lazy, 2.0, kappa, "tour", trace)
    assert is_tour(inst, report.solution)
    return report


def greedy_matching(
    inst: Instance, oracle: ValueOracle, *, kappa: float | None = None, lazy: bool = True, trace: bool = False
) -> SolveReport:
    """Greedy maximal simple 2-matching, guarantee ``1/(2+kappa)``."""
    _require_undirected(inst, 2)
    system = IndependenceSystem(inst, SystemKind.TWO_MATCHING)
    return _report("greedy-2-matching", oracle, system, lazy, 2.0, kappa, "two-matching", trace)


def greedy_tour_directed(
    inst: Instance, oracle: ValueOracle, *, kappa: float | None = None, lazy: bool = True, trace: bool = False
) -> SolveReport:
    """Greedy directed tour (in/out-degree <= 1, no short cycles), guarantee ``1/(3+kappa)``."""
    _require_directed(inst, 2)
    system = IndependenceSystem(inst, SystemKind.TSP_DIRECTED)
    report = _report("GT-directed", oracle, system, lazy, 3.0, kappa, "tour", trace)
    assert is_tour(inst, report.solution)
    return report


def greedy_matching_directed(
    inst: Instance, oracle: ValueOracle, *, kappa: float | None = None, lazy: bool = True, trace: bool = False
) -> SolveReport:
    """Greedy over in-degree <= 1 and out-degree <= 1, guarantee ``1/(2+kappa)``."""
    _require_directed(inst, 2)
    system = IndependenceSystem(inst, SystemKind.DEGREE_IN_OUT)
    return _report("greedy-assignment", oracle, system, lazy, 2.0, kappa, "assignment", trace)


def random_tour(inst: Instance, oracle: ValueOracle, seed: int) -> SolveReport:
    """Scan edges in a seeded random order, keeping each one that stays feasible.

    The order is a Fisher-Yates permutation from numpy's PCG64 generator
    (``numpy.random.default_rng(seed).permutation``).
    """
    kind = SystemKind.TSP_DIRECTED if inst.directed else SystemKind.TSP_UNDIRECTED
    if inst.n < (2 if inst.directed else 3):
        raise InvalidInstanceError("instance too small for a tour")
    t0 = time.perf_counter()
    system = IndependenceSystem(inst, kind)
    for e in np.random.default_rng(seed).permutation(inst.num_edges):
        if system.can_add(int(e)):
            system.add(int(e))
    wall = time.perf_counter() - t0
    return SolveReport(
        algorithm="RT",
        solution=system.edges,
        value=oracle.evaluate(system.edges),
        oracle_calls=0,
        wall_time=wall,
        details={"seed": seed},
    )
