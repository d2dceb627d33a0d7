"""Exhaustive optima for small instances, and checking of approximation certificates."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .graph import Instance, SystemKind
from .greedy import SolveReport
from .objectives import CombinedCostOracle, CostMode, ValueOracle

log = logging.getLogger(__name__)

TOUR_CAP = 10
MATCHING_CAP = 8
ASSIGNMENT_CAP = 7
RTOL = 1e-9


class TooLargeError(ValueError):
    """Instance exceeds the brute-force size cap."""


@dataclass
class BruteForceResult:
    optimum: frozenset[int]
    value: float
    enumerated: int


def _check_cap(n: int, cap: int, default: int, what: str):
    if n > cap:
        raise TooLargeError(f"{what} brute force refused for n={n} (cap {cap})")
    if cap > default:
        log.warning("%s brute force cap raised to %d; enumeration may be slow", what, cap)


def _better(value, edges, best_value, best_edges) -> bool:
    # max value, ties to the lexicographically smallest sorted edge tuple
    if best_edges is None or value > best_value:
        return True
    return value == best_value and tuple(sorted(edges)) < tuple(sorted(best_edges))


def brute_force_tour(inst: Instance, oracle: ValueOracle, cap: int = TOUR_CAP) -> BruteForceResult:
    """Best tour over all cyclic vertex orders starting at vertex 0.

    Undirected orders and their reflections give the same tour, so only
    orders whose second vertex is smaller than their last are visited.
    """
    n = inst.n
    _check_cap(n, cap, TOUR_CAP, "tour")
    if n < (2 if inst.directed else 3):
        raise ValueError("instance too small for a tour")
    best_edges, best_value, count = None, -math.inf, 0
    for rest in itertools.permutations(range(1, n)):
        if not inst.directed and rest[0] > rest[-1]:
            continue
        edges = inst.cycle_edges((0, *rest))
        count += 1
        value = oracle.evaluate(edges)
        if _better(value, edges, best_value, best_edges):
            best_edges, best_value = edges, value
    return BruteForceResult(best_edges, best_value, count)


def _two_matchings(inst: Instance, maximal_only: bool):
    """Yield every simple 2-matching of ``inst`` (or only the maximal ones)."""
    edges = inst.edges
    m = len(edges)
    deg = [0] * inst.n
    chosen: list[int] = []

    def rec(i):
        if i == m:
            if maximal_only:
                picked = set(chosen)
                for e, (u, v) in enumerate(edges):
                    if e not in picked and deg[u] < 2 and deg[v] < 2:
                        return
            yield frozenset(chosen)
            return
        u, v = edges[i]
        if deg[u] < 2 and deg[v] < 2:
            deg[u] += 1
            deg[v] += 1
            chosen.append(i)
            yield from rec(i + 1)
            chosen.pop()
            deg[u] -= 1
            deg[v] -= 1
        yield from rec(i + 1)

    yield from rec(0)


def _partial_assignments(inst: Instance, maximal_only: bool):
    """Yield every arc set with in- and out-degree <= 1 (or only the maximal ones)."""
    n = inst.n
    used_head = [False] * n
    chosen: list[int] = []

    def rec(i):
        if i == n:
            if maximal_only:
                tails_free = [u for u in range(n) if not any(inst.edges[e][0] == u for e in chosen)]
                heads_free = [v for v in range(n) if not used_head[v]]
                if any(u != v for u in tails_free for v in heads_free):
                    return
            yield frozenset(chosen)
            return
        for j in range(n):
            if j != i and not used_head[j]:
                used_head[j] = True
                chosen.append(inst.edge_id(i, j))
                yield from rec(i + 1)
                chosen.pop()
                used_head[j] = False
        yield from rec(i + 1)

    yield from rec(0)


def _value_fn(oracle: ValueOracle | None, weights: Sequence[float] | None):
    if (oracle is None) == (weights is None):
        raise ValueError("give exactly one of oracle or weights")
    if oracle is not None:
        return oracle.evaluate, oracle.monotone
    w = [float(x) for x in weights]
    return (lambda s: math.fsum(w[e] for e in s)), all(x >= 0 for x in w)


def brute_force_two_matching(
    inst: Instance,
    oracle: ValueOracle | None = None,
    weights: Sequence[float] | None = None,
    cap: int | None = None,
) -> BruteForceResult:
    """Best simple 2-matching (undirected) or in/out-degree <= 1 arc set (directed).

    For monotone objectives only maximal sets are scored.
    """
    if inst.directed:
        cap = ASSIGNMENT_CAP if cap is None else cap
        _check_cap(inst.n, cap, ASSIGNMENT_CAP, "assignment")
    else:
        cap = MATCHING_CAP if cap is None else cap
        _check_cap(inst.n, cap, MATCHING_CAP, "2-matching")
    value_of, monotone = _value_fn(oracle, weights)
    gen = _partial_assignments if inst.directed else _two_matchings
    best_edges, best_value, count = None, -math.inf, 0
    for s in gen(inst, maximal_only=monotone):
        count += 1
        value = value_of(s)
        if _better(value, s, best_value, best_edges):
            best_edges, best_value = s, value
    return BruteForceResult(best_edges, best_value, count)


def brute_force_derangement(weights) -> tuple[list[int], float]:
    """Best fixed-point-free permutation by enumerating all permutations."""
    n = len(weights)
    best, best_value = None, -math.inf
    for perm in itertools.permutations(range(n)):
        if any(perm[i] == i for i in range(n)):
            continue
        value = math.fsum(float(weights[i][perm[i]]) for i in range(n))
        if value > best_value:
            best, best_value = list(perm), value
    return best, best_value


@dataclass
class Verdict:
    algorithm: str
    check: str
    value: float
    optimum: float
    bound: float
    passed: bool


def _passes(value: float, bound: float) -> bool:
    return value >= bound - RTOL * max(abs(bound), abs(value), 1e-300)


def verify_certificates(
    inst: Instance,
    oracle: ValueOracle,
    reports: Sequence[SolveReport],
    *,
    kappa_shifted: float | None = None,
) -> list[Verdict]:
    """Check every report's guarantee against brute-force optima.

    Ratio certificates are checked against the optimum they refer to (tour,
    2-matching or assignment). For raw or shifted reward-minus-cost oracles the
    additive bounds are checked against the raw tour optimum instead, with the
    approximation ratio ``alpha`` taken on the shifted objective: the general
    form ``alpha OPT - (1 + alpha - 2 alpha / p) M n`` and, since all tours have
    ``n`` edges, ``alpha OPT - (1 - alpha) M n``. Here ``M = beta max c``.
    """
    cache: dict[str, float] = {}

    def opt(reference: str, o: ValueOracle) -> float:
        key = f"{reference}:{id(o)}"
        if key not in cache:
            if reference == "tour":
                cache[key] = brute_force_tour(inst, o).value
            else:
                cache[key] = brute_force_two_matching(inst, oracle=o).value
        return cache[key]

    verdicts = []
    cost_mode = isinstance(oracle, CombinedCostOracle)
    if cost_mode:
        if oracle.mode is CostMode.NORMALIZED:
            raise ValueError("no certificate is defined for the normalized objective")
        raw, shifted = oracle.raw(), oracle.shifted()
    for rep in reports:
        cert = rep.certificate
        if cert is None:
            continue
        if not cost_mode:
            best = opt(cert.reference, oracle)
            bound = cert.ratio * best
            verdicts.append(Verdict(rep.algorithm, f"ratio-vs-{cert.reference}", rep.value, best, bound, _passes(rep.value, bound)))
            continue
        value = raw.evaluate(rep.solution)
        best = opt("tour", raw)
        alpha = _shifted_alpha(rep, kappa_shifted)
        m_off = oracle.offset_per_edge
        p = cert.p if cert.p is not None else 2.0
        n = inst.n
        general = alpha * best - (1 + alpha - 2 * alpha / p) * m_off * n
        tour_form = alpha * best - (1 - alpha) * m_off * n
        verdicts.append(Verdict(rep.algorithm, "additive-general", value, best, general, _passes(value, general)))
        verdicts.append(Verdict(rep.algorithm, "additive-tour", value, best, tour_form, _passes(value, tour_form)))
        sbest = opt(cert.reference, shifted)
        sval = shifted.evaluate(rep.solution)
        sbound = alpha * sbest
        verdicts.append(Verdict(rep.algorithm, f"shifted-ratio-vs-{cert.reference}", sval, sbest, sbound, _passes(sval, sbound)))
    return verdicts


def _shifted_alpha(rep: SolveReport, kappa_shifted: float | None) -> float:
    """Ratio the report's algorithm guarantees on the shifted (monotone) objective."""
    from .matching import MatchingSource, pipeline_ratio

    cert = rep.certificate
    directed = cert.reference == "assignment" or rep.details.get("system") == "tsp-directed"
    if "pipeline_source" in rep.details:
        return pipeline_ratio(MatchingSource(rep.details["pipeline_source"]), kappa_shifted, directed)
    p = cert.p if cert.p is not None else 2.0
    return 1.0 / (p + (1.0 if kappa_shifted is None else kappa_shifted))
