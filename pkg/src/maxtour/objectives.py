"""Set-function value oracles over edge sets, and curvature estimates.

Every oracle counts its ``evaluate`` invocations. Composite oracles evaluate
their parts through the uncounted ``_value`` hook, so one call to a composite
counts once. ``marginal`` is charged as two calls and ``gain`` (for callers
that already hold ``f(S)``) as one; oracles that know their
marginals in closed form (modular, coverage) compute them exactly through
``_delta`` instead of subtracting two rounded totals.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
import operator
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import ContractError, Instance, IndependenceSystem, SystemKind


class ValueOracle:
    """Black-box set function ``f: 2^E -> R`` with an invocation counter."""

    monotone = True

    def __init__(self, instance: Instance):
        self.instance = instance
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def _checked(self, s: Iterable[int]) -> frozenset[int]:
        s = frozenset(s)
        m = self.instance.num_edges
        for e in s:
            if not 0 <= e < m:
                raise ContractError(f"edge id {e} out of range [0, {m})")
        return s

    def _count(self, k: int = 1):
        with self._lock:
            self._calls += k

    def evaluate(self, s: Iterable[int]) -> float:
        s = self._checked(s)
        self._count()
        return self._value(s)

    def marginal(self, s: Iterable[int], e: int) -> float:
        """``f(S + e) - f(S)``, counted as two calls."""
        s = self._checked(s)
        self.instance.check_edge(e)
        if e in s:
            raise ContractError(f"edge {e} already in the set")
        self._count(2)
        return self._delta(s, e)

    def gain(self, s: frozenset[int], e: int) -> float:
        """Marginal of ``e`` for a caller that already knows ``f(S)``; one call.

        Used by the greedy loops, which only need ``f(S + e)`` per candidate.
        """
        self._count(1)
        return self._delta(s, e)

    def singleton_values(self) -> list[float]:
        return [self.evaluate((e,)) for e in range(self.instance.num_edges)]

    def _value(self, s: frozenset[int]) -> float:
        raise NotImplementedError

    def _delta(self, s: frozenset[int], e: int) -> float:
        return self._value(s | {e}) - self._value(s)


class ModularOracle(ValueOracle):
    """``f(S) = sum of per-edge weights``; sums are exactly rounded (``math.fsum``)."""

    def __init__(self, instance: Instance, weights: Sequence[float]):
        super().__init__(instance)
        if len(weights) != instance.num_edges:
            raise ContractError("one weight per edge required")
        self.weights = tuple(float(w) for w in weights)
        self.monotone = all(w >= 0 for w in self.weights)

    def _value(self, s):
        w = self.weights
        return math.fsum(w[e] for e in s)

    def _delta(self, s, e):
        return self.weights[e]


class CardinalityOracle(ModularOracle):
    def __init__(self, instance: Instance):
        super().__init__(instance, [1.0] * instance.num_edges)


def edge_lengths(instance: Instance) -> list[float]:
    return [instance.edge_length(e) for e in range(instance.num_edges)]


class Grid:
    """Square cells of side ``h`` tiling ``[0, width] x [0, height]``; ids are row-major."""

    def __init__(self, width: float = 100.0, height: float = 100.0, h: float = 0.5):
        if h <= 0 or width <= 0 or height <= 0:
            raise ValueError("grid dimensions must be positive")
        self.width, self.height, self.h = float(width), float(height), float(h)
        self.nx = int(math.ceil(self.width / self.h - 1e-9))
        self.ny = int(math.ceil(self.height / self.h - 1e-9))

    @property
    def num_cells(self) -> int:
        return self.nx * self.ny

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = (np.arange(self.nx) + 0.5) * self.h
        ys = (np.arange(self.ny) + 0.5) * self.h
        return xs, ys


def rectangle_cells(grid: Grid, a, b, thickness: float) -> np.ndarray:
    """Ids of cells whose centre lies in the closed rectangle around segment ``ab``.

    The rectangle spans the segment lengthwise and ``thickness / 2`` to either
    side. Zero thickness or a degenerate segment covers nothing.
    """
    ax, ay = map(float, a)
    bx, by = map(float, b)
    dx, dy = bx - ax, by - ay
    length = math.hypot(dx, dy)
    half = thickness / 2.0
    if thickness <= 0 or length == 0:
        return np.empty(0, dtype=np.int64)
    ux, uy = dx / length, dy / length
    h = grid.h
    lo_x, hi_x = min(ax, bx) - half, max(ax, bx) + half
    lo_y, hi_y = min(ay, by) - half, max(ay, by) + half
    i0 = max(0, int(math.floor(lo_x / h - 0.5)))
    i1 = min(grid.nx - 1, int(math.ceil(hi_x / h - 0.5)))
    j0 = max(0, int(math.floor(lo_y / h - 0.5)))
    j1 = min(grid.ny - 1, int(math.ceil(hi_y / h - 0.5)))
    if i0 > i1 or j0 > j1:
        return np.empty(0, dtype=np.int64)
    cx = (np.arange(i0, i1 + 1) + 0.5) * h
    cy = (np.arange(j0, j1 + 1) + 0.5) * h
    px, py = np.meshgrid(cx - ax, cy - ay)  # rows index y, columns index x
    along = px * ux + py * uy
    across = np.abs(px * uy - py * ux)
    inside = (along >= 0) & (along <= length) & (across <= half)
    jj, ii = np.nonzero(inside)
    return ((jj + j0) * grid.nx + (ii + i0)).astype(np.int64)


def _cells_to_mask(cells: np.ndarray, num_cells: int) -> int:
    bits = np.zeros(num_cells, dtype=bool)
    bits[cells] = True
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


class CoverageOracle(ValueOracle):
    """Area covered by the union of the edges' rectangles, measured on a grid.

    ``evaluate(S) = h^2 * |union of cell sets|``. Cell sets are stored as
    integer bitmasks, so unions are bitwise ORs.
    """

    def __init__(
        self,
        instance: Instance,
        thickness: Sequence[float],
        grid_h: float = 0.5,
        region: tuple[float, float] = (100.0, 100.0),
    ):
        super().__init__(instance)
        if instance.coords is None:
            raise ContractError("coverage needs vertex coordinates")
        if len(thickness) != instance.num_edges:
            raise ContractError("one thickness per edge required")
        if any(t < 0 for t in thickness):
            raise ContractError("thickness must be non-negative")
        self.thickness = tuple(float(t) for t in thickness)
        self.grid = Grid(region[0], region[1], grid_h)
        self.cell_area = self.grid.h**2
        self._cells = []
        self._masks = []
        for e, (u, v) in enumerate(instance.edges):
            cells = rectangle_cells(self.grid, instance.coords[u], instance.coords[v], self.thickness[e])
            self._cells.append(cells)
            self._masks.append(_cells_to_mask(cells, self.grid.num_cells))

    def cells(self, e: int) -> np.ndarray:
        return self._cells[e]

    def union_mask(self, s: Iterable[int]) -> int:
        masks = self._masks
        return functools.reduce(operator.or_, (masks[e] for e in s), 0)

    def _value(self, s):
        return self.union_mask(s).bit_count() * self.cell_area

    def _delta(self, s, e):
        base = self.union_mask(s)
        return ((base | self._masks[e]).bit_count() - base.bit_count()) * self.cell_area


class SumOracle(ValueOracle):
    """Pointwise sum of oracles on the same instance."""

    def __init__(self, *parts: ValueOracle):
        if not parts:
            raise ValueError("at least one part required")
        super().__init__(parts[0].instance)
        self.parts = parts
        self.monotone = all(p.monotone for p in parts)

    def _value(self, s):
        return sum(p._value(s) for p in self.parts)

    def _delta(self, s, e):
        return sum(p._delta(s, e) for p in self.parts)


def coverage_with_length(instance: Instance, thickness, grid_h=0.5, region=(100.0, 100.0)) -> SumOracle:
    """Covered area plus total edge length.

    Adds area and length units together as-is; the length term keeps every
    edge's value positive when thickness is zero.
    """
    return SumOracle(
        CoverageOracle(instance, thickness, grid_h, region),
        ModularOracle(instance, edge_lengths(instance)),
    )


class CostMode(str, enum.Enum):
    RAW = "raw"
    NORMALIZED = "normalized"
    SHIFTED = "shifted"


class CombinedCostOracle(ValueOracle):
    """Reward minus modular cost, weighted by ``beta``.

    raw:        ``(1 - beta) w(S) - beta c(S)``
    normalized: ``(1 - beta)/M_w w(S) - beta/M_c c(S)``
    shifted:    raw + ``beta |S| M`` with ``M = max_e c(e)``; monotone and
                non-negative whenever ``w`` is.

    With ``top_k_offset`` the shifted offset is ``beta`` times the sum of the
    ``|S|`` largest costs instead of ``beta |S| M``.
    """

    def __init__(
        self,
        base: ValueOracle,
        costs: Sequence[float],
        beta: float,
        mode: CostMode | str = CostMode.RAW,
        m_w: float | None = None,
        m_c: float | None = None,
        top_k_offset: bool = False,
    ):
        super().__init__(base.instance)
        inst = base.instance
        if len(costs) != inst.num_edges:
            raise ContractError("one cost per edge required")
        if any(c < 0 for c in costs):
            raise ContractError("costs must be non-negative")
        if not 0.0 <= beta <= 1.0:
            raise ContractError("beta must lie in [0, 1]")
        self.base = base
        self.costs = tuple(float(c) for c in costs)
        self.beta = float(beta)
        self.mode = CostMode(mode)
        self.top_k_offset = top_k_offset
        self.max_cost = max(self.costs, default=0.0)
        self._sorted_costs = sorted(self.costs, reverse=True)
        self._prefix = list(itertools.accumulate(self._sorted_costs, initial=0.0))
        if self.mode is CostMode.NORMALIZED:
            self.m_w = float(m_w) if m_w is not None else base._value(frozenset(range(inst.num_edges)))
            self.m_c = float(m_c) if m_c is not None else math.fsum(self._sorted_costs[: inst.n])
            if self.m_w <= 0 or self.m_c <= 0:
                raise ContractError("normalizers must be positive")
        else:
            self.m_w = self.m_c = None
        self.monotone = self.mode is CostMode.SHIFTED and base.monotone and not top_k_offset

    @property
    def offset_per_edge(self) -> float:
        """``beta * M``: the per-edge shift turning raw mode into shifted mode."""
        return self.beta * self.max_cost

    def cost(self, s: Iterable[int]) -> float:
        c = self.costs
        return math.fsum(c[e] for e in s)

    def _value(self, s):
        w = self.base._value(s)
        c = self.cost(s)
        b = self.beta
        if self.mode is CostMode.NORMALIZED:
            return (1 - b) / self.m_w * w - b / self.m_c * c
        raw = (1 - b) * w - b * c
        if self.mode is CostMode.RAW:
            return raw
        if self.top_k_offset:
            return raw + b * self._prefix[len(s)]
        return raw + b * len(s) * self.max_cost

    def _delta(self, s, e):
        dw = self.base._delta(s, e)
        c = self.costs[e]
        b = self.beta
        if self.mode is CostMode.NORMALIZED:
            return (1 - b) / self.m_w * dw - b / self.m_c * c
        raw = (1 - b) * dw - b * c
        if self.mode is CostMode.RAW:
            return raw
        if self.top_k_offset:
            return raw + b * self._sorted_costs[len(s)]
        return raw + b * self.max_cost

    def shifted(self) -> "CombinedCostOracle":
        return CombinedCostOracle(self.base, self.costs, self.beta, CostMode.SHIFTED)

    def raw(self) -> "CombinedCostOracle":
        return CombinedCostOracle(self.base, self.costs, self.beta, CostMode.RAW)


@dataclass
class CurvatureReport:
    kappa: float
    ratios: dict[int, float] = field(repr=False)
    zero_edges: list[int] = field(default_factory=list)
    kappa_I_upper: float | None = None


def curvature(oracle: ValueOracle, universe: Iterable[int] | None = None) -> CurvatureReport:
    """Total curvature ``1 - min_e (f(E) - f(E - e)) / f(e)``, clamped to [0, 1].

    For a submodular ``f`` the smallest marginal of ``e`` over all sets is the
    one against ``E - e``, so one pass over the universe suffices.
    Edges with ``f(e) = 0`` are left out of the minimum and listed.
    """
    universe = frozenset(range(oracle.instance.num_edges) if universe is None else universe)
    ratios, zero = {}, []
    for e in sorted(universe):
        single = oracle.evaluate((e,))
        if single <= 0:
            zero.append(e)
            continue
        ratios[e] = oracle.marginal(universe - {e}, e) / single
    worst = min(ratios.values(), default=1.0)
    return CurvatureReport(min(1.0, max(0.0, 1.0 - worst)), ratios, zero)


def _random_basis(instance: Instance, kind: SystemKind, rng: np.random.Generator) -> frozenset[int]:
    system = IndependenceSystem(instance, kind)
    for e in rng.permutation(instance.num_edges):
        if system.can_add(int(e)):
            system.add(int(e))
    return system.edges


def kappa_I_estimate(
    oracle: ValueOracle, kind: SystemKind | str, samples: int = 1000, seed: int = 0
) -> float:
    """Sampled independence-system curvature.

    Each sample completes a random edge order into a basis ``B``, picks
    ``e`` in ``B`` and scores ``f(B) - f(B - e)`` against ``f(e)``. Sampling
    only sees some pairs, so the result can undershoot the true value.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    kind = SystemKind(kind)
    rng = np.random.default_rng(seed)
    single = {}
    worst = 1.0
    for _ in range(samples):
        basis = _random_basis(oracle.instance, kind, rng)
        if not basis:
            continue
        e = int(rng.choice(sorted(basis)))
        if e not in single:
            single[e] = oracle.evaluate((e,))
        if single[e] <= 0:
            continue
        worst = min(worst, oracle.marginal(basis - {e}, e) / single[e])
    return min(1.0, max(0.0, 1.0 - worst))


def enumerate_bases(instance: Instance, kind: SystemKind | str) -> list[frozenset[int]]:
    """All maximal independent sets, by depth-first search over edge ids (tiny n only)."""
    kind = SystemKind(kind)
    m = instance.num_edges
    bases = []

    def rec(i: int, system_edges: tuple[int, ...]):
        if i == m:
            system = IndependenceSystem(instance, kind, system_edges)
            if system.is_maximal():
                bases.append(frozenset(system_edges))
            return
        system = IndependenceSystem(instance, kind, system_edges)
        if system.can_add(i):
            rec(i + 1, system_edges + (i,))
        rec(i + 1, system_edges)

    rec(0, ())
    return bases


def kappa_I_exhaustive(oracle: ValueOracle, kind: SystemKind | str) -> float:
    """Exact independence-system curvature by enumerating every basis.

    The worst marginal of ``e`` over independent ``A`` with ``A + e``
    independent is reached at ``B - e`` for some basis ``B`` containing ``e``.
    """
    worst = 1.0
    single = {}
    for basis in enumerate_bases(oracle.instance, kind):
        for e in basis:
            if e not in single:
                single[e] = oracle.evaluate((e,))
            if single[e] <= 0:
                continue
            worst = min(worst, oracle.marginal(basis - {e}, e) / single[e])
    return min(1.0, max(0.0, 1.0 - worst))
