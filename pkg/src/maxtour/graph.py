"""Complete (di)graphs, edge-set independence systems and 2-matching decomposition.

Edges of an :class:`Instance` carry integer ids ``0..|E|-1`` assigned in
lexicographic order of their endpoint pair: ``(min, max)`` for undirected
graphs, ``(tail, head)`` for directed graphs. Every downstream tie-break uses
the lowest id, so this ordering fixes the behaviour of all solvers.

Edge sets are plain ``frozenset[int]`` of edge ids.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

EdgeSet = frozenset


class ContractError(ValueError):
    """An operation was called with arguments violating its contract."""


class InvalidInstanceError(ValueError):
    """The instance is not admissible for the requested solver."""


@dataclass(frozen=True)
class Instance:
    """A complete graph on ``n`` vertices with optional 2D vertex positions."""

    n: int
    directed: bool = False
    coords: tuple[tuple[float, float], ...] | None = None
    edges: tuple[tuple[int, int], ...] = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInstanceError(f"vertex count must be positive, got {self.n}")
        if self.coords is not None:
            coords = tuple((float(x), float(y)) for x, y in self.coords)
            if len(coords) != self.n:
                raise InvalidInstanceError("one coordinate pair per vertex required")
            object.__setattr__(self, "coords", coords)
        if self.directed:
            edges = tuple(
                (u, v) for u in range(self.n) for v in range(self.n) if u != v
            )
        else:
            edges = tuple(itertools.combinations(range(self.n), 2))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_index", {uv: i for i, uv in enumerate(edges)})

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_id(self, u: int, v: int) -> int:
        if not self.directed and u > v:
            u, v = v, u
        try:
            return self._index[(u, v)]
        except KeyError:
            raise ContractError(f"no edge ({u}, {v}) in instance") from None

    def endpoints(self, e: int) -> tuple[int, int]:
        self.check_edge(e)
        return self.edges[e]

    def check_edge(self, e: int) -> None:
        if not 0 <= e < len(self.edges):
            raise ContractError(f"edge id {e} out of range [0, {len(self.edges)})")

    def edge_set(self, pairs: Iterable[tuple[int, int]]) -> frozenset[int]:
        return frozenset(self.edge_id(u, v) for u, v in pairs)

    def edge_length(self, e: int) -> float:
        if self.coords is None:
            raise InvalidInstanceError("instance has no coordinates")
        (x0, y0), (x1, y1) = (self.coords[i] for i in self.edges[e])
        return float(((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5)

    def cycle_edges(self, order: Sequence[int]) -> frozenset[int]:
        """Edge set of the closed walk visiting ``order`` and returning to its start."""
        k = len(order)
        return frozenset(self.edge_id(order[i], order[(i + 1) % k]) for i in range(k))


class DisjointSet:
    """Union-find over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


class SystemKind(str, enum.Enum):
    TSP_UNDIRECTED = "tsp-undirected"
    TSP_DIRECTED = "tsp-directed"
    TWO_MATCHING = "two-matching"
    DEGREE_IN_OUT = "degree-in-out"

    @property
    def directed(self) -> bool:
        return self in (SystemKind.TSP_DIRECTED, SystemKind.DEGREE_IN_OUT)

    @property
    def forbids_subtours(self) -> bool:
        return self in (SystemKind.TSP_UNDIRECTED, SystemKind.TSP_DIRECTED)


def tsp_p_value(n: int) -> float:
    """p-system parameter of the undirected TSP system on ``n`` vertices (Jenkyns)."""
    return 2.0 - 1.0 / ((n + 1) // 2)


class IndependenceSystem:
    """Incremental feasibility oracle for one of the graph set systems.

    The state only grows: ``add`` never needs to be undone by any algorithm
    here. Build a fresh system to start over.
    """

    def __init__(self, instance: Instance, kind: SystemKind | str, edges: Iterable[int] = ()):
        kind = SystemKind(kind)
        if kind.directed != instance.directed:
            raise ContractError(f"{kind.value} system needs directed={kind.directed} instance")
        self.instance = instance
        self.kind = kind
        n = instance.n
        # undirected: deg_a holds the degree; directed: deg_a = out, deg_b = in
        self._deg_a = [0] * n
        self._deg_b = [0] * n
        self._dsu = DisjointSet(n)
        self._edges: set[int] = set()
        for e in edges:
            if not self.can_add(e):
                raise ContractError(f"initial edge {e} breaks independence")
            self.add(e)

    @property
    def p(self) -> float:
        if self.kind is SystemKind.TSP_UNDIRECTED:
            return tsp_p_value(self.instance.n)
        if self.kind is SystemKind.TSP_DIRECTED:
            return 3.0
        return 2.0

    @property
    def edges(self) -> frozenset[int]:
        return frozenset(self._edges)

    def __len__(self) -> int:
        return len(self._edges)

    def __contains__(self, e: int) -> bool:
        return e in self._edges

    def can_add(self, e: int) -> bool:
        self.instance.check_edge(e)
        if e in self._edges:
            return False
        u, v = self.instance.edges[e]
        if self.instance.directed:
            if self._deg_a[u] >= 1 or self._deg_b[v] >= 1:
                return False
        else:
            if self._deg_a[u] >= 2 or self._deg_a[v] >= 2:
                return False
        if self.kind.forbids_subtours and len(self._edges) < self.instance.n - 1:
            return self._dsu.find(u) != self._dsu.find(v)
        return True

    def add(self, e: int) -> None:
        if not self.can_add(e):
            raise ContractError(f"edge {e} cannot be added")
        u, v = self.instance.edges[e]
        self._deg_a[u] += 1
        if self.instance.directed:
            self._deg_b[v] += 1
        else:
            self._deg_a[v] += 1
        self._dsu.union(u, v)
        self._edges.add(e)

    def is_maximal(self, candidates: Iterable[int] | None = None) -> bool:
        pool = range(self.instance.num_edges) if candidates is None else candidates
        return not any(self.can_add(e) for e in pool)


def _degrees(instance: Instance, edges: Iterable[int]) -> tuple[list[int], list[int]]:
    out_deg = [0] * instance.n
    in_deg = [0] * instance.n
    for e in edges:
        u, v = instance.endpoints(e)
        out_deg[u] += 1
        in_deg[v] += 1
    return out_deg, in_deg


def is_independent(instance: Instance, kind: SystemKind | str, edges: Iterable[int]) -> bool:
    """From-scratch independence check: degree scan, then a cycle scan by walking."""
    kind = SystemKind(kind)
    edges = frozenset(edges)
    for e in edges:
        instance.check_edge(e)
    out_deg, in_deg = _degrees(instance, edges)
    if instance.directed:
        if max(out_deg, default=0) > 1 or max(in_deg, default=0) > 1:
            return False
    elif any(a + b > 2 for a, b in zip(out_deg, in_deg)):
        return False
    if not kind.forbids_subtours:
        return True
    cycles = [c for c in decompose_matching(instance, edges) if c.kind == "subtour"]
    return not cycles or (len(cycles) == 1 and len(cycles[0].edges) == instance.n)


@dataclass(frozen=True)
class Component:
    kind: str  # "subtour" or "path"
    vertices: tuple[int, ...]
    edges: tuple[int, ...]  # traversal order


def decompose_matching(instance: Instance, m: Iterable[int]) -> list[Component]:
    """Split a degree-feasible edge set into vertex-disjoint cycles and paths.

    Components are listed by their smallest vertex. Cycles start at that vertex;
    undirected cycles head towards its smaller neighbour, undirected paths start
    at their smaller endpoint and directed ones at their source.
    """
    m = frozenset(m)
    out_deg, in_deg = _degrees(instance, m)
    if instance.directed:
        if max(out_deg, default=0) > 1 or max(in_deg, default=0) > 1:
            raise ContractError("in/out-degree above 1 in directed matching")
        return _decompose_directed(instance, m)
    if any(a + b > 2 for a, b in zip(out_deg, in_deg)):
        raise ContractError("vertex degree above 2 in 2-matching")
    return _decompose_undirected(instance, m)


def _decompose_undirected(instance: Instance, m: frozenset[int]) -> list[Component]:
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in m:
        u, v = instance.edges[e]
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    seen: set[int] = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        # collect the component, then pick a canonical starting point
        stack, members = [start], {start}
        while stack:
            x = stack.pop()
            for y, _ in adj[x]:
                if y not in members:
                    members.add(y)
                    stack.append(y)
        seen |= members
        ends = sorted(x for x in members if len(adj[x]) == 1)
        kind = "path" if ends else "subtour"
        first = ends[0] if ends else min(members)
        nbrs = sorted(adj[first])
        order, path_edges = [first], []
        cur, e = nbrs[0]
        path_edges.append(e)
        while cur != first:
            order.append(cur)
            nxt = [(y, f) for y, f in adj[cur] if f != path_edges[-1]]
            if not nxt:
                break
            cur, e = nxt[0]
            path_edges.append(e)
        comps.append(Component(kind, tuple(order), tuple(path_edges)))
    return comps


def _decompose_directed(instance: Instance, m: frozenset[int]) -> list[Component]:
    succ, pred = {}, {}
    for e in m:
        u, v = instance.edges[e]
        succ[u] = (v, e)
        pred[v] = (u, e)
    verts = sorted(set(succ) | set(pred))
    seen: set[int] = set()
    comps = []
    for v in verts:
        if v in seen:
            continue
        # rewind to a source if the component is a path
        start = v
        while start in pred and pred[start][0] != v:
            start = pred[start][0]
        is_cycle = start in pred
        if is_cycle:
            members = [v]
            x = succ[v][0]
            while x != v:
                members.append(x)
                x = succ[x][0]
            start = min(members)
        order, edges = [start], []
        x = start
        while x in succ:
            y, e = succ[x]
            edges.append(e)
            if y == start:
                break
            order.append(y)
            x = y
        seen.update(order)
        comps.append(Component("subtour" if is_cycle else "path", tuple(order), tuple(edges)))
    return comps


def is_tour(instance: Instance, s: Iterable[int]) -> bool:
    s = frozenset(s)
    if len(s) != instance.n:
        return False
    try:
        out_deg, in_deg = _degrees(instance, s)
    except ContractError:
        return False
    if instance.directed:
        if any(d != 1 for d in out_deg) or any(d != 1 for d in in_deg):
            return False
    elif any(a + b != 2 for a, b in zip(out_deg, in_deg)):
        return False
    comps = decompose_matching(instance, s)
    return len(comps) == 1 and comps[0].kind == "subtour"
