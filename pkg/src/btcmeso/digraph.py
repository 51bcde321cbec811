"""Directed-graph primitives: degrees, components, bow-tie decomposition.

Graphs are immutable, simple (no self-loops, no parallel edges) and live on
integer nodes 0..n-1. Reachability is along directed paths and every node
reaches itself.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyGraphError, ValidationError


class DiGraph:
    """Immutable simple directed graph."""

    __slots__ = ("n", "m", "_succ", "_pred", "_edge_set", "_und")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise ValidationError(f"node count must be >= 0, got {n}")
        edge_set = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValidationError(f"self-loop ({u}, {u}) not allowed")
            edge_set.add((u, v))
        succ: list[list[int]] = [[] for _ in range(n)]
        pred: list[list[int]] = [[] for _ in range(n)]
        for u, v in sorted(edge_set):
            succ[u].append(v)
            pred[v].append(u)
        self.n = n
        self.m = len(edge_set)
        self._succ = tuple(tuple(vs) for vs in succ)
        self._pred = tuple(sorted(us) for us in pred)
        self._edge_set = frozenset(edge_set)
        self._und = None

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges in sorted order."""
        for u in range(self.n):
            for v in self._succ[u]:
                yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_set

    def successors(self, u: int) -> tuple[int, ...]:
        return self._succ[u]

    def predecessors(self, u: int) -> tuple[int, ...]:
        return tuple(self._pred[u])

    def undirected_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Adjacency of the undirected projection (cached)."""
        if self._und is None:
            nbrs = [set(self._succ[u]) | set(self._pred[u]) for u in range(self.n)]
            self._und = tuple(tuple(sorted(s)) for s in nbrs)
        return self._und

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency; rows are sources."""
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self._edge_set:
            a[u, v] = True
        return a

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, m={self.m})"


class UserGraph(DiGraph):
    """DiGraph tagged with the user keys behind each node and its time window."""

    __slots__ = ("users", "window")

    def __init__(self, n, edges, users=None, window=None):
        super().__init__(n, edges)
        self.users = tuple(users) if users is not None else tuple(str(i) for i in range(n))
        if len(self.users) != n:
            raise ValidationError(f"{len(self.users)} user labels for {n} nodes")
        self.window = window


@dataclass(frozen=True)
class DegreeTable:
    in_degree: np.ndarray
    out_degree: np.ndarray
    total_degree: np.ndarray


def degrees(g: DiGraph) -> DegreeTable:
    """Per-node in/out/total degree; in and out sums both equal m."""
    din = np.zeros(g.n, dtype=np.int64)
    dout = np.zeros(g.n, dtype=np.int64)
    for u, v in g.edges():
        dout[u] += 1
        din[v] += 1
    return DegreeTable(din, dout, din + dout)


def strongly_connected_components(g: DiGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative single pass.

    Components are returned sorted by their smallest member, members
    ascending, so output is deterministic.
    """
    preorder: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    assigned: set[int] = set()
    open_stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for source in range(g.n):
        if source in preorder:
            continue
        stack = [source]
        while stack:
            v = stack[-1]
            if v not in preorder:
                preorder[v] = counter
                counter += 1
            advanced = False
            for w in g.successors(v):
                if w not in preorder:
                    stack.append(w)
                    advanced = True
                    break
            if advanced:
                continue
            lowlink[v] = preorder[v]
            for w in g.successors(v):
                if w not in assigned:
                    lowlink[v] = min(lowlink[v], lowlink[w] if preorder[w] > preorder[v] else preorder[w])
            stack.pop()
            if lowlink[v] == preorder[v]:
                comp = [v]
                assigned.add(v)
                while open_stack and preorder[open_stack[-1]] > preorder[v]:
                    w = open_stack.pop()
                    assigned.add(w)
                    comp.append(w)
                components.append(sorted(comp))
            else:
                open_stack.append(v)
    components.sort(key=lambda c: c[0])
    return components


def weakly_connected_components(g: DiGraph) -> list[list[int]]:
    """Connected components of the undirected projection, ordered by smallest member."""
    seen = [False] * g.n
    und = g.undirected_neighbors()
    components = []
    for source in range(g.n):
        if seen[source]:
            continue
        seen[source] = True
        comp = [source]
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in und[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        components.append(sorted(comp))
    components.sort(key=lambda c: c[0])
    return components


@dataclass(frozen=True)
class ComponentCensus:
    """Size distribution of weak and strong components.

    Ratios of largest to second-largest component are None when fewer than
    two components exist; fractions are 0 for the empty graph.
    """

    wcc_sizes: tuple[int, ...]
    scc_sizes: tuple[int, ...]
    n_wcc: int
    n_scc: int
    lcc_ratio_weak: float | None
    lcc_ratio_strong: float | None
    frac_largest_wcc: float
    frac_largest_scc: float


def _census_side(sizes: list[int], n: int) -> tuple[tuple[int, ...], int, float | None, float]:
    sizes = sorted(sizes, reverse=True)
    ratio = sizes[0] / sizes[1] if len(sizes) >= 2 else None
    frac = sizes[0] / n if sizes else 0.0
    return tuple(sizes), len(sizes), ratio, frac


def component_census(g: DiGraph) -> ComponentCensus:
    wcc = [len(c) for c in weakly_connected_components(g)]
    scc = [len(c) for c in strongly_connected_components(g)]
    w_sizes, n_w, w_ratio, w_frac = _census_side(wcc, g.n)
    s_sizes, n_s, s_ratio, s_frac = _census_side(scc, g.n)
    return ComponentCensus(w_sizes, s_sizes, n_w, n_s, w_ratio, s_ratio, w_frac, s_frac)


class BowTieClass(str, Enum):
    SCC = "scc"
    IN = "in"
    OUT = "out"
    TUBES = "tubes"
    IN_TENDRILS = "in_tendrils"
    OUT_TENDRILS = "out_tendrils"
    OTHERS = "others"


@dataclass(frozen=True)
class BowTiePartition:
    """Assignment of every node to one of the seven bow-tie classes."""

    labels: tuple[BowTieClass, ...]

    def nodes(self, cls: BowTieClass) -> tuple[int, ...]:
        return tuple(i for i, lab in enumerate(self.labels) if lab is cls)

    @property
    def counts(self) -> dict[str, int]:
        out = {cls.value: 0 for cls in BowTieClass}
        for lab in self.labels:
            out[lab.value] += 1
        return out

    @property
    def fractions(self) -> dict[str, float]:
        n = len(self.labels)
        return {k: v / n for k, v in self.counts.items()}


def _reach(g: DiGraph, sources: Iterable[int], forward: bool) -> list[bool]:
    reached = [False] * g.n
    queue = deque()
    for s in sources:
        if not reached[s]:
            reached[s] = True
            queue.append(s)
    step = g.successors if forward else g.predecessors
    while queue:
        v = queue.popleft()
        for w in step(v):
            if not reached[w]:
                reached[w] = True
                queue.append(w)
    return reached


def bowtie_decompose(g: DiGraph) -> BowTiePartition:
    """Seven-class bow-tie partition relative to the largest SCC.

    S is the largest strongly connected component (ties broken by smallest
    contained node id). IN holds nodes outside S that reach S, OUT nodes
    outside S reached from S. Among the remaining nodes, TUBES are reachable
    from IN and reach OUT, IN_TENDRILS are reachable from IN only,
    OUT_TENDRILS reach OUT only, and OTHERS is the rest.
    """
    if g.n == 0:
        raise EmptyGraphError("bow-tie decomposition needs at least one node")
    sccs = strongly_connected_components(g)
    core = max(sccs, key=lambda c: (len(c), -c[0]))
    in_core = [False] * g.n
    for v in core:
        in_core[v] = True

    from_core = _reach(g, core, forward=True)
    to_core = _reach(g, core, forward=False)

    labels: list[BowTieClass | None] = [None] * g.n
    in_set = []
    out_set = []
    for v in range(g.n):
        if in_core[v]:
            labels[v] = BowTieClass.SCC
        elif to_core[v]:
            labels[v] = BowTieClass.IN
            in_set.append(v)
        elif from_core[v]:
            labels[v] = BowTieClass.OUT
            out_set.append(v)

    from_in = _reach(g, in_set, forward=True)
    to_out = _reach(g, out_set, forward=False)
    for v in range(g.n):
        if labels[v] is not None:
            continue
        if from_in[v] and to_out[v]:
            labels[v] = BowTieClass.TUBES
        elif from_in[v]:
            labels[v] = BowTieClass.IN_TENDRILS
        elif to_out[v]:
            labels[v] = BowTieClass.OUT_TENDRILS
        else:
            labels[v] = BowTieClass.OTHERS
    return BowTiePartition(tuple(labels))


def bfs_distances(neighbors: Sequence[Sequence[int]], source: int) -> list[int]:
    """Hop distances from `source`; -1 marks unreachable nodes."""
    dist = [-1] * len(neighbors)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in neighbors[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist
