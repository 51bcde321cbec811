"""Node-level and graph-level structure metrics.

Centralities (and everything derived from them) are measured on the
undirected projection of the largest weakly connected component; directed
closeness is undefined off the strongly connected part, and the reported
series carry no direction qualifiers. Centralization indices are normalized
by their star-graph maxima, so every index lands in [0, 1] and the star
scores exactly 1.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .digraph import DiGraph, bfs_distances, degrees, weakly_connected_components
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    ParameterError,
    ValidationError,
)
from .nullmodels import dyad_census

CENTRALITY_MEASURES = ("degree", "closeness", "betweenness", "eigenvector")


# ---------------------------------------------------------------------------
# assortativity


@dataclass(frozen=True)
class AssortativityReport:
    """Pearson degree correlations over edges; None marks zero-variance cases."""

    undirected: float | None
    out_in: float | None
    out_out: float | None
    in_in: float | None
    in_out: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {
            "undirected": self.undirected,
            "out_in": self.out_in,
            "out_out": self.out_out,
            "in_in": self.in_in,
            "in_out": self.in_out,
        }


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = math.fsum((x - mx) ** 2 for x in xs)
    vy = math.fsum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        return None
    return cov / math.sqrt(vx * vy)


def assortativity(g: DiGraph, excess_directed: bool = False) -> AssortativityReport:
    """Degree assortativity of the undirected projection plus four directed variants.

    The undirected coefficient correlates excess degrees (degree minus the
    traversed edge) across edge endpoints. Directed variants correlate full
    source/target degrees over directed edges; `excess_directed` subtracts
    the traversed edge from the source out- and target in-degree instead
    (the correlation itself is shift-invariant, so both readings agree).
    """
    if g.m < 2:
        raise ParameterError(f"assortativity needs at least 2 edges, got {g.m}")

    und = g.undirected_neighbors()
    und_deg = [len(nbrs) for nbrs in und]
    xs, ys = [], []
    for u in range(g.n):
        for v in und[u]:
            xs.append(und_deg[u] - 1)
            ys.append(und_deg[v] - 1)
    r_und = _pearson(xs, ys)

    deg = degrees(g)
    k_out = deg.out_degree
    k_in = deg.in_degree
    d_out = 1 if excess_directed else 0
    variants: dict[str, float | None] = {}
    for alpha, beta in (("out", "in"), ("out", "out"), ("in", "in"), ("in", "out")):
        xs, ys = [], []
        for u, v in g.edges():
            src = k_out[u] - d_out if alpha == "out" else k_in[u]
            dst = k_in[v] - d_out if beta == "in" else k_out[v]
            xs.append(float(src))
            ys.append(float(dst))
        variants[f"{alpha}_{beta}"] = _pearson(xs, ys)
    return AssortativityReport(r_und, variants["out_in"], variants["out_out"],
                               variants["in_in"], variants["in_out"])


def reciprocity(g: DiGraph) -> float:
    """Fraction of links with a reciprocal partner, L_recip / L."""
    if g.m == 0:
        raise ParameterError("reciprocity undefined without links")
    return dyad_census(g).n_reciprocal / g.m


# ---------------------------------------------------------------------------
# centralities on the largest weak component


def _largest_weak_component(g: DiGraph) -> list[int]:
    comps = weakly_connected_components(g)
    if not comps:
        return []
    return max(comps, key=lambda c: (len(c), -c[0]))


def _component_adjacency(g: DiGraph, nodes: Sequence[int]) -> list[tuple[int, ...]]:
    index = {v: i for i, v in enumerate(nodes)}
    und = g.undirected_neighbors()
    return [tuple(index[w] for w in und[v]) for v in nodes]


def _brandes_betweenness(neighbors: Sequence[Sequence[int]]) -> list[float]:
    """Raw betweenness (unordered pairs, endpoints excluded)."""
    n = len(neighbors)
    bet = [0.0] * n
    for s in range(n):
        order: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in neighbors[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bet[w] += delta[w]
    return [b / 2.0 for b in bet]


def _power_iteration_eigenvector(
    neighbors: Sequence[Sequence[int]],
    tol: float = 1e-10,
    max_iterations: int = 100_000,
) -> list[float]:
    """Principal eigenvector of the adjacency, scaled to max 1.

    Iterates on A + I: the shift leaves eigenvectors untouched but makes the
    leading eigenvalue strictly dominant even on bipartite components.
    """
    n = len(neighbors)
    vec = [1.0] * n
    for _ in range(max_iterations):
        new = [vec[v] + math.fsum(vec[w] for w in neighbors[v]) for v in range(n)]
        peak = max(new)
        new = [x / peak for x in new]
        if max(abs(a - b) for a, b in zip(new, vec)) < tol:
            return new
        vec = new
    raise ConvergenceError(
        f"eigenvector power iteration did not reach {tol} in {max_iterations} iterations"
    )


def _measure_values(adj: Sequence[Sequence[int]], measure: str) -> tuple[float, ...]:
    """One centrality vector on a connected undirected adjacency."""
    nc = len(adj)
    if measure == "degree":
        return tuple(float(len(nbrs)) for nbrs in adj)
    if measure == "closeness":
        return tuple((nc - 1) / sum(bfs_distances(adj, v)) for v in range(nc))
    if measure == "betweenness":
        raw = _brandes_betweenness(adj)
        if nc <= 2:
            return tuple(0.0 for _ in raw)
        norm = 2.0 / ((nc - 1) * (nc - 2))
        return tuple(b * norm for b in raw)
    if measure == "eigenvector":
        return tuple(_power_iteration_eigenvector(adj))
    raise ParameterError(f"unknown centrality measure {measure!r}")


@dataclass(frozen=True)
class CentralityValues:
    """Per-node centralities on the largest weak component's projection.

    `nodes` are the component members in the original graph's ids. Closeness
    and betweenness carry standard normalizations; eigenvector is scaled to
    max 1; degree is the raw projection degree. `degenerate` marks a
    component too small to rank (single node).
    """

    nodes: tuple[int, ...]
    degree: tuple[float, ...]
    closeness: tuple[float, ...]
    betweenness: tuple[float, ...]
    eigenvector: tuple[float, ...]
    degenerate: bool

    def measure(self, name: str) -> tuple[float, ...]:
        if name not in CENTRALITY_MEASURES:
            raise ParameterError(f"unknown centrality measure {name!r}")
        return getattr(self, name)


def centralities(g: DiGraph) -> CentralityValues:
    nodes = _largest_weak_component(g)
    if not nodes:
        raise ParameterError("centralities undefined on an empty graph")
    nc = len(nodes)
    if nc == 1:
        zero = (0.0,)
        return CentralityValues(tuple(nodes), zero, zero, zero, zero, True)
    adj = _component_adjacency(g, nodes)
    return CentralityValues(
        tuple(nodes),
        _measure_values(adj, "degree"),
        _measure_values(adj, "closeness"),
        _measure_values(adj, "betweenness"),
        _measure_values(adj, "eigenvector"),
        False,
    )


# ---------------------------------------------------------------------------
# concentration indices


def gini(values: Iterable[float]) -> float:
    """Gini index of a non-negative value distribution, in [0, 1).

    Uses the sorted O(N log N) form of the mean-absolute-difference ratio.
    """
    vals = sorted(float(v) for v in values)
    n = len(vals)
    if n == 0:
        raise ParameterError("gini of an empty sequence")
    if vals[0] < 0:
        raise ValidationError("gini requires non-negative values")
    total = math.fsum(vals)
    if total == 0.0:
        raise DegenerateInputError("gini undefined for an all-zero distribution")
    weighted = math.fsum((2 * i - n - 1) * x for i, x in enumerate(vals, start=1))
    return weighted / (n * total)


def _centralization_denominator(measure: str, n: int) -> float:
    if measure == "degree":
        return float((n - 1) * (n - 2))
    if measure == "closeness":
        return (n - 1) * (n - 2) / (2 * n - 3)
    if measure == "betweenness":
        return (n - 1) ** 2 * (n - 2) / 2
    if measure == "eigenvector":
        root = math.sqrt(n - 1)
        return (root - 1) * (n - 1) / (root + n - 1)
    raise ParameterError(f"unknown centrality measure {measure!r}")


def _centralization_from_vector(vals: Sequence[float], measure: str) -> float:
    """Star-normalized concentration of one centrality distribution.

    Each denominator equals the star graph's numerator under a fixed value
    convention (raw degree, normalized closeness, raw betweenness,
    sum-normalized eigenvector), so the star scores 1 for every measure.
    """
    n = len(vals)
    if n < 3:
        raise ParameterError(f"centralization needs at least 3 nodes, got {n}")
    vals = list(vals)
    if measure == "betweenness":
        vals = [v * (n - 1) * (n - 2) / 2.0 for v in vals]
    elif measure == "eigenvector":
        total = math.fsum(vals)
        vals = [v / total for v in vals]
    peak = max(vals)
    spread = math.fsum(peak - v for v in vals)
    return spread / _centralization_denominator(measure, n)


def centralization(g: DiGraph, measure: str) -> float:
    if measure not in CENTRALITY_MEASURES:
        raise ParameterError(f"unknown centrality measure {measure!r}")
    nodes = _largest_weak_component(g)
    if len(nodes) < 3:
        raise ParameterError(f"centralization needs at least 3 nodes, got {len(nodes)}")
    adj = _component_adjacency(g, nodes)
    return _centralization_from_vector(_measure_values(adj, measure), measure)


@dataclass(frozen=True)
class CentralityReport:
    """Centrality vectors plus their Gini and centralization indices."""

    values: CentralityValues
    gini: dict[str, float | None]
    centralization: dict[str, float | None]


def centrality_report(g: DiGraph) -> CentralityReport:
    values = centralities(g)
    ginis: dict[str, float | None] = {}
    cents: dict[str, float | None] = {}
    for measure in CENTRALITY_MEASURES:
        vec = values.measure(measure)
        try:
            ginis[measure] = gini(vec)
        except (DegenerateInputError, ParameterError):
            ginis[measure] = None
        try:
            cents[measure] = _centralization_from_vector(vec, measure)
        except ParameterError:
            cents[measure] = None
    return CentralityReport(values, ginis, cents)


# ---------------------------------------------------------------------------
# small-world measures


@dataclass(frozen=True)
class SmallWorldReport:
    """APL and clustering of the giant component's undirected projection."""

    apl: float
    clustering: float
    er_clustering: float
    n: int
    m: int
    apl_mode: str


def _global_clustering(adj: Sequence[Sequence[int]]) -> float:
    edge_set = set()
    for v, nbrs in enumerate(adj):
        for w in nbrs:
            edge_set.add((min(v, w), max(v, w)))
    triples = 0
    closed = 0
    for nbrs in adj:
        k = len(nbrs)
        triples += k * (k - 1) // 2
        for a in range(k):
            for b in range(a + 1, k):
                if (min(nbrs[a], nbrs[b]), max(nbrs[a], nbrs[b])) in edge_set:
                    closed += 1
    return closed / triples if triples else 0.0


def small_world(
    g: DiGraph,
    apl_mode: str = "auto",
    exact_threshold: int = 20_000,
    sample_size: int = 1_000,
    seed: int = 0,
) -> SmallWorldReport:
    """Average path length and global clustering on the giant weak component.

    APL averages shortest-path lengths over ordered node pairs, exactly when
    the component is small enough, otherwise from a uniform sample of source
    nodes (the applied mode is recorded). The reported baseline is the
    expected clustering of an equal-size Erdos-Renyi graph, i.e. its edge
    density.
    """
    if apl_mode not in ("auto", "exact", "sampled"):
        raise ParameterError(f"unknown apl_mode {apl_mode!r}")
    nodes = _largest_weak_component(g)
    nc = len(nodes)
    if nc < 2:
        raise ParameterError("small-world measures need a giant component of >= 2 nodes")
    adj = _component_adjacency(g, nodes)
    mc = sum(len(nbrs) for nbrs in adj) // 2

    mode = apl_mode
    if mode == "auto":
        mode = "exact" if nc <= exact_threshold else "sampled"
    if mode == "exact":
        sources = range(nc)
    else:
        rng = random.Random(seed)
        sources = rng.sample(range(nc), min(sample_size, nc))
    dist_total = 0
    for s in sources:
        dist_total += sum(bfs_distances(adj, s))
    apl = dist_total / (len(sources) * (nc - 1))

    clustering = _global_clustering(adj)
    er_clustering = 2 * mc / (nc * (nc - 1))
    return SmallWorldReport(apl, clustering, er_clustering, nc, mc, mode)


# ---------------------------------------------------------------------------
# hub-and-leaves toy model


@dataclass(frozen=True)
class ToyModelParams:
    """`n_hubs` mutually connected hubs, each with `leaves_per_hub` pendant leaves."""

    n_hubs: int
    leaves_per_hub: int

    def __post_init__(self):
        if self.n_hubs < 1:
            raise ParameterError(f"n_hubs must be >= 1, got {self.n_hubs}")
        if self.leaves_per_hub < 0:
            raise ParameterError(f"leaves_per_hub must be >= 0, got {self.leaves_per_hub}")

    @property
    def n(self) -> int:
        return self.n_hubs * (self.leaves_per_hub + 1)

    @property
    def hub_degree(self) -> int:
        return (self.n_hubs - 1) + self.leaves_per_hub


def toy_model_graph(params: ToyModelParams) -> DiGraph:
    """Hub clique plus pendant leaves, encoded as reciprocated directed edges."""
    h, l = params.n_hubs, params.leaves_per_hub
    edges = []
    for a in range(h):
        for b in range(a + 1, h):
            edges.append((a, b))
            edges.append((b, a))
    for hub in range(h):
        for leaf in range(l):
            leaf_id = h + hub * l + leaf
            edges.append((hub, leaf_id))
            edges.append((leaf_id, hub))
    return DiGraph(params.n, edges)


def toy_model_gini(params: ToyModelParams) -> Fraction:
    """Closed-form Gini of the toy model's degree sequence."""
    h, l = params.n_hubs, params.leaves_per_hub
    denom = (l + 1) * ((h - 1) + 2 * l)
    if denom == 0:
        raise DegenerateInputError("degree Gini undefined for a single isolated hub")
    return Fraction((h + l - 2) * l, denom)


def toy_model_degree_centralization(params: ToyModelParams) -> Fraction:
    """Closed-form degree centralization of the toy model."""
    h, l = params.n_hubs, params.leaves_per_hub
    n = params.n
    if n < 3:
        raise ParameterError(f"centralization needs at least 3 nodes, got {n}")
    return Fraction((params.hub_degree - 1) * h * l, (n - 1) * (n - 2))
