"""Degree-constrained null models for directed graphs.

The directed binary configuration model (DBCM) is the maximum-entropy
ensemble fixing every node's expected in- and out-degree; edges are
independent Bernoulli draws with p_ij = x_i * y_j / (1 + x_i * y_j). Dyadic
motif abundances observed on a graph are compared against their analytic
expectation and standard deviation over that ensemble.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .digraph import DiGraph, degrees
from .errors import ConvergenceError, NearDeterministicEdgeWarning, ParameterError

MOTIFS = ("empty", "single", "reciprocal")

_X_CAP = 1e150


@dataclass(frozen=True)
class DyadCensus:
    """Ordered-pair motif abundances.

    n_empty counts ordered pairs with no edge either way, n_single ordered
    pairs carrying exactly the forward edge, n_reciprocal ordered pairs whose
    both edges exist. n_reciprocal is always even; per unordered dyad use the
    derived accessors.
    """

    n_empty: int
    n_single: int
    n_reciprocal: int

    @property
    def empty_dyads(self) -> int:
        return self.n_empty // 2

    @property
    def single_dyads(self) -> int:
        return self.n_single

    @property
    def reciprocal_dyads(self) -> int:
        return self.n_reciprocal // 2

    def as_dict(self) -> dict[str, int]:
        return {"empty": self.n_empty, "single": self.n_single, "reciprocal": self.n_reciprocal}


def dyad_census(g: DiGraph) -> DyadCensus:
    n_recip = sum(1 for u, v in g.edges() if g.has_edge(v, u))
    n_single = g.m - n_recip
    n_empty = g.n * (g.n - 1) - 2 * g.m + n_recip
    return DyadCensus(n_empty, n_single, n_recip)


@dataclass
class DbcmModel:
    """Fitted DBCM parameters and the induced connection probabilities."""

    x: np.ndarray
    y: np.ndarray
    residual: float
    iterations: int
    _pmatrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.x)

    def probability(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        xy = self.x[i] * self.y[j]
        return xy / (1.0 + xy)

    def probability_matrix(self) -> np.ndarray:
        """Dense p_ij with zero diagonal (cached)."""
        if self._pmatrix is None:
            xy = np.outer(self.x, self.y)
            p = xy / (1.0 + xy)
            np.fill_diagonal(p, 0.0)
            self._pmatrix = p
        return self._pmatrix

    def expected_degrees(self) -> tuple[np.ndarray, np.ndarray]:
        p = self.probability_matrix()
        return p.sum(axis=0), p.sum(axis=1)  # (in, out)


def _degree_residual(p: np.ndarray, k_out: np.ndarray, k_in: np.ndarray) -> float:
    r_out = np.abs(p.sum(axis=1) - k_out)
    r_in = np.abs(p.sum(axis=0) - k_in)
    return float(max(r_out.max(initial=0.0), r_in.max(initial=0.0)))


def fit_dbcm(
    g: DiGraph,
    tolerance: float = 1e-8,
    max_iterations: int = 10_000,
    damping: float = 0.5,
) -> DbcmModel:
    """Fit DBCM fitness parameters by damped fixed-point iteration.

    Iterates x_i <- k_i_out / sum_j(y_j / (1 + x_i y_j)) (and symmetrically
    for y) with the previous value weighted by `damping`, until the largest
    gap between expected and observed degrees drops below `tolerance`.
    Zero-degree nodes keep exact zero parameters. Raises ConvergenceError
    with the last residual when the iteration cap is hit.
    """
    if g.n < 2:
        raise ParameterError(f"DBCM needs at least 2 nodes, got {g.n}")
    if not 0.0 <= damping < 1.0:
        raise ParameterError(f"damping must be in [0, 1), got {damping}")
    deg = degrees(g)
    k_out = deg.out_degree.astype(float)
    k_in = deg.in_degree.astype(float)
    if g.m == 0:
        raise ParameterError("DBCM undefined for an all-zero degree sequence")
    if np.any((deg.out_degree == g.n - 1) & (deg.in_degree == g.n - 1)):
        warnings.warn(
            "a node connects to every other node in both directions; "
            "its connection probabilities approach 1",
            NearDeterministicEdgeWarning,
            stacklevel=2,
        )

    out_mask = k_out > 0
    in_mask = k_in > 0
    scale = np.sqrt(g.m)
    x = np.where(out_mask, k_out / scale, 0.0)
    y = np.where(in_mask, k_in / scale, 0.0)

    residual = np.inf
    for iteration in range(1, max_iterations + 1):
        xy = np.outer(x, y)
        denom = 1.0 + xy
        p = xy / denom
        np.fill_diagonal(p, 0.0)
        residual = _degree_residual(p, k_out, k_in)
        if residual < tolerance:
            return DbcmModel(x, y, residual, iteration)

        ratio_y = y[None, :] / denom
        np.fill_diagonal(ratio_y, 0.0)
        sum_y = ratio_y.sum(axis=1)
        x_target = np.divide(k_out, sum_y, out=np.zeros_like(x), where=out_mask)

        ratio_x = x[:, None] / denom
        np.fill_diagonal(ratio_x, 0.0)
        sum_x = ratio_x.sum(axis=0)
        y_target = np.divide(k_in, sum_x, out=np.zeros_like(y), where=in_mask)

        x = np.minimum(damping * x + (1.0 - damping) * x_target, _X_CAP)
        y = np.minimum(damping * y + (1.0 - damping) * y_target, _X_CAP)

    raise ConvergenceError(
        f"DBCM fit did not reach tolerance {tolerance} in {max_iterations} iterations "
        f"(residual {residual:.3e})",
        residual=residual,
        iterations=max_iterations,
    )


@dataclass(frozen=True)
class MotifMoments:
    expected: dict[str, float]
    variance: dict[str, float]


def dyad_expectations(model: DbcmModel) -> MotifMoments:
    """Analytic ensemble mean and variance of the three dyadic abundances.

    The two directed edges inside one unordered pair are independent under
    the DBCM while the two ordered terms of one abundance are not; summing
    exact per-pair variances over pairs (which are mutually independent) is
    therefore exact.
    """
    p = model.probability_matrix()
    iu, ju = np.triu_indices(model.n, k=1)
    p1 = p[iu, ju]
    p2 = p[ju, iu]

    both = p1 * p2
    one = p1 * (1.0 - p2) + p2 * (1.0 - p1)
    neither = (1.0 - p1) * (1.0 - p2)

    expected = {
        "empty": float(2.0 * neither.sum()),
        "single": float(one.sum()),
        "reciprocal": float(2.0 * both.sum()),
    }
    variance = {
        "empty": float((4.0 * neither * (1.0 - neither)).sum()),
        "single": float((one * (1.0 - one)).sum()),
        "reciprocal": float((4.0 * both * (1.0 - both)).sum()),
    }
    return MotifMoments(expected, variance)


@dataclass(frozen=True)
class NullModelZScore:
    """Observed abundance against its null-model mean and spread.

    z is None when the ensemble variance vanishes.
    """

    observed: float
    expected: float
    std: float
    z: float | None

    def band(self, threshold: float = 3.0) -> str | None:
        if self.z is None:
            return None
        if self.z > threshold:
            return "high"
        if self.z < -threshold:
            return "low"
        return "compatible"


def motif_zscores(g: DiGraph, model: DbcmModel) -> dict[str, NullModelZScore]:
    """Per-motif z-scores of the observed dyad census under the fitted model."""
    census = dyad_census(g).as_dict()
    moments = dyad_expectations(model)
    scores = {}
    for motif in MOTIFS:
        observed = float(census[motif])
        mean = moments.expected[motif]
        std = float(np.sqrt(moments.variance[motif]))
        z = (observed - mean) / std if std > 0.0 else None
        scores[motif] = NullModelZScore(observed, mean, std, z)
    return scores


def sample_dbcm(model: DbcmModel, seed: int) -> DiGraph:
    """One graph drawn from the fitted ensemble; deterministic per seed."""
    rng = np.random.default_rng(seed)
    p = model.probability_matrix()
    draws = rng.random(p.shape) < p
    np.fill_diagonal(draws, False)
    us, vs = np.nonzero(draws)
    return DiGraph(model.n, zip(us.tolist(), vs.tolist()))


def erdos_renyi_gnm(n: int, m: int, seed: int) -> DiGraph:
    """Uniform undirected G(n, m), encoded as reciprocated directed edges."""
    max_m = n * (n - 1) // 2
    if not 0 <= m <= max_m:
        raise ParameterError(f"m={m} outside [0, {max_m}] for n={n}")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(max_m, size=m, replace=False) if m else np.empty(0, dtype=int)
    # row starts of the upper-triangle enumeration (i < j)
    counts = np.arange(n - 1, 0, -1)
    starts = np.concatenate(([0], np.cumsum(counts)))
    edges = []
    for t in np.sort(chosen):
        i = int(np.searchsorted(starts, t, side="right") - 1)
        j = int(i + 1 + (t - starts[i]))
        edges.append((i, j))
        edges.append((j, i))
    return DiGraph(n, edges)
