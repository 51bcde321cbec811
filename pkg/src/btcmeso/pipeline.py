"""End-to-end analysis: records -> windows -> snapshot reports -> series.

The address partition is cumulative across windows (a merge discovered in
week 40 affects the user graph of week 41, not of week 39); per-window
analysis on the frozen graphs is independent and may run on several threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

from .clustering import UserPartition, apply_change_address, apply_multi_input, build_user_graph
from .digraph import UserGraph, bowtie_decompose, component_census
from .errors import BtcMesoError, ConvergenceError, ParameterError
from .metrics import assortativity, centrality_report, reciprocity, small_world
from .nullmodels import dyad_census, dyad_expectations, fit_dbcm, motif_zscores
from .records import DEFAULT_EPOCH, Granularity, TransactionRecord, window_iter
from .surprise import core_periphery_significance
from .timeseries import (
    DEFAULT_ZSCORE_QUANTITIES,
    SERIES_QUANTITIES,
    SeriesReport,
    SnapshotReport,
    build_series,
)


@dataclass
class AnalysisConfig:
    """Knobs for one pipeline run. Everything is deterministic given `seed`."""

    granularity: str = "weekly"
    epoch: int = DEFAULT_EPOCH
    multi_input: bool = True
    change_address: bool = True
    compute_assortativity: bool = True
    compute_centralities: bool = True
    compute_small_world: bool = True
    compute_dbcm: bool = True
    compute_surprise: bool = True
    dbcm_tolerance: float = 1e-8
    dbcm_max_iterations: int = 10_000
    dbcm_damping: float = 0.5
    surprise_threshold: float = 0.05
    zscore_window: int | None = None
    zscore_quantities: tuple[str, ...] = DEFAULT_ZSCORE_QUANTITIES
    apl_mode: str = "auto"
    apl_exact_threshold: int = 20_000
    apl_sample_size: int = 1_000
    seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        Granularity(self.granularity)
        if self.dbcm_tolerance <= 0:
            raise ParameterError("dbcm_tolerance must be positive")
        if self.dbcm_max_iterations < 1:
            raise ParameterError("dbcm_max_iterations must be >= 1")
        if not 0.0 <= self.dbcm_damping < 1.0:
            raise ParameterError("dbcm_damping must be in [0, 1)")
        if not 0.0 < self.surprise_threshold < 1.0:
            raise ParameterError("surprise_threshold must be in (0, 1)")
        if self.zscore_window is not None and self.zscore_window < 1:
            raise ParameterError("zscore_window must be >= 1")
        if self.apl_mode not in ("auto", "exact", "sampled"):
            raise ParameterError(f"unknown apl_mode {self.apl_mode!r}")
        if self.apl_exact_threshold < 0 or self.apl_sample_size < 1:
            raise ParameterError("invalid APL sampling parameters")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        unknown = [q for q in self.zscore_quantities if q not in SERIES_QUANTITIES]
        if unknown:
            raise ParameterError(f"unknown z-score quantities: {unknown}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zscore_quantities"] = list(self.zscore_quantities)
        return d


@dataclass
class WindowStatus:
    index: int
    window_start: int
    window_end: int
    status: str  # ok | flagged | failed
    note: str = ""


@dataclass
class AnalysisResult:
    reports: list[SnapshotReport]
    series: SeriesReport | None
    windows: list[WindowStatus]

    @property
    def clean(self) -> bool:
        return all(w.status == "ok" for w in self.windows)


def _zscore_group(g, cfg, report, notes):
    model = fit_dbcm(
        g,
        tolerance=cfg.dbcm_tolerance,
        max_iterations=cfg.dbcm_max_iterations,
        damping=cfg.dbcm_damping,
    )
    report.dbcm_residual = model.residual
    scores = motif_zscores(g, model)
    report.dyad_zscores = {
        motif: {
            "observed": s.observed,
            "expected": s.expected,
            "std": s.std,
            "z": s.z,
            "band3": s.band(3.0),
            "band2": s.band(2.0),
        }
        for motif, s in scores.items()
    }


def analyze_window(g: UserGraph, cfg: AnalysisConfig, n_transactions: int = 0) -> tuple[SnapshotReport, str]:
    """Compute every enabled metric bundle on one window graph.

    Groups whose preconditions fail are marked unavailable in `notes` and do
    not affect the status; solver failures (e.g. DBCM non-convergence) yield
    status "flagged" while the rest of the report completes.
    """
    window = g.window
    report = SnapshotReport(
        window_start=window.start if window else 0,
        window_end=window.end if window else 0,
        granularity=str(getattr(window, "granularity", Granularity(cfg.granularity)).value),
        n_transactions=n_transactions,
        n_nodes=g.n,
        n_edges=g.m,
    )
    notes = report.notes
    status = "ok"

    if g.n == 0:
        notes["graph"] = "empty window"
        return report, status

    census = component_census(g)
    report.census = {
        "n_wcc": census.n_wcc,
        "n_scc": census.n_scc,
        "lcc_ratio_weak": census.lcc_ratio_weak,
        "lcc_ratio_strong": census.lcc_ratio_strong,
        "frac_largest_wcc": census.frac_largest_wcc,
        "frac_largest_scc": census.frac_largest_scc,
        "wcc_sizes": list(census.wcc_sizes[:50]),
        "scc_sizes": list(census.scc_sizes[:50]),
    }

    bt = bowtie_decompose(g)
    report.bowtie = {"counts": bt.counts, "fractions": bt.fractions}

    if cfg.compute_surprise:
        cp = core_periphery_significance(g, bt, threshold=cfg.surprise_threshold)
        report.core_periphery = {
            "n_core": len(cp.core_nodes),
            "n_periphery": len(cp.periphery_nodes),
            "core_fraction": cp.core_fraction,
            "pvalue": cp.pvalue,
            "log_pvalue": cp.log_pvalue,
            "significant": cp.significant,
            "degenerate": cp.degenerate,
            "core_links": cp.core_links,
            "periphery_links": cp.periphery_links,
            "cross_links": cp.cross_links,
        }
    else:
        notes["core_periphery"] = "disabled"

    census_d = dyad_census(g)
    report.dyads = {
        **census_d.as_dict(),
        "empty_dyads": census_d.empty_dyads,
        "single_dyads": census_d.single_dyads,
        "reciprocal_dyads": census_d.reciprocal_dyads,
    }

    if not cfg.compute_dbcm:
        notes["dbcm"] = "disabled"
    elif g.n < 2 or g.m == 0:
        notes["dbcm"] = "needs >= 2 nodes and >= 1 edge"
    else:
        try:
            _zscore_group(g, cfg, report, notes)
        except ConvergenceError as exc:
            notes["dbcm"] = str(exc)
            status = "flagged"

    if not cfg.compute_assortativity:
        notes["assortativity"] = "disabled"
    elif g.m < 2:
        notes["assortativity"] = "needs >= 2 edges"
    else:
        report.assortativity = assortativity(g).as_dict()

    if g.m >= 1:
        report.reciprocity = reciprocity(g)
    else:
        notes["reciprocity"] = "no links"

    if not cfg.compute_centralities:
        notes["centralities"] = "disabled"
    else:
        try:
            cr = centrality_report(g)
            report.gini = cr.gini
            report.centralization = cr.centralization
        except ConvergenceError as exc:
            notes["centralities"] = str(exc)
            status = "flagged"

    if not cfg.compute_small_world:
        notes["small_world"] = "disabled"
    else:
        try:
            sw = small_world(
                g,
                apl_mode=cfg.apl_mode,
                exact_threshold=cfg.apl_exact_threshold,
                sample_size=cfg.apl_sample_size,
                seed=cfg.seed,
            )
            report.small_world = {
                "apl": sw.apl,
                "clustering": sw.clustering,
                "er_clustering": sw.er_clustering,
                "n": sw.n,
                "m": sw.m,
                "apl_mode": sw.apl_mode,
            }
        except ParameterError as exc:
            notes["small_world"] = str(exc)

    return report, status


GraphSink = Callable[[int, UserGraph, UserPartition], None]


def analyze_records(
    records: Sequence[TransactionRecord],
    cfg: AnalysisConfig,
    graph_sink: GraphSink | None = None,
) -> AnalysisResult:
    """Run the full pipeline over sorted transaction records.

    `graph_sink`, when given, is called with (index, graph, partition) right
    after each window graph is built, while the partition still holds exactly
    the state at that window's end (useful for graph exports).
    """
    cfg.validate()
    partition = UserPartition()
    windowed: list[tuple[int, UserGraph, int]] = []
    for index, (window, slice_) in enumerate(
        window_iter(records, Granularity(cfg.granularity), epoch=cfg.epoch)
    ):
        for tx in slice_:
            if tx.inputs:
                if cfg.multi_input:
                    apply_multi_input(partition, tx)
                if cfg.change_address:
                    apply_change_address(partition, tx)
            partition.observe(tx)
        g = build_user_graph(slice_, partition, window=window)
        if graph_sink is not None:
            graph_sink(index, g, partition)
        windowed.append((index, g, len(slice_)))

    reports: list[SnapshotReport] = [None] * len(windowed)  # type: ignore[list-item]
    statuses: list[WindowStatus] = [None] * len(windowed)  # type: ignore[list-item]

    def run(item):
        index, g, n_tx = item
        w = g.window
        try:
            report, status = analyze_window(g, cfg, n_transactions=n_tx)
            note = "; ".join(f"{k}: {v}" for k, v in sorted(report.notes.items()))
            return index, report, WindowStatus(index, w.start, w.end, status, note)
        except BtcMesoError as exc:
            report = SnapshotReport(
                window_start=w.start,
                window_end=w.end,
                granularity=w.granularity.value,
                n_transactions=n_tx,
                n_nodes=g.n,
                n_edges=g.m,
                notes={"error": str(exc)},
            )
            return index, report, WindowStatus(index, w.start, w.end, "failed", str(exc))

    if cfg.workers > 1 and len(windowed) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for index, report, status in pool.map(run, windowed):
                reports[index] = report
                statuses[index] = status
    else:
        for item in windowed:
            index, report, status = run(item)
            reports[index] = report
            statuses[index] = status

    series = None
    if reports:
        series = build_series(
            reports,
            window_len=cfg.zscore_window,
            quantities=cfg.zscore_quantities,
        )
    return AnalysisResult(reports, series, statuses)
