"""Per-snapshot report bundles, trailing z-scores, and bubble annotation.

A temporal z-score standardizes a quantity against its own recent past:
z = (x_t - mean) / std, with mean and population std taken over a trailing
window of observations strictly before t ("six months": 26 weekly or 182
daily points). Points without a full, gap-free trailing window are flagged
instead of scored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from datetime import date, datetime, timezone
from typing import Callable, Sequence

from .errors import ContractViolationError, ParameterError

SCHEMA_VERSION = 1

DEFAULT_WINDOW_LEN = {"weekly": 26, "daily": 182}

DEFAULT_ZSCORE_QUANTITIES = ("core_fraction", "periphery_links", "reciprocity")


@dataclass(frozen=True)
class BubbleWindow:
    """One published price-bubble period (inclusive date bounds)."""

    index: int
    start: date
    end: date
    days: int


#: The four bubble periods used to annotate series, with their published day counts.
BUBBLE_WINDOWS = (
    BubbleWindow(1, date(2012, 5, 25), date(2012, 8, 18), 84),
    BubbleWindow(2, date(2013, 1, 3), date(2013, 4, 11), 98),
    BubbleWindow(3, date(2013, 10, 7), date(2013, 11, 23), 47),
    BubbleWindow(4, date(2017, 3, 31), date(2017, 12, 18), 155),
)


def utc_date(timestamp: int) -> date:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date()


def annotate_bubbles(
    timestamps: Sequence[int],
    bubbles: Sequence[BubbleWindow] = BUBBLE_WINDOWS,
) -> list[bool]:
    """True where the window-start date falls inside any bubble (bounds inclusive)."""
    flags = []
    for ts in timestamps:
        d = utc_date(ts)
        flags.append(any(b.start <= d <= b.end for b in bubbles))
    return flags


@dataclass(frozen=True)
class TemporalZScore:
    """One standardized observation; flag is one of ok/underfilled/zero_variance/missing."""

    quantity: str
    time: int
    value: float | None
    mean: float | None
    std: float | None
    z: float | None
    flag: str


def temporal_zscore(
    series: Sequence[tuple[int, float | None]],
    window_len: int,
    quantity: str = "value",
    include_current: bool = False,
) -> list[TemporalZScore]:
    """Trailing-window z-scores for a uniformly spaced series.

    The window holds exactly `window_len` observations strictly before each
    point (set `include_current` to shift it to end at the point itself).
    Points whose window is incomplete or interrupted by gaps are flagged
    `underfilled`; zero trailing variance flags `zero_variance`.
    """
    if window_len < 1:
        raise ParameterError(f"window_len must be >= 1, got {window_len}")
    times = [t for t, _ in series]
    if len(times) >= 2:
        step = times[1] - times[0]
        if step <= 0 or any(b - a != step for a, b in zip(times, times[1:])):
            raise ContractViolationError("series must be time-ordered with uniform spacing")

    values = [v for _, v in series]
    out = []
    for i, (t, x) in enumerate(series):
        if x is None:
            out.append(TemporalZScore(quantity, t, None, None, None, None, "missing"))
            continue
        lo = i - window_len + (1 if include_current else 0)
        hi = lo + window_len
        window = values[lo:hi] if lo >= 0 else None
        if window is None or any(v is None for v in window):
            out.append(TemporalZScore(quantity, t, x, None, None, None, "underfilled"))
            continue
        mean = math.fsum(window) / window_len
        var = math.fsum((v - mean) ** 2 for v in window) / window_len
        std = math.sqrt(var)
        if std == 0.0:
            out.append(TemporalZScore(quantity, t, x, mean, 0.0, None, "zero_variance"))
            continue
        out.append(TemporalZScore(quantity, t, x, mean, std, (x - mean) / std, "ok"))
    return out


@dataclass
class SnapshotReport:
    """All metric bundles for one window; None marks an unavailable group.

    `notes` records why a group is unavailable (precondition not met, solver
    failure, toggle off).
    """

    window_start: int
    window_end: int
    granularity: str
    n_transactions: int
    n_nodes: int
    n_edges: int
    census: dict | None = None
    bowtie: dict | None = None
    core_periphery: dict | None = None
    dyads: dict | None = None
    dyad_zscores: dict | None = None
    dbcm_residual: float | None = None
    assortativity: dict | None = None
    reciprocity: float | None = None
    gini: dict | None = None
    centralization: dict | None = None
    small_world: dict | None = None
    notes: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "SnapshotReport":
        d = {k: v for k, v in d.items() if k != "schema_version"}
        return cls(**d)


def _group_value(group: dict | None, key: str) -> float | None:
    if group is None:
        return None
    return group.get(key)


SERIES_QUANTITIES: dict[str, Callable[[SnapshotReport], float | None]] = {
    "n_nodes": lambda r: float(r.n_nodes),
    "n_edges": lambda r: float(r.n_edges),
    "core_fraction": lambda r: _group_value(r.core_periphery, "core_fraction"),
    "core_links": lambda r: _group_value(r.core_periphery, "core_links"),
    "periphery_links": lambda r: _group_value(r.core_periphery, "periphery_links"),
    "log_surprise": lambda r: _group_value(r.core_periphery, "log_pvalue"),
    "reciprocity": lambda r: r.reciprocity,
    "frac_largest_wcc": lambda r: _group_value(r.census, "frac_largest_wcc"),
    "frac_largest_scc": lambda r: _group_value(r.census, "frac_largest_scc"),
    "gini_degree": lambda r: _group_value(r.gini, "degree"),
    "centralization_degree": lambda r: _group_value(r.centralization, "degree"),
    "assortativity_undirected": lambda r: _group_value(r.assortativity, "undirected"),
    "apl": lambda r: _group_value(r.small_world, "apl"),
    "clustering": lambda r: _group_value(r.small_world, "clustering"),
}


@dataclass
class SeriesReport:
    """Cross-snapshot series with z-scores and bubble annotation."""

    granularity: str
    window_len: int
    window_starts: tuple[int, ...]
    window_ends: tuple[int, ...]
    in_bubble: tuple[bool, ...]
    values: dict[str, tuple[float | None, ...]]
    zscores: dict[str, list[TemporalZScore]]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "granularity": self.granularity,
            "window_len": self.window_len,
            "window_starts": list(self.window_starts),
            "window_ends": list(self.window_ends),
            "in_bubble": list(self.in_bubble),
            "values": {k: list(v) for k, v in self.values.items()},
            "zscores": {k: [asdict(z) for z in v] for k, v in self.zscores.items()},
        }

    def to_csv(self) -> str:
        quantities = sorted(self.values)
        header = ["window_start", "window_start_iso", "in_bubble"]
        for q in quantities:
            header.extend([q, f"{q}_z", f"{q}_zflag"])
        lines = [f"# btcmeso series schema v{SCHEMA_VERSION}", ",".join(header)]
        for i, start in enumerate(self.window_starts):
            row = [str(start), utc_date(start).isoformat(), str(int(self.in_bubble[i]))]
            for q in quantities:
                val = self.values[q][i]
                zs = self.zscores[q][i]
                row.append("" if val is None else repr(float(val)))
                row.append("" if zs.z is None else repr(zs.z))
                row.append(zs.flag)
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def build_series(
    reports: Sequence[SnapshotReport],
    window_len: int | None = None,
    quantities: Sequence[str] | None = None,
    bubbles: Sequence[BubbleWindow] = BUBBLE_WINDOWS,
) -> SeriesReport:
    """Assemble snapshot reports into annotated, z-scored series.

    All reports must share one granularity. Quantities default to the
    core-fraction / periphery-links / reciprocity trio; any name from
    SERIES_QUANTITIES may be added. Missing values propagate as gaps.
    """
    if not reports:
        raise ParameterError("no reports to build a series from")
    grans = {r.granularity for r in reports}
    if len(grans) > 1:
        raise ContractViolationError(f"mixed granularities in series: {sorted(grans)}")
    granularity = grans.pop()
    if window_len is None:
        window_len = DEFAULT_WINDOW_LEN.get(granularity)
        if window_len is None:
            raise ParameterError(f"no default window length for granularity {granularity!r}")
    names = tuple(quantities) if quantities is not None else DEFAULT_ZSCORE_QUANTITIES
    unknown = [q for q in names if q not in SERIES_QUANTITIES]
    if unknown:
        raise ParameterError(f"unknown series quantities: {unknown}")

    ordered = sorted(reports, key=lambda r: r.window_start)
    starts = tuple(r.window_start for r in ordered)
    ends = tuple(r.window_end for r in ordered)
    flags = tuple(annotate_bubbles(starts, bubbles))

    values: dict[str, tuple[float | None, ...]] = {}
    zscores: dict[str, list[TemporalZScore]] = {}
    for q in names:
        extract = SERIES_QUANTITIES[q]
        vals = tuple(extract(r) for r in ordered)
        values[q] = vals
        zscores[q] = temporal_zscore(list(zip(starts, vals)), window_len, quantity=q)
    return SeriesReport(granularity, window_len, starts, ends, flags, values, zscores)


# ---------------------------------------------------------------------------
# JSON schemas for emitted files

_NULLABLE_NUMBER = {"type": ["number", "null"]}
_NULLABLE_OBJECT = {"type": ["object", "null"]}

SNAPSHOT_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version", "window_start", "window_end", "granularity",
        "n_transactions", "n_nodes", "n_edges", "census", "bowtie",
        "core_periphery", "dyads", "dyad_zscores", "dbcm_residual",
        "assortativity", "reciprocity", "gini", "centralization",
        "small_world", "notes",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "window_start": {"type": "integer"},
        "window_end": {"type": "integer"},
        "granularity": {"enum": ["daily", "weekly"]},
        "n_transactions": {"type": "integer", "minimum": 0},
        "n_nodes": {"type": "integer", "minimum": 0},
        "n_edges": {"type": "integer", "minimum": 0},
        "census": _NULLABLE_OBJECT,
        "bowtie": _NULLABLE_OBJECT,
        "core_periphery": _NULLABLE_OBJECT,
        "dyads": _NULLABLE_OBJECT,
        "dyad_zscores": _NULLABLE_OBJECT,
        "dbcm_residual": _NULLABLE_NUMBER,
        "assortativity": _NULLABLE_OBJECT,
        "reciprocity": _NULLABLE_NUMBER,
        "gini": _NULLABLE_OBJECT,
        "centralization": _NULLABLE_OBJECT,
        "small_world": _NULLABLE_OBJECT,
        "notes": {"type": "object"},
    },
}

SERIES_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version", "granularity", "window_len", "window_starts",
        "window_ends", "in_bubble", "values", "zscores",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "granularity": {"enum": ["daily", "weekly"]},
        "window_len": {"type": "integer", "minimum": 1},
        "window_starts": {"type": "array", "items": {"type": "integer"}},
        "window_ends": {"type": "array", "items": {"type": "integer"}},
        "in_bubble": {"type": "array", "items": {"type": "boolean"}},
        "values": {"type": "object"},
        "zscores": {"type": "object"},
    },
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "config_hash", "config", "windows", "outputs"],
    "properties": {
        "tool": {"const": "btcmeso"},
        "version": {"type": "string"},
        "config_hash": {"type": "string"},
        "config": {"type": "object"},
        "windows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "window_start", "window_end", "status"],
                "properties": {
                    "index": {"type": "integer", "minimum": 0},
                    "window_start": {"type": "integer"},
                    "window_end": {"type": "integer"},
                    "status": {"enum": ["ok", "flagged", "failed"]},
                    "note": {"type": "string"},
                },
            },
        },
        "outputs": {"type": "array", "items": {"type": "string"}},
    },
}
