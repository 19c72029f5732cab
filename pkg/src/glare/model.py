"""Core data model: layout graphs, metric parameters, and readability reports."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class GlareError(Exception):
    """Base class for all library errors."""


class ParameterError(GlareError):
    """A parameter value is outside its documented domain."""


class InputError(GlareError):
    """Input data (files, graphs, layouts) is malformed or inconsistent."""


class SchemaError(InputError):
    """A serialized document does not match the expected schema."""


class InvariantError(GlareError):
    """An internal consistency check failed; indicates a bug, not bad input."""


IDEAL_ANGLE_DEFAULT = 7.0 * math.pi / 18.0  # 70 degrees
DEFAULT_RADIUS = 0.5
DEFAULT_STRIP_FRACTION = 0.05

ORIENTATIONS = ("vertical", "horizontal", "both")
MODES = ("oracle", "exact-parallel", "enhanced")

# Short CLI names -> report field names, in canonical report order.
METRIC_FIELDS = {
    "nc": "node_occlusion",
    "ma": "minimum_angle",
    "ml": "edge_length_variation",
    "ec": "edge_crossing",
    "eca": "edge_crossing_angle",
}
METRIC_NAMES = tuple(METRIC_FIELDS)

# Warning strings shared by every evaluation path so reports stay comparable.
WARN_NO_EDGES_ANGLE = "graph has no edges; minimum_angle reported as 1.0"
WARN_FEW_EDGES_LENGTH = "fewer than 2 edges; edge_length_variation reported as 0.0"
WARN_NO_CROSSINGS = "no crossings found; edge_crossing_angle reported as 1.0"


def normalize_edges(pairs) -> tuple[np.ndarray, int, int]:
    """Normalize an undirected edge list given as id (or index) pairs.

    Returns (edges, loops_dropped, dupes_dropped) where edges is an (m, 2)
    int64 array with each pair ordered small-first and rows sorted
    lexicographically, self-loops removed, and duplicates collapsed.
    """
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64), 0, 0
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("edge list must be a sequence of id pairs")
    loops = int(np.count_nonzero(arr[:, 0] == arr[:, 1]))
    arr = arr[arr[:, 0] != arr[:, 1]]
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    stacked = np.stack([lo, hi], axis=1)
    uniq = np.unique(stacked, axis=0) if len(stacked) else stacked
    dupes = len(stacked) - len(uniq)
    return uniq, loops, dupes


class LayoutGraph:
    """An undirected graph with a 2-D position per vertex.

    Vertices are identified by nonnegative integer ids; internally edges are
    stored as index pairs into the sorted id array. Self-loops and duplicate
    undirected edges are dropped at construction (counts retained), and every
    edge must join two distinct positions: zero-length segments are rejected.
    """

    __slots__ = ("ids", "xy", "edges", "loops_dropped", "dupes_dropped")

    def __init__(self, ids, xy, edge_id_pairs):
        ids = np.asarray(ids, dtype=np.int64)
        xy = np.asarray(xy, dtype=np.float64)
        if ids.ndim != 1:
            raise InputError("vertex ids must be a 1-D sequence")
        if xy.shape != (len(ids), 2):
            raise InputError(
                f"positions must have shape ({len(ids)}, 2), got {xy.shape}"
            )
        if len(ids) == 0:
            raise InputError("graph needs at least one vertex")
        if not np.all(np.isfinite(xy)):
            raise InputError("vertex coordinates must be finite")
        order = np.argsort(ids, kind="stable")
        ids = ids[order]
        xy = xy[order]
        if len(ids) > 1 and np.any(ids[1:] == ids[:-1]):
            dup = int(ids[np.flatnonzero(ids[1:] == ids[:-1])[0]])
            raise InputError(f"duplicate vertex id {dup}")

        pairs, loops, dupes = normalize_edges(edge_id_pairs)
        idx = np.searchsorted(ids, pairs.ravel())
        idx = np.clip(idx, 0, len(ids) - 1)
        if pairs.size and not np.array_equal(ids[idx], pairs.ravel()):
            bad = pairs.ravel()[ids[idx] != pairs.ravel()][0]
            raise InputError(f"edge endpoint {int(bad)} is not a vertex")
        edges = idx.reshape(-1, 2).astype(np.int64)
        if len(edges):
            # id order and index order coincide (ids sorted), so rows stay
            # small-first and lexicographically sorted after the translation
            a = xy[edges[:, 0]]
            b = xy[edges[:, 1]]
            if np.any(np.all(a == b, axis=1)):
                bad = int(np.flatnonzero(np.all(a == b, axis=1))[0])
                u, v = edges[bad]
                raise InputError(
                    f"zero-length edge ({int(ids[u])}, {int(ids[v])}): "
                    "endpoints share a position"
                )
        self.ids = ids
        self.xy = xy
        self.edges = edges
        self.loops_dropped = loops
        self.dupes_dropped = dupes

    @classmethod
    def from_positions(cls, positions: dict, edge_id_pairs) -> "LayoutGraph":
        """Build from an id -> (x, y) mapping and an iterable of id pairs."""
        ids = np.fromiter(positions.keys(), dtype=np.int64, count=len(positions))
        xy = np.array([positions[int(i)] for i in ids], dtype=np.float64)
        return cls(ids, xy.reshape(len(ids), 2), edge_id_pairs)

    @property
    def num_vertices(self) -> int:
        return len(self.ids)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_ids(self) -> np.ndarray:
        """Edges as (m, 2) vertex-id pairs, small id first."""
        return self.ids[self.edges]

    def with_xy(self, xy) -> "LayoutGraph":
        """Same topology with replaced positions (used by transform tests)."""
        return LayoutGraph(self.ids, xy, self.ids[self.edges])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"LayoutGraph(|V|={self.num_vertices}, |E|={self.num_edges})"


@dataclass(frozen=True)
class MetricParams:
    """Tunable metric parameters; angles are radians internally."""

    radius: float = DEFAULT_RADIUS
    ideal_angle: float = IDEAL_ANGLE_DEFAULT
    strip_fraction: float = DEFAULT_STRIP_FRACTION
    orientation: str = "vertical"

    def validate(self) -> "MetricParams":
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ParameterError(f"radius must be finite and > 0, got {self.radius}")
        if not (0.0 < self.ideal_angle <= math.pi / 2):
            raise ParameterError(
                f"ideal angle must lie in (0, pi/2] radians, got {self.ideal_angle}"
            )
        if not (0.0 < self.strip_fraction < 1.0):
            raise ParameterError(
                f"strip fraction must lie in (0, 1), got {self.strip_fraction}"
            )
        if self.orientation not in ORIENTATIONS:
            raise ParameterError(
                f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}"
            )
        return self


@dataclass
class ReadabilityReport:
    """Metric values for one layout, plus parameter echo and wall times."""

    mode: str
    node_occlusion: int | None = None
    minimum_angle: float | None = None
    edge_length_variation: float | None = None
    edge_crossing: int | None = None
    edge_crossing_angle: float | None = None
    params: dict = field(default_factory=dict)
    elapsed: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "metrics": {
                "node_occlusion": self.node_occlusion,
                "minimum_angle": self.minimum_angle,
                "edge_length_variation": self.edge_length_variation,
                "edge_crossing": self.edge_crossing,
                "edge_crossing_angle": self.edge_crossing_angle,
            },
            "params": dict(self.params),
            "elapsed": dict(self.elapsed),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ReadabilityReport":
        if not isinstance(doc, dict):
            raise SchemaError("report document must be a JSON object")
        for key in ("mode", "metrics", "params", "elapsed", "warnings"):
            if key not in doc:
                raise SchemaError(f"report is missing required field {key!r}")
        metrics = doc["metrics"]
        if not isinstance(metrics, dict):
            raise SchemaError("report field 'metrics' must be an object")
        for key in METRIC_FIELDS.values():
            if key not in metrics:
                raise SchemaError(f"report metrics are missing field {key!r}")
        if doc["mode"] not in MODES:
            raise SchemaError(f"unknown report mode {doc['mode']!r}")
        for name in ("node_occlusion", "edge_crossing"):
            value = metrics[name]
            if value is not None and not isinstance(value, int):
                raise SchemaError(f"metric {name!r} must be an integer count")
        return cls(
            mode=doc["mode"],
            node_occlusion=metrics["node_occlusion"],
            minimum_angle=metrics["minimum_angle"],
            edge_length_variation=metrics["edge_length_variation"],
            edge_crossing=metrics["edge_crossing"],
            edge_crossing_angle=metrics["edge_crossing_angle"],
            params=dict(doc["params"]),
            elapsed=dict(doc["elapsed"]),
            warnings=list(doc["warnings"]),
        )


def build_report(
    mode: str,
    params_echo: dict,
    entries: list[tuple[str, Callable[[], tuple[object, list[str]]]]],
) -> ReadabilityReport:
    """Run metric callables in order, timing each, and assemble a report.

    Each callable returns (value, warnings). `entries` pairs the report field
    name with its callable.
    """
    report = ReadabilityReport(mode=mode, params=dict(params_echo))
    for field_name, fn in entries:
        start = time.perf_counter()
        value, warns = fn()
        report.elapsed[field_name] = time.perf_counter() - start
        setattr(report, field_name, value)
        report.warnings.extend(warns)
    return report
