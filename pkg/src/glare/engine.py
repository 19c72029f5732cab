"""Top-level evaluation, accuracy comparison, and scaling benchmarks.

Three computation paths produce the same five readability scores: the serial
oracle, the partitioned-table path ("exact-parallel", bitwise-equal counts),
and the grid/strip approximations ("enhanced", exact for node occlusion,
close-but-under for crossings). This module picks the path, assembles timed
reports, and cross-checks values where the contracts require equality.
"""

from __future__ import annotations

import math

from .dataflow import ExecConfig
from .graphio import fr_layout, random_layout
from .metrics import enhanced as en
from .metrics import exact as ex
from .model import (
    METRIC_FIELDS,
    MODES,
    WARN_FEW_EDGES_LENGTH,
    WARN_NO_CROSSINGS,
    WARN_NO_EDGES_ANGLE,
    InvariantError,
    LayoutGraph,
    MetricParams,
    ParameterError,
    ReadabilityReport,
    build_report,
)

_DEFAULT_METRICS = ("nc", "ma", "ml", "ec", "eca")
_ENHANCED_METRICS = ("nc", "ec", "eca")


def _normalize_metrics(metrics, mode: str):
    if metrics is None:
        return _ENHANCED_METRICS if mode == "enhanced" else _DEFAULT_METRICS
    seen = []
    for key in metrics:
        if key not in METRIC_FIELDS:
            raise ParameterError(
                f"unknown metric {key!r}; choose from {sorted(METRIC_FIELDS)}"
            )
        if key not in seen:
            seen.append(key)
    if not seen:
        raise ParameterError("no metrics requested")
    if mode == "enhanced":
        bad = [k for k in seen if k not in _ENHANCED_METRICS]
        if bad:
            raise ParameterError(
                f"enhanced mode supports only {_ENHANCED_METRICS}, not {bad}"
            )
    return tuple(seen)


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _params_echo(params: MetricParams, exec_cfg: ExecConfig) -> dict:
    return {
        "radius": params.radius,
        "ideal_angle_deg": math.degrees(params.ideal_angle),
        "strip_fraction": params.strip_fraction,
        "orientation": params.orientation,
        "threads": exec_cfg.workers,
    }


def _oracle_entry(g: LayoutGraph, key: str, p: MetricParams):
    if key == "nc":
        return lambda: (ex.node_occlusion(g, p.radius), [])
    if key == "ma":
        if g.num_edges == 0:
            return lambda: (1.0, [WARN_NO_EDGES_ANGLE])
        return lambda: (ex.minimum_angle(g), [])
    if key == "ml":
        if g.num_edges <= 1:
            return lambda: (0.0, [WARN_FEW_EDGES_LENGTH])
        return lambda: (ex.edge_length_variation(g), [])
    if key == "ec":
        return lambda: (ex.edge_crossing(g), [])

    def eca():
        count, dev = ex._crossing_scan(g, p.ideal_angle)
        if count == 0:
            return 1.0, [WARN_NO_CROSSINGS]
        return 1.0 - (dev / p.ideal_angle) / count, []

    return eca


def _exact_entry(g: LayoutGraph, key: str, p: MetricParams, cfg: ExecConfig):
    if key == "nc":
        return lambda: (ex.node_occlusion_dataflow(g, p.radius, cfg), [])
    if key == "ma":
        if g.num_edges == 0:
            return lambda: (1.0, [WARN_NO_EDGES_ANGLE])
        return lambda: (ex.minimum_angle_dataflow(g, cfg), [])
    if key == "ml":
        if g.num_edges <= 1:
            return lambda: (0.0, [WARN_FEW_EDGES_LENGTH])
        return lambda: (ex.edge_length_variation_dataflow(g, cfg), [])
    if key == "ec":
        return lambda: (ex.edge_crossing_dataflow(g, cfg), [])

    def eca():
        count, dev = ex.crossing_angle_stats_dataflow(g, p.ideal_angle, cfg)
        if count == 0:
            return 1.0, [WARN_NO_CROSSINGS]
        return 1.0 - (dev / p.ideal_angle) / count, []

    return eca


def _enhanced_entry(g: LayoutGraph, key: str, p: MetricParams, cfg: ExecConfig):
    if key == "nc":
        return lambda: (en.node_occlusion_grid(g, p.radius, cfg), [])
    if key == "ec":
        return lambda: (
            en.edge_crossing_enhanced(g, p.strip_fraction, p.orientation, cfg),
            [],
        )

    def eca():
        count, dev = en.crossing_angle_stats(
            g, p.strip_fraction, p.ideal_angle, p.orientation, cfg
        )
        if count == 0:
            return 1.0, [WARN_NO_CROSSINGS]
        return 1.0 - (dev / p.ideal_angle) / count, []

    return eca


def evaluate(
    g: LayoutGraph,
    mode: str = "oracle",
    params: MetricParams | None = None,
    exec_cfg: ExecConfig | None = None,
    metrics=None,
) -> ReadabilityReport:
    """Compute the requested metrics on one path and return a timed report."""
    mode = _check_mode(mode)
    params = params if params is not None else MetricParams()
    params.validate()
    exec_cfg = exec_cfg if exec_cfg is not None else ExecConfig()
    keys = _normalize_metrics(metrics, mode)
    if mode == "oracle":
        maker = lambda key: _oracle_entry(g, key, params)
    elif mode == "exact-parallel":
        maker = lambda key: _exact_entry(g, key, params, exec_cfg)
    else:
        maker = lambda key: _enhanced_entry(g, key, params, exec_cfg)
    entries = [(METRIC_FIELDS[key], maker(key)) for key in keys]
    return build_report(mode, _params_echo(params, exec_cfg), entries)


def compare(
    g: LayoutGraph,
    params: MetricParams | None = None,
    exec_cfg: ExecConfig | None = None,
    metrics=None,
) -> list:
    """Enhanced vs serial-oracle values with percentage errors.

    Only metrics with an enhanced variant participate. A zero oracle value
    yields 0% when the enhanced value is also zero and an undefined (None,
    flagged) error otherwise.
    """
    keys = _normalize_metrics(
        metrics if metrics is not None else _ENHANCED_METRICS, "enhanced"
    )
    params = params if params is not None else MetricParams()
    params.validate()
    oracle_report = evaluate(g, "oracle", params, metrics=keys)
    enhanced_report = evaluate(g, "enhanced", params, exec_cfg, metrics=keys)
    rows = []
    for key in keys:
        field = METRIC_FIELDS[key]
        o = getattr(oracle_report, field)
        e = getattr(enhanced_report, field)
        if o != 0:
            pct = abs(e - o) / abs(o) * 100.0
            flagged = False
        elif e == 0:
            pct = 0.0
            flagged = False
        else:
            pct = None
            flagged = True
        rows.append(
            {"metric": key, "oracle": o, "enhanced": e, "pct_error": pct,
             "flagged": flagged}
        )
    return rows


def _values_match(a, b) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def bench(
    g: LayoutGraph,
    mode: str = "enhanced",
    thread_counts=(1, 2, 4),
    params: MetricParams | None = None,
    metrics=None,
) -> list:
    """Per-metric seconds and speedup across worker counts.

    Metric values must be identical across worker counts (counts exactly,
    reals to 1e-9 relative) — a mismatch is an invariant breach. The oracle
    path is single-threaded, so its speedup column is pinned at 1.0.
    """
    mode = _check_mode(mode)
    counts = list(thread_counts)
    if not counts:
        raise ParameterError("thread list must not be empty")
    if any((not isinstance(t, int)) or t < 1 for t in counts):
        raise ParameterError(f"thread counts must be integers >= 1, got {counts}")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ParameterError(f"thread counts must be strictly ascending, got {counts}")
    keys = _normalize_metrics(metrics, mode)
    rows = []
    baseline_values: dict = {}
    baseline_seconds: dict = {}
    for t in counts:
        report = evaluate(g, mode, params, ExecConfig(workers=t), keys)
        for key in keys:
            field = METRIC_FIELDS[key]
            value = getattr(report, field)
            seconds = report.elapsed[field]
            if key not in baseline_values:
                baseline_values[key] = value
                baseline_seconds[key] = seconds
            elif not _values_match(baseline_values[key], value):
                raise InvariantError(
                    f"{key} changed across worker counts: "
                    f"{baseline_values[key]!r} at {counts[0]} vs {value!r} at {t}"
                )
            if mode == "oracle":
                speedup = 1.0
            else:
                speedup = baseline_seconds[key] / max(seconds, 1e-12)
            rows.append(
                {"threads": t, "metric": key, "value": value,
                 "seconds": seconds, "speedup": speedup}
            )
    return rows


def generate_layout(
    edges,
    kind: str = "random",
    seed: int = 0,
    extent: float = 100.0,
    iterations: int = 50,
) -> LayoutGraph:
    """Seeded layout for an edge set: uniform-random or force-directed."""
    if kind == "random":
        return random_layout(edges, extent=extent, seed=seed)
    if kind == "fr":
        return fr_layout(edges, iterations=iterations, seed=seed, extent=extent)
    raise ParameterError(f"layout kind must be 'random' or 'fr', got {kind!r}")
