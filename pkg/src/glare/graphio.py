"""Edge-list and layout file formats, generators, and report round-trips.

Edge lists are whitespace-separated nonnegative integer id pairs with
`#`-comment lines. Layouts are CSV files with an `id,x,y` header and
full-precision coordinates, so write → read is lossless. Reports serialize
to canonical JSON (sorted keys, no NaN). Generators are pure functions of
their parameters and seed.
"""

from __future__ import annotations

import json
import logging
import math

import numpy as np

from .model import (
    InputError,
    LayoutGraph,
    ParameterError,
    ReadabilityReport,
    SchemaError,
    normalize_edges,
)

log = logging.getLogger(__name__)


def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def parse_edgelist(path) -> np.ndarray:
    """Normalized (m, 2) id pairs from a SNAP-style edge list file.

    Self-loops and duplicate edges (either direction) are dropped and their
    counts logged. A file with no data lines is an error; a file whose data
    lines all drop out is not.
    """
    pairs = []
    for lineno, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(
                f"{path}:{lineno}: expected two ids per line, got {line!r}"
            )
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise InputError(
                f"{path}:{lineno}: ids must be integers, got {line!r}"
            ) from exc
        if a < 0 or b < 0:
            raise InputError(f"{path}:{lineno}: ids must be nonnegative")
        pairs.append((a, b))
    if not pairs:
        raise InputError(f"{path}: no edges found")
    edges, loops, dupes = normalize_edges(pairs)
    if loops or dupes:
        log.info(
            "%s: dropped %d self-loop(s) and %d duplicate edge(s)", path, loops, dupes
        )
    return edges


def write_edgelist(edges, path) -> None:
    """One `a b` line per edge."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    lines = [f"{int(a)} {int(b)}" for a, b in arr.tolist()]
    _write_text(path, "\n".join(lines) + "\n")


def read_layout(path) -> dict:
    """{id: (x, y)} from a CSV layout file with an id,x,y header."""
    lines = _read_text(path).splitlines()
    if not lines:
        raise InputError(f"{path}: empty layout file")
    header = [c.strip() for c in lines[0].split(",")]
    if header != ["id", "x", "y"]:
        raise InputError(f"{path}: expected header 'id,x,y', got {lines[0]!r}")
    positions: dict = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [c.strip() for c in line.split(",")]
        if len(parts) != 3:
            raise InputError(f"{path}:{lineno}: expected 3 fields, got {line!r}")
        try:
            vid = int(parts[0])
            x = float(parts[1])
            y = float(parts[2])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: malformed row {line!r}") from exc
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InputError(f"{path}:{lineno}: non-finite coordinate")
        if vid in positions:
            raise InputError(f"{path}:{lineno}: duplicate vertex id {vid}")
        positions[vid] = (x, y)
    if not positions:
        raise InputError(f"{path}: layout file has no rows")
    return positions


def format_layout_csv(rows) -> str:
    """CSV text for (id, x, y) rows; float repr makes round-trips exact."""
    lines = ["id,x,y"]
    for vid, x, y in rows:
        lines.append(f"{int(vid)},{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"


def write_layout(g: LayoutGraph, path) -> None:
    """CSV id,x,y rows in ascending id order; coordinates round-trip exactly."""
    rows = zip(g.ids.tolist(), g.xy[:, 0].tolist(), g.xy[:, 1].tolist())
    _write_text(path, format_layout_csv(rows))


def _vertex_ids(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        raise InputError("cannot lay out a graph with no edges")
    return np.unique(arr)


def random_layout(edges, extent: float = 100.0, seed: int = 0) -> LayoutGraph:
    """Independent uniform coordinates in [0, extent]^2 for every endpoint id."""
    if not (extent > 0 and math.isfinite(extent)):
        raise ParameterError(f"extent must be finite and > 0, got {extent}")
    ids = _vertex_ids(edges)
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, extent, size=(len(ids), 2))
    return LayoutGraph(ids, xy, edges)


def fr_layout(
    edges, iterations: int = 50, seed: int = 0, extent: float = 100.0
) -> LayoutGraph:
    """Force-directed layout: spring attraction along edges, all-pairs repulsion.

    Starts from the seeded random layout and runs the classic iteration with
    ideal length k = extent/sqrt(n), displacement capped by a temperature
    that decays by 5% per round; the result is rescaled into [0, extent]^2.
    """
    if iterations < 1:
        raise ParameterError(f"iterations must be >= 1, got {iterations}")
    if not (extent > 0 and math.isfinite(extent)):
        raise ParameterError(f"extent must be finite and > 0, got {extent}")
    ids = _vertex_ids(edges)
    n = len(ids)
    norm_edges, _, _ = normalize_edges(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    ei = np.searchsorted(ids, norm_edges[:, 0])
    ej = np.searchsorted(ids, norm_edges[:, 1])
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0.0, extent, size=(n, 2))
    k = extent / math.sqrt(n)
    ksq = k * k
    t = extent / 10.0
    block = max(1, 2_000_000 // n)
    for _ in range(iterations):
        disp = np.zeros((n, 2))
        for s in range(0, n, block):
            e = min(n, s + block)
            diff = pos[s:e, None, :] - pos[None, :, :]
            d2 = diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2
            np.maximum(d2, 1e-12, out=d2)
            coef = ksq / d2  # self-pairs have zero diff, so they add nothing
            disp[s:e, 0] += np.sum(diff[:, :, 0] * coef, axis=1)
            disp[s:e, 1] += np.sum(diff[:, :, 1] * coef, axis=1)
        delta = pos[ei] - pos[ej]
        dist = np.sqrt(delta[:, 0] ** 2 + delta[:, 1] ** 2)
        pull = delta * (dist / k)[:, None]
        np.add.at(disp, ei, -pull)
        np.add.at(disp, ej, pull)
        length = np.sqrt(disp[:, 0] ** 2 + disp[:, 1] ** 2)
        np.maximum(length, 1e-12, out=length)
        pos += disp * (np.minimum(length, t) / length)[:, None]
        t *= 0.95
    span = pos.max(axis=0) - pos.min(axis=0)
    span[span <= 0] = 1.0
    pos = (pos - pos.min(axis=0)) / span * extent
    return LayoutGraph(ids, pos, norm_edges)


def random_graph(n: int, m: int, seed: int = 0) -> np.ndarray:
    """Uniform simple graph on vertices 0..n-1 with exactly m edges."""
    if n < 1:
        raise InputError(f"need at least one vertex, got n={n}")
    max_m = n * (n - 1) // 2
    if not 0 <= m <= max_m:
        raise InputError(f"cannot place {m} edges on {n} vertices (max {max_m})")
    if m == 0:
        return np.empty((0, 2), dtype=np.int64)
    rng = np.random.default_rng(seed)
    if 3 * m > max_m and max_m <= 20_000_000:
        # dense: enumerate all pairs and sample a subset without replacement
        iu, ju = np.triu_indices(n, k=1)
        take = rng.choice(max_m, size=m, replace=False)
        return np.column_stack((iu[take], ju[take])).astype(np.int64)
    chosen: set = set()
    out = []
    while len(out) < m:
        batch = (m - len(out)) * 2 + 16
        a = rng.integers(0, n, size=batch)
        b = rng.integers(0, n, size=batch)
        for p, q in zip(a.tolist(), b.tolist()):
            if p == q:
                continue
            key = (p, q) if p < q else (q, p)
            if key in chosen:
                continue
            chosen.add(key)
            out.append(key)
            if len(out) == m:
                break
    return np.asarray(out, dtype=np.int64)


def dump_report_json(report: ReadabilityReport) -> str:
    """Canonical JSON text: sorted keys, two-space indent, finite values only."""
    try:
        return json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False)
    except ValueError as exc:
        raise SchemaError(f"report contains a non-finite value: {exc}") from exc


def write_report(report: ReadabilityReport, path) -> None:
    _write_text(path, dump_report_json(report) + "\n")


def read_report(path) -> ReadabilityReport:
    text = _read_text(path)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return ReadabilityReport.from_dict(payload)
