"""The five readability metrics, computed two ways with identical results.

Serial oracle kernels (blocked numpy, single-threaded) are the ground truth.
The *_dataflow variants express the same metrics as relational pipelines over
the partitioned table layer: positions and edges become tables, candidate
pairs come from joins, and per-vertex statistics come from grouped folds.
Counts agree exactly between the two paths; real-valued metrics agree to
1e-9 relative (summation order differs across partition layouts).
"""

from __future__ import annotations

import math

import numpy as np

from .. import dataflow as df
from ..geometry import (
    axis_angles,
    crossing_angles,
    incident_angles,
    proper_intersection_mask,
)
from ..model import (
    IDEAL_ANGLE_DEFAULT,
    InputError,
    InvariantError,
    LayoutGraph,
    ParameterError,
)

TWO_PI = 2.0 * math.pi

# Blocked kernels evaluate at most this many candidate pair cells at once.
_PAIR_BUDGET = 3_000_000


def _check_radius(r: float) -> float:
    if not (math.isfinite(r) and r > 0):
        raise ParameterError(f"radius must be finite and > 0, got {r}")
    return float(r)


def _check_ideal_angle(ideal_angle: float) -> float:
    if not (0.0 < ideal_angle <= math.pi / 2):
        raise ParameterError(
            f"ideal angle must lie in (0, pi/2] radians, got {ideal_angle}"
        )
    return float(ideal_angle)


# -- serial oracle kernels --------------------------------------------------


def node_occlusion(g: LayoutGraph, r: float) -> int:
    """Unordered vertex pairs with squared distance strictly below (2r)^2."""
    r = _check_radius(r)
    n = g.num_vertices
    if n < 2:
        return 0
    x = g.xy[:, 0]
    y = g.xy[:, 1]
    threshold = (2.0 * r) ** 2
    total = 0
    block = max(1, _PAIR_BUDGET // n)
    cols = np.arange(n)
    for start in range(0, n, block):
        end = min(n, start + block)
        dx = x[start:end, None] - x[None, :]
        dy = y[start:end, None] - y[None, :]
        close = dx * dx + dy * dy < threshold
        upper = cols[None, :] > np.arange(start, end)[:, None]
        total += int(np.count_nonzero(close & upper))
    return total


def min_gap(angles) -> float:
    """Smallest circular gap between consecutive sorted angles in [0, 2*pi)."""
    arr = np.sort(np.asarray(angles, dtype=np.float64))
    if arr.size == 0:
        raise InputError("min_gap requires at least one angle")
    if arr.size == 1:
        return TWO_PI
    wrap = TWO_PI - arr[-1] + arr[0]
    return float(min(np.min(np.diff(arr)), wrap))


def _vertex_angle_deviations(g: LayoutGraph) -> np.ndarray:
    """d_v for every vertex of degree >= 1, in ascending vertex order.

    d_v = (phi - gap_v) / phi with phi = 2*pi/deg(v) and gap_v the minimum
    circular gap between the vertex's incident edge angles.
    """
    e = g.edges
    v = np.concatenate([e[:, 0], e[:, 1]])
    u = np.concatenate([e[:, 1], e[:, 0]])
    ang = incident_angles(
        g.xy[v, 0], g.xy[v, 1], g.xy[u, 0], g.xy[u, 1]
    )
    order = np.lexsort((ang, v))
    sv = v[order]
    sa = ang[order]
    _, starts, degs = np.unique(sv, return_index=True, return_counts=True)
    firsts = sa[starts]
    lasts = sa[starts + degs - 1]
    wrap = TWO_PI - lasts + firsts
    # within-run consecutive diffs; run boundaries masked to +inf, one pad at
    # the end so reduceat segments line up with [starts[k], starts[k+1])
    diffs = np.diff(sa)
    same = sv[1:] == sv[:-1]
    diffs = np.where(same, diffs, np.inf)
    diffs = np.append(diffs, np.inf)
    inner = np.minimum.reduceat(diffs, starts)
    gap = np.minimum(inner, wrap)
    phi = TWO_PI / degs
    return (phi - gap) / phi


def minimum_angle(g: LayoutGraph) -> float:
    """1 minus the mean normalized deviation from each vertex's ideal gap."""
    if g.num_edges == 0:
        return 1.0
    dev = _vertex_angle_deviations(g)
    return 1.0 - float(np.mean(dev))


def edge_lengths(g: LayoutGraph) -> np.ndarray:
    a = g.xy[g.edges[:, 0]]
    b = g.xy[g.edges[:, 1]]
    d = b - a
    return np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])


def edge_length_variation(g: LayoutGraph) -> float:
    """Coefficient-of-variation style spread of edge lengths, in [0, 1]."""
    m = g.num_edges
    if m <= 1:
        return 0.0
    lengths = edge_lengths(g)
    mean = float(np.mean(lengths))
    la = math.sqrt(float(np.sum((lengths - mean) ** 2)) / (m * mean * mean))
    return la / math.sqrt(m - 1)


def _crossing_scan(
    g: LayoutGraph, ideal_angle: float | None = None
) -> tuple[int, float]:
    """(crossing count, sum of |ideal - crossing angle| over crossings).

    Blocked all-pairs scan over non-adjacent edge pairs. Edges are sorted by
    x-min so that for a pair (j earlier, i later) the x-overlap test reduces
    to one comparison; the bounding-box prefilter is a necessary condition
    for proper intersection, so it never changes the count. The deviation sum
    is 0.0 when ideal_angle is None.
    """
    m = g.num_edges
    if m < 2:
        return 0, 0.0
    x = g.xy[:, 0]
    y = g.xy[:, 1]
    e0 = g.edges[:, 0]
    e1 = g.edges[:, 1]
    ax, ay = x[e0], y[e0]
    bx, by = x[e1], y[e1]
    xmin = np.minimum(ax, bx)
    xmax = np.maximum(ax, bx)
    ymin = np.minimum(ay, by)
    ymax = np.maximum(ay, by)

    order = np.argsort(xmin, kind="stable")
    ax, ay, bx, by = ax[order], ay[order], bx[order], by[order]
    xmin, xmax, ymin, ymax = xmin[order], xmax[order], ymin[order], ymax[order]
    sv = e0[order]
    su = e1[order]
    theta = (
        axis_angles(ax, ay, bx, by) if ideal_angle is not None else None
    )

    total = 0
    dev_sum = 0.0
    block = max(1, _PAIR_BUDGET // m)
    for start in range(1, m, block):
        end = min(m, start + block)
        rows = np.arange(start, end)
        # every row in the block has x-min >= xmin[start], so columns whose
        # x-max falls short of that can overlap no row and are dropped up front
        ck = np.nonzero(xmax[:end] >= xmin[start])[0]
        if len(ck) == 0:
            continue
        # j precedes i in x-min order, so x-overlap needs only xmax_j >= xmin_i
        mask = (xmax[ck][None, :] >= xmin[rows, None]) & (
            (ymin[ck][None, :] <= ymax[rows, None])
            & (ymax[ck][None, :] >= ymin[rows, None])
        )
        # kept columns before `start` are below the diagonal for every row in
        # the block; only the trailing ones need the j < i constraint
        pos = int(np.searchsorted(ck, start))
        if pos < len(ck):
            mask[:, pos:] &= ck[pos:][None, :] < rows[:, None]
        ii, jj = np.nonzero(mask)
        if len(ii) == 0:
            continue
        ii = ii + start
        jj = ck[jj]
        shared = (
            (sv[ii] != sv[jj])
            & (sv[ii] != su[jj])
            & (su[ii] != sv[jj])
            & (su[ii] != su[jj])
        )
        ii = ii[shared]
        jj = jj[shared]
        if len(ii) == 0:
            continue
        hit = proper_intersection_mask(
            ax[ii], ay[ii], bx[ii], by[ii], ax[jj], ay[jj], bx[jj], by[jj]
        )
        total += int(np.count_nonzero(hit))
        if ideal_angle is not None and np.any(hit):
            angles = crossing_angles(theta[ii[hit]], theta[jj[hit]])
            dev_sum += float(np.sum(np.abs(ideal_angle - angles)))
    return total, dev_sum


def edge_crossing(g: LayoutGraph) -> int:
    """Count of non-adjacent edge pairs that properly intersect."""
    return _crossing_scan(g)[0]


def edge_crossing_angle(
    g: LayoutGraph, ideal_angle: float = IDEAL_ANGLE_DEFAULT
) -> float:
    """1 minus the mean normalized deviation of crossing angles from ideal."""
    ideal_angle = _check_ideal_angle(ideal_angle)
    total, dev_sum = _crossing_scan(g, ideal_angle)
    if total == 0:
        return 1.0
    return 1.0 - (dev_sum / ideal_angle) / total


# -- dataflow pipelines ------------------------------------------------------


def _positions_table(g: LayoutGraph, exec_cfg: df.ExecConfig) -> df.Table:
    return df.Table.from_columns(
        {"id": g.ids, "x": g.xy[:, 0], "y": g.xy[:, 1]},
        num_partitions=exec_cfg.partitions,
    )


def _edges_table(g: LayoutGraph, exec_cfg: df.ExecConfig) -> df.Table:
    ids = g.edge_ids
    return df.Table.from_columns(
        {"src": ids[:, 0], "dst": ids[:, 1]},
        num_partitions=exec_cfg.partitions,
    )


def _segments_table(g: LayoutGraph, exec_cfg: df.ExecConfig) -> df.Table:
    """Edges joined twice with positions: src/dst ids plus both endpoints."""
    edges = _edges_table(g, exec_cfg)
    pos_s = _positions_table(g, exec_cfg).rename({"id": "sid", "x": "sx", "y": "sy"})
    pos_t = _positions_table(g, exec_cfg).rename({"id": "tid", "x": "tx", "y": "ty"})
    seg = df.join(edges, pos_s, exec_cfg, equi_keys=[("src", "sid")])
    seg = df.join(seg, pos_t, exec_cfg, equi_keys=[("dst", "tid")])
    return seg.select(("src", "dst", "sx", "sy", "tx", "ty"))


def node_occlusion_dataflow(g: LayoutGraph, r: float, exec_cfg: df.ExecConfig) -> int:
    r = _check_radius(r)
    threshold = (2.0 * r) ** 2
    left = _positions_table(g, exec_cfg).rename(
        {"id": "id1", "x": "x1", "y": "y1"}
    )
    right = _positions_table(g, exec_cfg).rename(
        {"id": "id2", "x": "x2", "y": "y2"}
    )

    def close_pair(lv, rv):
        dx = lv["x1"] - rv["x2"]
        dy = lv["y1"] - rv["y2"]
        return (lv["id1"] < rv["id2"]) & (dx * dx + dy * dy < threshold)

    return df.count(df.join(left, right, exec_cfg, predicate=close_pair))


def minimum_angle_dataflow(g: LayoutGraph, exec_cfg: df.ExecConfig) -> float:
    if g.num_edges == 0:
        return 1.0
    ids = g.edge_ids
    directed = df.Table.from_columns(
        {
            "v": np.concatenate([ids[:, 0], ids[:, 1]]),
            "u": np.concatenate([ids[:, 1], ids[:, 0]]),
        },
        num_partitions=exec_cfg.partitions,
    )
    pos_v = _positions_table(g, exec_cfg).rename({"id": "vid", "x": "vx", "y": "vy"})
    pos_u = _positions_table(g, exec_cfg).rename({"id": "uid", "x": "ux", "y": "uy"})
    t = df.join(directed, pos_v, exec_cfg, equi_keys=[("v", "vid")])
    t = df.join(t, pos_u, exec_cfg, equi_keys=[("u", "uid")])
    t = t.with_column(
        "angle",
        lambda blk: incident_angles(blk["vx"], blk["vy"], blk["ux"], blk["uy"]),
        exec_cfg,
    )
    per_vertex = df.group_aggregate(
        t.select(("v", "angle")), ("v",), df.fold_collect("angle"), exec_cfg
    )

    def deviations(blk):
        out = np.empty(len(blk["value"]), dtype=np.float64)
        for i, angles in enumerate(blk["value"]):
            gap = min_gap(angles)
            phi = TWO_PI / len(angles)
            out[i] = (phi - gap) / phi
        return out

    per_vertex = per_vertex.with_column("dev", deviations, exec_cfg)
    stats = df.group_aggregate(
        per_vertex.select(("dev",)), (), df.fold_count_sum("dev"), exec_cfg
    )
    n_vertices, dev_sum = stats.to_rows()[0]["value"]
    return 1.0 - dev_sum / n_vertices


def edge_length_variation_dataflow(g: LayoutGraph, exec_cfg: df.ExecConfig) -> float:
    if g.num_edges <= 1:
        return 0.0
    seg = _segments_table(g, exec_cfg)
    seg = seg.with_column(
        "length",
        lambda blk: np.sqrt(
            (blk["tx"] - blk["sx"]) * (blk["tx"] - blk["sx"])
            + (blk["ty"] - blk["sy"]) * (blk["ty"] - blk["sy"])
        ),
        exec_cfg,
    )
    # each edge reports its length to its smaller-id endpoint exactly once
    per_vertex = df.group_aggregate(
        seg.select(("src", "length")), ("src",), df.fold_collect("length"), exec_cfg
    )
    lengths = df.explode(per_vertex.select(("value",)), "value", exec_cfg)
    n_edges = df.count(lengths)
    if n_edges != g.num_edges:
        raise InvariantError(
            f"length collection produced {n_edges} rows for {g.num_edges} edges"
        )
    total = df.group_aggregate(lengths, (), df.fold_sum("value"), exec_cfg)
    mean = total.to_rows()[0]["value"] / n_edges

    sq = df.Fold(
        init=lambda: 0.0,
        step=lambda s, row: s + (row["value"] - mean) ** 2,
        merge=lambda a, b: a + b,
        step_block=lambda s, blk: s + float(np.sum((blk["value"] - mean) ** 2)),
    )
    sum_sq = df.group_aggregate(lengths, (), sq, exec_cfg).to_rows()[0]["value"]
    la = math.sqrt(sum_sq / (n_edges * mean * mean))
    return la / math.sqrt(n_edges - 1)


def _crossing_pairs_table(g: LayoutGraph, exec_cfg: df.ExecConfig) -> df.Table:
    """All properly intersecting non-adjacent edge pairs, each once."""
    seg = _segments_table(g, exec_cfg).with_column(
        "theta",
        lambda blk: axis_angles(blk["sx"], blk["sy"], blk["tx"], blk["ty"]),
        exec_cfg,
    )
    left = seg.rename(
        {c: c + "1" for c in ("src", "dst", "sx", "sy", "tx", "ty", "theta")}
    )
    right = seg.rename(
        {c: c + "2" for c in ("src", "dst", "sx", "sy", "tx", "ty", "theta")}
    )

    def crossing_pair(lv, rv):
        first = (lv["src1"] < rv["src2"]) | (
            (lv["src1"] == rv["src2"]) & (lv["dst1"] < rv["dst2"])
        )
        disjoint = (
            (lv["src1"] != rv["src2"])
            & (lv["src1"] != rv["dst2"])
            & (lv["dst1"] != rv["src2"])
            & (lv["dst1"] != rv["dst2"])
        )
        hit = proper_intersection_mask(
            lv["sx1"], lv["sy1"], lv["tx1"], lv["ty1"],
            rv["sx2"], rv["sy2"], rv["tx2"], rv["ty2"],
        )
        return first & disjoint & hit

    return df.join(left, right, exec_cfg, predicate=crossing_pair)


def edge_crossing_dataflow(g: LayoutGraph, exec_cfg: df.ExecConfig) -> int:
    if g.num_edges < 2:
        return 0
    return df.count(_crossing_pairs_table(g, exec_cfg))


def crossing_angle_stats_dataflow(
    g: LayoutGraph, ideal_angle: float, exec_cfg: df.ExecConfig
) -> tuple[int, float]:
    """(crossing count, deviation sum) from the relational pipeline."""
    ideal_angle = _check_ideal_angle(ideal_angle)
    if g.num_edges < 2:
        return 0, 0.0
    pairs = _crossing_pairs_table(g, exec_cfg)
    pairs = pairs.with_column(
        "dev",
        lambda blk: np.abs(
            ideal_angle - crossing_angles(blk["theta1"], blk["theta2"])
        ),
        exec_cfg,
    )
    stats = df.group_aggregate(
        pairs.select(("dev",)), (), df.fold_count_sum("dev"), exec_cfg
    )
    n_crossings, dev_sum = stats.to_rows()[0]["value"]
    return int(n_crossings), float(dev_sum)


def edge_crossing_angle_dataflow(
    g: LayoutGraph,
    ideal_angle: float = IDEAL_ANGLE_DEFAULT,
    exec_cfg: df.ExecConfig = df.ExecConfig(),
) -> float:
    total, dev_sum = crossing_angle_stats_dataflow(g, ideal_angle, exec_cfg)
    if total == 0:
        return 1.0
    return 1.0 - (dev_sum / ideal_angle) / total
