"""Per-strip sweep kernels: inversion counting and angle-category statistics.

A segment clipped to one strip is reduced to its boundary ordinates (l at the
left edge, r at the right edge) and its axis angle. Two segments cross inside
the strip exactly when their l-order and r-order disagree, so the crossing
count is an inversion count. The crossing-angle statistics ride along via a
two-layer rank index (`RangeStructure2D`) that answers, for a swept segment,
how many already-inserted partners sit above it on the right boundary within
any half-open angle interval — and what those partners' angles sum to. Eight
such intervals per segment turn the angle sums into exact deviation totals
without enumerating pairs.
"""

from __future__ import annotations

import math
import multiprocessing
from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ..model import InvariantError

PI = math.pi


class StripSegment(NamedTuple):
    """One edge's restriction to one strip, in sweep coordinates."""

    edge_id: tuple
    l: float
    r: float
    theta: float


class FenwickTree:
    """Prefix counters over positions 1..size (binary indexed tree)."""

    __slots__ = ("size", "_tree")

    def __init__(self, size: int):
        self.size = size
        self._tree = [0] * (size + 1)

    def add(self, pos: int, amount: int = 1) -> None:
        tree = self._tree
        while pos <= self.size:
            tree[pos] += amount
            pos += pos & -pos

    def prefix(self, pos: int) -> int:
        tree = self._tree
        total = 0
        while pos > 0:
            total += tree[pos]
            pos -= pos & -pos
        return total


def _count_inversions(ranks: list, size: int) -> int:
    """Pairs (earlier, later) in `ranks` where the earlier rank is larger.

    `ranks` is processed in sweep order; equal ranks never count (strictly
    greater only).
    """
    tree = [0] * (size + 1)
    total = 0
    inserted = 0
    for k in ranks:
        below = 0
        i = k
        while i:
            below += tree[i]
            i -= i & -i
        total += inserted - below
        inserted += 1
        i = k
        while i <= size:
            tree[i] += 1
            i += i & -i
    return total


def _sweep_order(segments: Sequence[StripSegment]):
    """(l, r)-ascending processing order plus 1-based r ranks."""
    n = len(segments)
    l = np.fromiter((s.l for s in segments), dtype=np.float64, count=n)
    r = np.fromiter((s.r for s in segments), dtype=np.float64, count=n)
    order = np.lexsort((r, l))
    uniq, inv = np.unique(r, return_inverse=True)
    ranks = (inv.ravel() + 1).tolist()
    return order.tolist(), ranks, len(uniq)


def count_strip_crossings(segments: Sequence[StripSegment]) -> int:
    """Number of segment pairs whose l-order and r-order disagree.

    Sweeps by nondecreasing l; each segment counts previously inserted
    partners with strictly greater r. Sorting ties in l by ascending r makes
    boundary-touching pairs (equal l or equal r) contribute nothing.
    """
    if len(segments) < 2:
        return 0
    order, ranks, size = _sweep_order(segments)
    return _count_inversions([ranks[i] for i in order], size)


# -- angle-category statistics ------------------------------------------------


class RangeStructure2D:
    """Activatable (angle, ordinate) entries with interval-above queries.

    All entries are supplied up front; ``insert`` activates them one at a
    time in sweep order. ``query(lo, hi, r_min)`` returns ``(count,
    angle_sum)`` over activated entries whose angle lies in the half-open
    interval and whose ordinate is strictly greater than ``r_min``; an
    interval with lo > hi wraps around as [lo, pi) followed by [0, hi).

    Realization: an outer binary indexed tree over angle ranks; each outer
    node stores its angle-range's entries sorted by ordinate with inner
    binary indexed (count, angle-sum) layers over that ordering. Activation
    touches O(log n) nodes; a query walks O(log n) nodes with a bisection
    and an inner prefix walk in each.
    """

    __slots__ = (
        "_n",
        "_sorted_thetas",
        "_thetas",
        "_paths",
        "_node_ords",
        "_node_cnt",
        "_node_sum",
        "_node_inserted",
        "_node_theta_total",
    )

    def __init__(self, thetas, ords):
        thetas = np.asarray(thetas, dtype=np.float64)
        ords = np.asarray(ords, dtype=np.float64)
        if thetas.shape != ords.shape or thetas.ndim != 1:
            raise ValueError("thetas and ords must be 1-d arrays of equal length")
        n = int(thetas.size)
        self._n = n
        self._thetas = thetas.tolist()
        order = np.argsort(thetas, kind="stable")
        self._sorted_thetas = thetas[order].tolist()

        members: list = [[] for _ in range(n + 1)]
        for leaf in range(1, n + 1):
            entry = int(order[leaf - 1])
            k = leaf
            while k <= n:
                members[k].append(entry)
                k += k & -k

        self._paths: list = [[] for _ in range(n)]
        self._node_ords: list = [None] * (n + 1)
        self._node_cnt: list = [None] * (n + 1)
        self._node_sum: list = [None] * (n + 1)
        self._node_inserted = [0] * (n + 1)
        self._node_theta_total = [0.0] * (n + 1)
        ord_list = ords.tolist()
        for k in range(1, n + 1):
            node = members[k]
            node.sort(key=lambda e: (ord_list[e], e))
            self._node_ords[k] = [ord_list[e] for e in node]
            self._node_cnt[k] = [0] * (len(node) + 1)
            self._node_sum[k] = [0.0] * (len(node) + 1)
            for pos, e in enumerate(node, start=1):
                self._paths[e].append((k, pos))

    def __len__(self) -> int:
        return self._n

    def insert(self, entry: int) -> None:
        """Activate one entry by its build-time index."""
        theta = self._thetas[entry]
        inserted = self._node_inserted
        totals = self._node_theta_total
        all_cnt = self._node_cnt
        all_sum = self._node_sum
        for k, pos in self._paths[entry]:
            inserted[k] += 1
            totals[k] += theta
            cnt = all_cnt[k]
            sm = all_sum[k]
            size = len(cnt) - 1
            i = pos
            while i <= size:
                cnt[i] += 1
                sm[i] += theta
                i += i & -i

    def stats_below(self, angle: float, r_min: float) -> tuple:
        """(count, angle_sum) of activated entries with theta < angle, ord > r_min."""
        if angle <= 0.0:
            return 0, 0.0
        if angle >= PI:
            q = self._n
        else:
            q = bisect_left(self._sorted_thetas, angle)
        if q == 0:
            return 0, 0.0
        count = 0
        total = 0.0
        k = q
        while k > 0:
            c = self._node_inserted[k]
            if c:
                s = self._node_theta_total[k]
                p = bisect_right(self._node_ords[k], r_min)
                if p:
                    cnt = self._node_cnt[k]
                    sm = self._node_sum[k]
                    i = p
                    while i > 0:
                        c -= cnt[i]
                        s -= sm[i]
                        i -= i & -i
                count += c
                total += s
            k -= k & -k
        return count, total

    def query(self, lo: float, hi: float, r_min: float) -> tuple:
        """(count, angle_sum) over activated entries in [lo, hi) with ord > r_min."""
        if lo < hi:
            chi, shi = self.stats_below(hi, r_min)
            clo, slo = self.stats_below(lo, r_min)
            return chi - clo, shi - slo
        if lo == hi:
            return 0, 0.0
        c1, s1 = self.query(lo, PI, r_min)
        c2, s2 = self.query(0.0, hi, r_min)
        return c1 + c2, s1 + s2


@dataclass(frozen=True)
class AngleCategoryStats:
    """Per-category (count, angle_sum) pairs for one swept segment.

    Categories classify a partner's angle offset delta = theta_j - theta_i
    over [-pi, pi): right/left for negative/nonnegative delta, inner/outer
    for |delta| below/above pi/2, and less/greater for a crossing angle
    below/above the ideal.
    """

    lil: tuple = (0, 0.0)
    lig: tuple = (0, 0.0)
    log: tuple = (0, 0.0)
    lol: tuple = (0, 0.0)
    ril: tuple = (0, 0.0)
    rig: tuple = (0, 0.0)
    rog: tuple = (0, 0.0)
    rol: tuple = (0, 0.0)


# offset boundaries of the eight categories, ascending over [-pi, pi]
def _category_offsets(ideal_angle: float) -> tuple:
    v = ideal_angle
    return (-PI, -PI + v, -PI / 2, -v, 0.0, v, PI / 2, PI - v, PI)


_CATEGORY_ORDER = ("rol", "rog", "rig", "ril", "lil", "lig", "log", "lol")


def category_stats(
    structure: RangeStructure2D, theta_i: float, r_i: float, ideal_angle: float
) -> AngleCategoryStats:
    """Count/angle-sum of activated partners above r_i, split by category.

    A partner's stored angle always satisfies theta_j = theta_i + delta with
    delta in (-theta_i, pi - theta_i), so each category's offset interval,
    shifted by theta_i and intersected with [0, pi), captures exactly the
    partners whose offset lies in it; the clipped intervals tile [0, pi).
    """
    offsets = _category_offsets(ideal_angle)
    prefixes = []
    full = None
    for off in offsets:
        bound = theta_i + off
        if bound <= 0.0:
            prefixes.append((0, 0.0))
        elif bound >= PI:
            if full is None:
                full = structure.stats_below(PI, r_i)
            prefixes.append(full)
        else:
            prefixes.append(structure.stats_below(bound, r_i))
    cells = {}
    for idx, name in enumerate(_CATEGORY_ORDER):
        c0, s0 = prefixes[idx]
        c1, s1 = prefixes[idx + 1]
        cells[name] = (c1 - c0, s1 - s0)
    return AngleCategoryStats(**cells)


def deviation_from_categories(
    stats: AngleCategoryStats, theta_i: float, ideal_angle: float
) -> tuple:
    """(count, deviation_sum) where deviation_sum = sum of |ideal - a_c|.

    Within one category every partner's crossing angle a_c is the same
    linear function of its stored angle, so the absolute deviations total to
    a closed form in (count, angle_sum) — no per-pair work.
    """
    t = theta_i
    v = ideal_angle
    nlil, slil = stats.lil
    nlig, slig = stats.lig
    nlog, slog = stats.log
    nlol, slol = stats.lol
    nril, sril = stats.ril
    nrig, srig = stats.rig
    nrog, srog = stats.rog
    nrol, srol = stats.rol
    count = nlil + nlig + nlog + nlol + nril + nrig + nrog + nrol
    deviation = (
        (v * nlil - (slil - t * nlil))          # a_c = theta_j - t, below ideal
        + ((slig - t * nlig) - v * nlig)        # a_c = theta_j - t, above
        + ((t * nlog - (slog - PI * nlog)) - v * nlog)  # a_c = pi - (theta_j - t)
        + (v * nlol - (t * nlol - (slol - PI * nlol)))
        + (v * nril - (t * nril - sril))        # a_c = t - theta_j, below ideal
        + ((t * nrig - srig) - v * nrig)        # a_c = t - theta_j, above
        + (((srog + PI * nrog) - t * nrog) - v * nrog)  # a_c = pi - (t - theta_j)
        + (v * nrol - ((srol + PI * nrol) - t * nrol))
    )
    return count, deviation


def strip_angle_stats(
    segments: Sequence[StripSegment], ideal_angle: float
) -> tuple:
    """(crossing count, deviation sum) for one strip's segments.

    Same sweep and tie rules as count_strip_crossings; partners are charged
    to the later-swept segment, and their angle statistics arrive through
    the range structure instead of pair enumeration. A plain counting tree
    shadows the sweep so segments with no partners skip the interval
    queries; the two counts are cross-checked.
    """
    if len(segments) < 2:
        return 0, 0.0
    order, ranks, size = _sweep_order(segments)
    thetas = [s.theta for s in segments]
    ords = [s.r for s in segments]
    structure = RangeStructure2D(thetas, ords)
    side = FenwickTree(size)
    inserted = 0
    total = 0
    deviation = 0.0
    for idx in order:
        rank = ranks[idx]
        above = inserted - side.prefix(rank)
        if above:
            stats = category_stats(structure, thetas[idx], ords[idx], ideal_angle)
            cnt, dev = deviation_from_categories(stats, thetas[idx], ideal_angle)
            if cnt != above:
                raise InvariantError(
                    f"category counts total {cnt} but sweep found {above} partners"
                )
            total += cnt
            deviation += dev
        structure.insert(idx)
        side.add(rank)
        inserted += 1
    return total, deviation


# -- worker-pool plumbing ------------------------------------------------------


def _count_task(segments) -> int:
    return count_strip_crossings(segments)


def _angle_task(args) -> tuple:
    segments, ideal_angle = args
    return strip_angle_stats(segments, ideal_angle)


def run_strip_tasks(fn: Callable, tasks: list, workers: int) -> list:
    """Map fn over per-strip tasks, on a process pool when workers > 1.

    Strips are independent work units; results come back in task order.
    Fork-based workers avoid re-importing; platforms without fork fall back
    to the default start method.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        ctx = multiprocessing.get_context()
    chunksize = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(fn, tasks, chunksize=chunksize))
