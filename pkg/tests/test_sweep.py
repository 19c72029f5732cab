"""Strip sweep internals: inversion counting, the 2-D range structure, and
the eight-category crossing-angle decomposition."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from glare.geometry import crossing_angle
from glare.metrics.sweep import (
    AngleCategoryStats,
    FenwickTree,
    RangeStructure2D,
    StripSegment,
    _count_task,
    category_stats,
    count_strip_crossings,
    deviation_from_categories,
    run_strip_tasks,
    strip_angle_stats,
)

IDEAL = 7.0 * math.pi / 18.0
CATEGORY_FIELDS = ("lil", "lig", "log", "lol", "ril", "rig", "rog", "rol")


def make_segments(ls, rs, thetas=None):
    thetas = thetas if thetas is not None else [0.3] * len(ls)
    return [
        StripSegment((2 * i, 2 * i + 1), float(l), float(r), float(t))
        for i, (l, r, t) in enumerate(zip(ls, rs, thetas))
    ]


def brute_crossings(segments):
    return sum(
        1
        for i in range(len(segments))
        for j in range(i + 1, len(segments))
        if (segments[i].l - segments[j].l) * (segments[i].r - segments[j].r) < 0
    )


class TestFenwickTree:
    def test_prefix_sums(self):
        ft = FenwickTree(8)
        for pos, val in ((1, 2.0), (3, 1.0), (8, 5.0), (3, 1.0)):
            ft.add(pos, val)
        assert ft.prefix(0) == 0
        assert ft.prefix(2) == 2.0
        assert ft.prefix(3) == 4.0
        assert ft.prefix(8) == 9.0

    @given(st.lists(st.tuples(st.integers(1, 30), st.floats(-5, 5)),
                    max_size=60))
    def test_matches_direct_accumulation(self, updates):
        ft = FenwickTree(30)
        direct = [0.0] * 31
        for pos, val in updates:
            ft.add(pos, val)
            direct[pos] += val
        for q in range(31):
            assert ft.prefix(q) == pytest.approx(sum(direct[: q + 1]), abs=1e-9)


class TestCountStripCrossings:
    def test_single_inversion(self):
        segs = make_segments([0.0, 1.0], [1.0, 0.0])
        assert count_strip_crossings(segs) == 1

    def test_order_preserved_no_crossing(self):
        segs = make_segments([0.0, 1.0], [0.5, 2.0])
        assert count_strip_crossings(segs) == 0

    def test_equal_right_values_do_not_count(self):
        # meeting exactly at the strip boundary is not an inversion
        segs = make_segments([0.0, 1.0], [3.0, 3.0])
        assert count_strip_crossings(segs) == 0

    def test_equal_left_values_do_not_count(self):
        segs = make_segments([2.0, 2.0], [0.0, 1.0])
        assert count_strip_crossings(segs) == 0

    def test_empty_and_singleton(self):
        assert count_strip_crossings([]) == 0
        assert count_strip_crossings(make_segments([1.0], [2.0])) == 0

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_quadratic_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 120))
        # ties included on purpose: quantized endpoints collide often
        ls = rng.integers(0, 12, n).astype(float)
        rs = rng.integers(0, 12, n).astype(float)
        segs = make_segments(ls, rs)
        assert count_strip_crossings(segs) == brute_crossings(segs)


class TestRangeStructure2D:
    def brute(self, entries, inserted, lo, hi, r_min):
        cnt, s = 0, 0.0
        for k in inserted:
            th, rr = entries[k]
            if rr <= r_min:
                continue
            if lo <= hi:
                inside = lo <= th < hi
            else:
                inside = th >= lo or th < hi
            if inside:
                cnt += 1
                s += th
        return cnt, s

    @pytest.mark.parametrize("seed", range(6))
    def test_query_matches_brute_filter(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(1, 50))
        thetas = rng.uniform(0, math.pi, n) % math.pi
        ords = rng.uniform(-3, 3, n)
        rs = RangeStructure2D(thetas.tolist(), ords.tolist())
        entries = list(zip(thetas.tolist(), ords.tolist()))
        inserted = []
        for e in rng.permutation(n):
            rs.insert(int(e))
            inserted.append(int(e))
            for _ in range(3):
                lo, hi = sorted(rng.uniform(0, math.pi, 2).tolist())
                r_min = float(rng.uniform(-3, 3))
                assert rs.query(lo, hi, r_min) == pytest.approx(
                    self.brute(entries, inserted, lo, hi, r_min), abs=1e-9)

    def test_wraparound_query(self):
        thetas = [0.1, 1.5, 3.0]
        ords = [1.0, 1.0, 1.0]
        rs = RangeStructure2D(thetas, ords)
        for e in range(3):
            rs.insert(e)
        cnt, s = rs.query(2.5, 0.5, 0.0)  # [2.5, pi) followed by [0, 0.5)
        assert cnt == 2
        assert s == pytest.approx(3.1)

    def test_only_inserted_entries_visible(self):
        rs = RangeStructure2D([0.5, 0.6], [1.0, 2.0])
        assert rs.query(0.0, math.pi, 0.0) == (0, 0.0)
        rs.insert(1)
        assert rs.query(0.0, math.pi, 0.0) == (1, pytest.approx(0.6))


class TestCategoryStats:
    def single_entry_stats(self, theta_i, r_i, theta_j, r_j, ideal=IDEAL):
        rs = RangeStructure2D([theta_j % math.pi], [r_j])
        rs.insert(0)
        return category_stats(rs, theta_i, r_i, ideal)

    def test_partner_half_ideal_above_is_lil(self):
        theta_i = 1.0
        theta_j = theta_i + IDEAL / 2.0
        st_ = self.single_entry_stats(theta_i, 0.0, theta_j, 1.0)
        assert st_.lil == (1, pytest.approx(theta_j))
        for name in ("lig", "log", "lol", "ril", "rig", "rog", "rol"):
            assert getattr(st_, name) == (0, 0.0)

    def test_partner_below_is_invisible(self):
        st_ = self.single_entry_stats(1.0, 1.0, 1.2, 0.5)
        assert all(
            getattr(st_, f) == (0, 0.0)
            for f in ("lil", "lig", "log", "lol", "ril", "rig", "rog", "rol")
        )

    def test_equal_ordinate_is_invisible(self):
        # the ordinate filter is strictly-above
        st_ = self.single_entry_stats(1.0, 1.0, 1.2, 1.0)
        assert st_.lil == (0, 0.0)

    def test_parallel_partner_costs_full_ideal(self):
        stats = self.single_entry_stats(1.0, 0.0, 1.0, 1.0)
        cnt, dev = deviation_from_categories(stats, 1.0, IDEAL)
        assert cnt == 1
        assert dev == pytest.approx(IDEAL)

    def test_partner_at_ideal_angle_costs_nothing(self):
        theta_i = 0.4
        stats = self.single_entry_stats(theta_i, 0.0, theta_i + IDEAL, 1.0)
        cnt, dev = deviation_from_categories(stats, theta_i, IDEAL)
        assert cnt == 1
        assert dev == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_categories_partition_the_partners(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(1, 60))
        thetas = (rng.uniform(0, math.pi, n) % math.pi).tolist()
        ords = rng.uniform(-4, 4, n).tolist()
        rs = RangeStructure2D(thetas, ords)
        for e in range(n):
            rs.insert(e)
        theta_i = float(rng.uniform(0, math.pi)) % math.pi
        r_i = float(rng.uniform(-4, 4))
        ideal = float(rng.uniform(0.05, math.pi / 2))
        stats = category_stats(rs, theta_i, r_i, ideal)
        above = [(t, o) for t, o in zip(thetas, ords) if o > r_i]
        total = sum(getattr(stats, f)[0] for f in CATEGORY_FIELDS)
        total_theta = sum(getattr(stats, f)[1] for f in CATEGORY_FIELDS)
        assert total == len(above)
        assert total_theta == pytest.approx(sum(t for t, _ in above), abs=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_deviation_matches_direct_loop(self, seed):
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(1, 60))
        thetas = (rng.uniform(0, math.pi, n) % math.pi)
        ords = rng.uniform(-4, 4, n)
        rs = RangeStructure2D(thetas.tolist(), ords.tolist())
        for e in range(n):
            rs.insert(e)
        theta_i = float(rng.uniform(0, math.pi)) % math.pi
        r_i = float(rng.uniform(-4, 4))
        ideal = float(rng.uniform(0.05, math.pi / 2))
        stats = category_stats(rs, theta_i, r_i, ideal)
        cnt, dev = deviation_from_categories(stats, theta_i, ideal)
        mask = ords > r_i
        expect = sum(
            abs(ideal - crossing_angle(theta_i, tj)) for tj in thetas[mask]
        )
        assert cnt == int(mask.sum())
        assert dev == pytest.approx(expect, abs=1e-9 * max(1.0, expect))


class TestStripAngleStats:
    @pytest.mark.parametrize("seed", range(8))
    def test_count_and_deviation_match_brute(self, seed):
        rng = np.random.default_rng(400 + seed)
        n = int(rng.integers(2, 80))
        ls = rng.integers(0, 15, n).astype(float)
        rs_ = rng.integers(0, 15, n).astype(float)
        thetas = (rng.uniform(0, math.pi, n) % math.pi).tolist()
        segs = make_segments(ls, rs_, thetas)
        cnt, dev = strip_angle_stats(segs, IDEAL)
        assert cnt == count_strip_crossings(segs)
        expect = sum(
            abs(IDEAL - crossing_angle(segs[i].theta, segs[j].theta))
            for i in range(n)
            for j in range(i + 1, n)
            if (segs[i].l - segs[j].l) * (segs[i].r - segs[j].r) < 0
        )
        assert dev == pytest.approx(expect, abs=1e-9 * max(1.0, expect))

    def test_empty_strip(self):
        assert strip_angle_stats([], IDEAL) == (0, 0.0)


class TestRunStripTasks:
    def test_serial_equals_parallel(self):
        rng = np.random.default_rng(5)
        tasks = []
        for _ in range(6):
            n = int(rng.integers(2, 40))
            tasks.append(make_segments(
                rng.uniform(0, 9, n), rng.uniform(0, 9, n)))
        serial = run_strip_tasks(_count_task, tasks, workers=1)
        parallel = run_strip_tasks(_count_task, tasks, workers=2)
        assert serial == parallel
        assert serial == [brute_crossings(t) for t in tasks]
