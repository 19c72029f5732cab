"""Columnar table engine: operators, folds, and partition-layout invariance."""

import numpy as np
import pytest

from glare.dataflow import (
    ExecConfig,
    Fold,
    Table,
    count,
    distinct,
    explode,
    fold_collect,
    fold_count_sum,
    fold_sum,
    group_aggregate,
    join,
)
from glare.model import InputError, ParameterError


def small_table(num_partitions=1):
    return Table.from_columns(
        {"k": [0, 1, 0, 2, 1, 0], "v": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]},
        num_partitions=num_partitions,
    )


class TestTableBasics:
    def test_from_columns_round_trip(self):
        t = small_table()
        assert t.columns == ("k", "v")
        assert t.num_rows() == 6
        assert t.to_rows()[2] == {"k": 0, "v": 3.0}

    def test_from_rows(self):
        rows = [{"a": 1, "b": "x"}, {"a": 2, "b": "y"}]
        t = Table.from_rows(rows, ("a", "b"))
        assert t.to_rows() == rows

    def test_ragged_partition_rejected(self):
        with pytest.raises(InputError, match="ragged"):
            Table([{"a": np.arange(3), "b": np.arange(2)}])

    def test_partition_schema_mismatch_rejected(self):
        with pytest.raises(InputError):
            Table([{"a": np.arange(2)}, {"b": np.arange(2)}], columns=("a",))

    def test_repartition_preserves_rows_any_split(self):
        t = small_table()
        for n in (1, 2, 3, 4, 7):
            t2 = t.repartition(n)
            assert t2.num_partitions == n
            assert t2.to_rows() == t.to_rows()

    def test_repartition_handles_list_and_scalar_columns_together(self):
        # regression: mixed chunk kinds must use identical split bounds
        n = 75
        t = Table.from_columns(
            {"v": list(range(n)), "arr": [[i, i + 1] for i in range(n)]}
        )
        for parts in (2, 4, 8):
            t2 = t.repartition(parts)  # Table.__init__ validates lengths
            assert t2.num_rows() == n

    def test_select_and_rename(self):
        t = small_table()
        assert t.select(["v"]).columns == ("v",)
        assert t.rename({"v": "w"}).columns == ("k", "w")
        with pytest.raises(InputError):
            t.select(["nope"])
        with pytest.raises(InputError):
            t.rename({"v": "k"})

    def test_with_column(self):
        t = small_table(num_partitions=2)
        t2 = t.with_column("double", lambda part: part["v"] * 2.0)
        assert [r["double"] for r in t2.to_rows()] == [2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
        with pytest.raises(InputError, match="already exists"):
            t.with_column("v", lambda part: part["v"])

    def test_union(self):
        t = small_table()
        u = t.union(t)
        assert u.num_rows() == 12

    def test_exec_config_validation(self):
        with pytest.raises(ParameterError):
            ExecConfig(workers=0)
        with pytest.raises(ParameterError):
            ExecConfig(workers=1, target_partitions=0)
        assert ExecConfig(workers=3).partitions == 12
        assert ExecConfig(workers=3, target_partitions=5).partitions == 5


class TestOperators:
    def test_count(self):
        assert count(small_table(num_partitions=3)) == 6

    def test_distinct_across_partitions(self):
        t = Table.from_columns({"a": [1, 2, 1, 3, 2, 1]}, num_partitions=3)
        got = sorted(r["a"] for r in distinct(t).to_rows())
        assert got == [1, 2, 3]

    def test_explode(self):
        t = Table.from_columns({"k": [1, 2, 3], "arr": [[10, 11], [], [12]]})
        out = explode(t, "arr")
        assert [(r["k"], r["arr"]) for r in out.to_rows()] == [
            (1, 10), (1, 11), (3, 12)]

    def test_explode_non_array_column_rejected(self):
        t = small_table()
        with pytest.raises(ParameterError):
            explode(t, "v")
        with pytest.raises(InputError):
            explode(t, "missing")

    def test_group_sum_matches_reference(self):
        t = small_table(num_partitions=3)
        out = group_aggregate(t, ["k"], fold_sum("v"))
        got = {r["k"]: r["value"] for r in out.to_rows()}
        assert got == {0: 10.0, 1: 7.0, 2: 4.0}

    def test_group_count_sum_keeps_integer_counts(self):
        t = small_table(num_partitions=2)
        out = group_aggregate(t, ["k"], fold_count_sum("v"))
        got = {r["k"]: r["value"] for r in out.to_rows()}
        assert got[0] == (3, 10.0)
        assert isinstance(got[0][0], int)

    def test_group_collect_sorts(self):
        t = small_table(num_partitions=3)
        out = group_aggregate(t, ["k"], fold_collect("v"))
        got = {r["k"]: r["value"].tolist() for r in out.to_rows()}
        assert got == {0: [1.0, 3.0, 6.0], 1: [2.0, 5.0], 2: [4.0]}

    def test_global_aggregate_without_keys(self):
        t = small_table(num_partitions=2)
        out = group_aggregate(t, [], fold_sum("v"))
        rows = out.to_rows()
        assert len(rows) == 1
        assert rows[0]["value"] == 21.0

    def test_global_aggregate_on_empty_table_yields_init(self):
        t = Table.from_columns({"v": np.empty(0, dtype=float)})
        rows = group_aggregate(t, [], fold_sum("v")).to_rows()
        assert rows == [{"value": 0.0}]

    def test_cross_join_cardinality(self):
        t1 = Table.from_columns({"a": [1, 2, 3]})
        t2 = Table.from_columns({"b": [10, 20]})
        out = join(t1, t2)
        assert out.num_rows() == 6
        assert sorted((r["a"], r["b"]) for r in out.to_rows()) == [
            (1, 10), (1, 20), (2, 10), (2, 20), (3, 10), (3, 20)]

    def test_equi_join_matches_reference(self):
        rng = np.random.default_rng(3)
        left = Table.from_columns(
            {"k1": rng.integers(0, 8, 40), "x": rng.normal(size=40)},
            num_partitions=3,
        )
        right = Table.from_columns(
            {"k2": rng.integers(0, 8, 30), "y": rng.normal(size=30)},
            num_partitions=2,
        )
        out = join(left, right, equi_keys=[("k1", "k2")])
        got = sorted((r["k1"], r["x"], r["y"]) for r in out.to_rows())
        expect = sorted(
            (lr["k1"], lr["x"], rr["y"])
            for lr in left.to_rows()
            for rr in right.to_rows()
            if lr["k1"] == rr["k2"]
        )
        assert got == expect

    def test_predicate_join_matches_reference(self):
        rng = np.random.default_rng(4)
        t = Table.from_columns({"i": np.arange(25), "u": rng.normal(size=25)})
        left = t.rename({"i": "i1", "u": "u1"})
        right = t.rename({"i": "i2", "u": "u2"})
        out = join(
            left,
            right,
            predicate=lambda lv, rv: (lv["i1"] < rv["i2"]) & (lv["u1"] > rv["u2"]),
        )
        got = sorted((r["i1"], r["i2"]) for r in out.to_rows())
        rows = t.to_rows()
        expect = sorted(
            (a["i"], b["i"]) for a in rows for b in rows
            if a["i"] < b["i"] and a["u"] > b["u"]
        )
        assert got == expect

    def test_join_column_collision_rejected(self):
        t = small_table()
        with pytest.raises(InputError, match="collision"):
            join(t, t)

    def test_join_rejects_keys_and_predicate_together(self):
        t1 = Table.from_columns({"a": [1]})
        t2 = Table.from_columns({"b": [1]})
        with pytest.raises(ParameterError):
            join(t1, t2, equi_keys=[("a", "b")], predicate=lambda l, r: l["a"] == r["b"])


class TestPartitionInvariance:
    """Results must not depend on partition layout or worker count."""

    @pytest.mark.parametrize("partitions", [1, 2, 8])
    @pytest.mark.parametrize("workers", [1, 3])
    def test_pipeline_invariant(self, partitions, workers):
        cfg = ExecConfig(workers=workers, target_partitions=partitions)
        rng = np.random.default_rng(9)
        t = Table.from_columns(
            {"k": rng.integers(0, 6, 97), "v": rng.normal(size=97)},
            num_partitions=partitions,
        )
        sums = group_aggregate(t, ["k"], fold_sum("v"), exec_cfg=cfg)
        got_sums = {r["k"]: r["value"] for r in sums.to_rows()}

        collected = group_aggregate(t, ["k"], fold_collect("v"), exec_cfg=cfg)
        flat = explode(collected, "value", exec_cfg=cfg)
        assert count(flat) == 97

        dedup = distinct(t.select(["k"]), exec_cfg=cfg)
        assert sorted(r["k"] for r in dedup.to_rows()) == [0, 1, 2, 3, 4, 5]

        reference = {}
        for row in t.to_rows():
            reference[row["k"]] = reference.get(row["k"], 0.0) + row["v"]
        for k, v in reference.items():
            assert got_sums[k] == pytest.approx(v, rel=1e-12)

    @pytest.mark.parametrize("partitions", [1, 3, 8])
    def test_equi_join_partition_invariant(self, partitions):
        cfg = ExecConfig(workers=2, target_partitions=partitions)
        rng = np.random.default_rng(11)
        left = Table.from_columns(
            {"k1": rng.integers(0, 5, 33), "x": np.arange(33)},
            num_partitions=partitions,
        )
        right = Table.from_columns(
            {"k2": rng.integers(0, 5, 21), "y": np.arange(21)},
            num_partitions=max(1, partitions - 1),
        )
        out = join(left, right, exec_cfg=cfg, equi_keys=[("k1", "k2")])
        got = sorted((r["x"], r["y"]) for r in out.to_rows())
        expect = sorted(
            (lr["x"], rr["y"])
            for lr in left.to_rows()
            for rr in right.to_rows()
            if lr["k1"] == rr["k2"]
        )
        assert got == expect


class TestCustomFold:
    def test_fold_contract_with_step_block(self):
        t = Table.from_columns({"v": np.arange(10.0)}, num_partitions=4)
        sq = Fold(
            init=lambda: 0.0,
            step=lambda s, row: s + row["v"] ** 2,
            merge=lambda a, b: a + b,
            step_block=lambda s, block: s + float(np.sum(block["v"] ** 2)),
        )
        rows = group_aggregate(t, [], sq).to_rows()
        assert rows[0]["value"] == pytest.approx(285.0)
