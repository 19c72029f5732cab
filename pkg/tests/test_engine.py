"""Evaluation orchestration: mode dispatch, warnings, compare, and bench."""

import math

import pytest

from glare.dataflow import ExecConfig
from glare.engine import bench, compare, evaluate, generate_layout
from glare.graphio import random_graph, random_layout
from glare.metrics.exact import edge_crossing, node_occlusion
from glare.model import (
    WARN_FEW_EDGES_LENGTH,
    WARN_NO_CROSSINGS,
    WARN_NO_EDGES_ANGLE,
    MetricParams,
    ParameterError,
)
from conftest import graph_from, x_graph


class TestEvaluate:
    def test_oracle_default_metrics(self):
        rep = evaluate(x_graph())
        assert rep.mode == "oracle"
        assert rep.node_occlusion == 0
        assert rep.minimum_angle is not None
        assert rep.edge_length_variation == pytest.approx(0.0)
        assert rep.edge_crossing == 1
        assert rep.edge_crossing_angle == pytest.approx(5.0 / 7.0)
        assert rep.elapsed["edge_crossing"] >= 0.0

    def test_metric_subset(self):
        rep = evaluate(x_graph(), metrics=["ec", "nc"])
        assert rep.edge_crossing == 1
        assert rep.minimum_angle is None
        assert set(rep.elapsed) == {"node_occlusion", "edge_crossing"}

    def test_unknown_metric_rejected(self):
        with pytest.raises(ParameterError):
            evaluate(x_graph(), metrics=["bogus"])
        with pytest.raises(ParameterError):
            evaluate(x_graph(), metrics=[])

    def test_unknown_mode_rejected(self):
        with pytest.raises(ParameterError):
            evaluate(x_graph(), mode="fastest")

    def test_alias_not_accepted_here(self):
        # the "exact" shorthand is resolved by the service/CLI layers; the
        # engine itself only takes canonical mode names
        with pytest.raises(ParameterError):
            evaluate(x_graph(), mode="exact")
        assert evaluate(x_graph(), mode="exact-parallel").mode == "exact-parallel"

    def test_exact_parallel_matches_oracle(self):
        g = random_layout(random_graph(40, 120, seed=1), extent=20.0, seed=2)
        a = evaluate(g, "oracle")
        b = evaluate(g, "exact-parallel",
                     exec_cfg=ExecConfig(workers=2, target_partitions=5))
        assert a.node_occlusion == b.node_occlusion
        assert a.edge_crossing == b.edge_crossing
        assert a.minimum_angle == pytest.approx(b.minimum_angle, rel=1e-9)
        assert a.edge_length_variation == pytest.approx(
            b.edge_length_variation, rel=1e-9)
        assert a.edge_crossing_angle == pytest.approx(
            b.edge_crossing_angle, rel=1e-9)

    def test_enhanced_mode_restricts_metrics(self):
        rep = evaluate(x_graph(), mode="enhanced")
        assert rep.minimum_angle is None
        assert rep.edge_length_variation is None
        assert rep.node_occlusion == 0
        with pytest.raises(ParameterError):
            evaluate(x_graph(), mode="enhanced", metrics=["ma"])

    def test_params_echoed(self):
        params = MetricParams(radius=2.0, ideal_angle=math.pi / 3,
                              strip_fraction=0.2, orientation="both")
        rep = evaluate(x_graph(), params=params,
                       exec_cfg=ExecConfig(workers=2))
        assert rep.params["radius"] == 2.0
        assert rep.params["ideal_angle_deg"] == pytest.approx(60.0)
        assert rep.params["strip_fraction"] == 0.2
        assert rep.params["orientation"] == "both"
        assert rep.params["threads"] == 2

    def test_invalid_params_rejected(self):
        with pytest.raises(ParameterError):
            evaluate(x_graph(), params=MetricParams(radius=-1.0))

    def test_warnings_for_degenerate_graphs(self):
        lonely = graph_from({0: (0.0, 0.0), 1: (1.0, 1.0)}, [])
        rep = evaluate(lonely)
        assert rep.minimum_angle == 1.0
        assert WARN_NO_EDGES_ANGLE in rep.warnings
        assert WARN_FEW_EDGES_LENGTH in rep.warnings
        assert WARN_NO_CROSSINGS in rep.warnings

    def test_no_warnings_on_healthy_graph(self):
        assert evaluate(x_graph()).warnings == []


class TestCompare:
    def test_rows_schema_and_agreement_on_small_graph(self):
        # crossing far from any strip boundary: both paths see it
        g = graph_from(
            {0: (0.0, 0.0), 1: (1.0, 1.0), 2: (0.0, 0.7), 3: (1.0, 0.2)},
            [(0, 1), (2, 3)],
        )
        rows = compare(g, params=MetricParams(strip_fraction=0.25))
        by_key = {r["metric"]: r for r in rows}
        assert list(by_key) == ["nc", "ec", "eca"]
        assert by_key["ec"]["oracle"] == 1
        assert by_key["ec"]["enhanced"] == 1
        assert by_key["ec"]["pct_error"] == 0.0
        assert not by_key["ec"]["flagged"]

    def test_zero_oracle_zero_enhanced_is_zero_error(self):
        g = graph_from({0: (0.0, 0.0), 1: (1.0, 0.0), 2: (0.0, 1.0),
                        3: (1.0, 1.0)}, [(0, 1), (2, 3)])
        rows = compare(g, params=MetricParams(strip_fraction=0.25))
        ec = next(r for r in rows if r["metric"] == "ec")
        assert ec["pct_error"] == 0.0 and not ec["flagged"]

    def test_undercount_shows_positive_error(self):
        # boundary-tie construction: oracle 1, enhanced 0 at fraction 0.5
        rows = compare(x_graph(), params=MetricParams(strip_fraction=0.5),
                       metrics=["ec"])
        row = rows[0]
        assert row["oracle"] == 1 and row["enhanced"] == 0
        assert row["pct_error"] == pytest.approx(100.0)
        assert not row["flagged"]

    def test_exact_only_metric_rejected(self):
        with pytest.raises(ParameterError):
            compare(x_graph(), metrics=["ml"])


class TestBench:
    def test_rows_and_value_consistency(self):
        g = random_layout(random_graph(50, 150, seed=5), extent=20.0, seed=6)
        rows = bench(g, mode="enhanced", thread_counts=(1, 2),
                     metrics=["nc", "ec"])
        assert {r["threads"] for r in rows} == {1, 2}
        assert {r["metric"] for r in rows} == {"nc", "ec"}
        base = {r["metric"]: r for r in rows if r["threads"] == 1}
        assert all(r["speedup"] == 1.0 for r in base.values())
        for r in rows:
            assert r["seconds"] >= 0.0
            assert r["value"] == base[r["metric"]]["value"]
            expected = node_occlusion(g, 0.5) if r["metric"] == "nc" else None
            if expected is not None:
                assert r["value"] == expected

    def test_oracle_speedup_pinned_at_one(self):
        g = x_graph()
        rows = bench(g, mode="oracle", thread_counts=(1, 2), metrics=["ec"])
        assert all(r["speedup"] == 1.0 for r in rows)
        assert all(r["value"] == 1 for r in rows)

    def test_thread_list_validated(self):
        g = x_graph()
        with pytest.raises(ParameterError):
            bench(g, thread_counts=())
        with pytest.raises(ParameterError):
            bench(g, thread_counts=(2, 1))
        with pytest.raises(ParameterError):
            bench(g, thread_counts=(1, 1))
        with pytest.raises(ParameterError):
            bench(g, thread_counts=(0, 2))


class TestGenerateLayout:
    def test_kinds_and_determinism(self):
        edges = random_graph(20, 40, seed=1)
        a = generate_layout(edges, "random", seed=5)
        b = generate_layout(edges, "random", seed=5)
        assert (a.xy == b.xy).all()
        c = generate_layout(edges, "fr", seed=5, iterations=10)
        assert c.num_vertices == 20
        with pytest.raises(ParameterError):
            generate_layout(edges, "spiral", seed=1)

    def test_extent_respected(self):
        edges = random_graph(15, 30, seed=2)
        g = generate_layout(edges, "random", seed=3, extent=7.0)
        assert g.xy.max() <= 7.0 and g.xy.min() >= 0.0
