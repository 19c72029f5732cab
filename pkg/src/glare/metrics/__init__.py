"""Metric kernels: serial oracles, dataflow pipelines, grid/strip variants."""

from .enhanced import (
    build_strips,
    collect_strip_crossing_pairs,
    crossing_angle_stats,
    edge_crossing_angle_enhanced,
    edge_crossing_enhanced,
    node_occlusion_grid,
)
from .exact import (
    crossing_angle_stats_dataflow,
    edge_crossing,
    edge_crossing_angle,
    edge_crossing_angle_dataflow,
    edge_crossing_dataflow,
    edge_length_variation,
    edge_length_variation_dataflow,
    edge_lengths,
    min_gap,
    minimum_angle,
    minimum_angle_dataflow,
    node_occlusion,
    node_occlusion_dataflow,
)
from .sweep import (
    AngleCategoryStats,
    FenwickTree,
    RangeStructure2D,
    StripSegment,
    category_stats,
    count_strip_crossings,
    deviation_from_categories,
    strip_angle_stats,
)

__all__ = [
    "AngleCategoryStats",
    "FenwickTree",
    "RangeStructure2D",
    "StripSegment",
    "build_strips",
    "category_stats",
    "collect_strip_crossing_pairs",
    "count_strip_crossings",
    "crossing_angle_stats",
    "crossing_angle_stats_dataflow",
    "deviation_from_categories",
    "edge_crossing",
    "edge_crossing_angle",
    "edge_crossing_angle_dataflow",
    "edge_crossing_angle_enhanced",
    "edge_crossing_dataflow",
    "edge_crossing_enhanced",
    "edge_length_variation",
    "edge_length_variation_dataflow",
    "edge_lengths",
    "min_gap",
    "minimum_angle",
    "minimum_angle_dataflow",
    "node_occlusion",
    "node_occlusion_dataflow",
    "node_occlusion_grid",
    "strip_angle_stats",
]
