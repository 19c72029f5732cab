"""Graph-layout readability metrics with exact and accelerated evaluators.

The package scores 2-D straight-line graph layouts on five readability
metrics — node occlusion, minimum incident angle, edge length variation,
edge crossings, and crossing angles — each computable three ways: a serial
oracle, an equivalent data-parallel pipeline over partitioned tables, and
fast grid/strip approximations for the pairwise metrics.
"""

from .dataflow import ExecConfig, Fold, Table
from .engine import bench, compare, evaluate, generate_layout
from .model import (
    DEFAULT_RADIUS,
    IDEAL_ANGLE_DEFAULT,
    GlareError,
    InputError,
    InvariantError,
    LayoutGraph,
    MetricParams,
    ParameterError,
    ReadabilityReport,
    SchemaError,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_RADIUS",
    "ExecConfig",
    "Fold",
    "GlareError",
    "IDEAL_ANGLE_DEFAULT",
    "InputError",
    "InvariantError",
    "LayoutGraph",
    "MetricParams",
    "ParameterError",
    "ReadabilityReport",
    "SchemaError",
    "Table",
    "bench",
    "compare",
    "evaluate",
    "generate_layout",
    "__version__",
]
