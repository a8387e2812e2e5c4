from .data import (
    MATRIX_HEADER,
    MODES,
    VELOCITY_HEADER,
    MatrixRow,
    VelocitySeries,
    read_matrix_csv,
    read_velocity_csv,
)
from .errors import SchemaMismatch
from .render import PlotSpec, render_metrics_table, render_velocity_comparison

__version__ = "0.1.0"

__all__ = [
    "MATRIX_HEADER",
    "MODES",
    "VELOCITY_HEADER",
    "MatrixRow",
    "PlotSpec",
    "SchemaMismatch",
    "VelocitySeries",
    "read_matrix_csv",
    "read_velocity_csv",
    "render_metrics_table",
    "render_velocity_comparison",
]
