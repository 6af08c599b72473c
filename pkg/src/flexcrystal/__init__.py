"""Deformation spaces of the ideal quartz, cristobalite and tridymite frameworks."""

from .framework import PeriodicRealization, ValidationReport, export_json, export_obj, import_json, validate
from .geom3 import Orthogonal3, rotation_from_axis_angle

__all__ = [
    "Orthogonal3",
    "PeriodicRealization",
    "ValidationReport",
    "export_json",
    "export_obj",
    "import_json",
    "rotation_from_axis_angle",
    "validate",
]

__version__ = "0.1.0"
