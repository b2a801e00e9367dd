"""Special cube complexes, finite covers, routes and separability certificates."""

from .complex_core import (
    CubeComplex, Cell, SubcomplexRef, LocalIsometry, Hyperplane,
    validate, pathology_report, is_local_isometry, inclusion,
)
from . import generators

__all__ = [
    "CubeComplex", "Cell", "SubcomplexRef", "LocalIsometry", "Hyperplane",
    "validate", "pathology_report", "is_local_isometry", "inclusion", "generators",
]
__version__ = "0.1.0"
