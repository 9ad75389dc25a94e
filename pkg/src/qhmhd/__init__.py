"""Pseudo-spectral solvers for quasi-homogeneous and rotating non-homogeneous MHD on the 2-D torus."""

from .errors import (
    ConfigError,
    DegenerateInputError,
    EllipticSolverError,
    GridMismatchError,
    MeanViolationError,
    NumericalBlowUpError,
    QHMHDError,
    ResolutionError,
    TraceAlignmentError,
    VacuumError,
)
from .mhd import (
    Coefficient,
    ElsasserState,
    HProfile,
    LimitState,
    PhysParams,
    PrimitiveState,
    from_elsasser,
    to_elsasser,
)
from .spectral import ScalarField, TorusGrid, VectorField

__version__ = "0.1.0"

__all__ = [
    "Coefficient",
    "ConfigError",
    "DegenerateInputError",
    "ElsasserState",
    "EllipticSolverError",
    "GridMismatchError",
    "HProfile",
    "LimitState",
    "MeanViolationError",
    "NumericalBlowUpError",
    "PhysParams",
    "PrimitiveState",
    "QHMHDError",
    "ResolutionError",
    "ScalarField",
    "TorusGrid",
    "TraceAlignmentError",
    "VacuumError",
    "VectorField",
    "from_elsasser",
    "to_elsasser",
]
