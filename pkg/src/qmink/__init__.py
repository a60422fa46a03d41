"""Finite truncations of the Hilbert-space representations of a q-deformed
Minkowski space algebra, with numerical verification of every relation."""

from .qnum import DeformationParams, bracket, curly, sum_identity
from .hilbert import (
    BasisLabel,
    BasisMap,
    Sector,
    SectorKind,
    SpectrumPoint,
    TruncationWindow,
    default_window,
    enumerate_basis,
    spectrum_points,
)
from .operators import (
    NoRepresentationError,
    OperatorSet,
    SparseOperator,
    adjoint,
    build_operators,
    op_circ,
)
from .verify import (
    RelationSpec,
    ResidualReport,
    lightcone_obstruction,
    relation_catalog,
    run_suite,
)

__version__ = "0.1.0"
