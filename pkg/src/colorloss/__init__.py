"""Qubit-loss tolerance of topological color codes.

Lattices, the sacrificed-qubit correction protocol, exact series
coefficients of the erased-edge fraction, percolation thresholds, GF(2)
logical checks and Monte Carlo estimators.
"""

from .coeffs import (
    CoefficientTable,
    InstanceRecord,
    LatticeTooSmall,
    MissingSubset,
    NoBracket,
    analytic_threshold,
    coefficient_table,
    coefficient_tables,
    energy,
    enumerate_fully_interacting,
    patch,
    r_of_p,
)
from .gf2 import BitMatrix, DimensionMismatch, class_intact, contains_logical, info_intact, solve
from .lattice import (
    COLORS,
    Color,
    ColorCodeLattice,
    Direction,
    Geometry,
    UnsupportedSize,
    build,
    face_matrix,
    logical_representatives,
    shrunk,
    string_distance,
    validate,
)
from .montecarlo import InsufficientPoints, estimate_r, run_sample, sample_pc, sample_pf, scaling_fit
from .percolation import ErasureState, SequenceIncomplete, onset_fraction, r_c_constant, winding_classes, wraps
from .protocol import DegenerateCode, NotAdjacent, NotAlive, apply_step, average_erased, enumerate_corrections

__version__ = "0.1.0"
