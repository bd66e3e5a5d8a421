"""Quantum double ground states and anyon braiding on the doubled Hilbert space.

The density matrix is stored as a sparse vector over doubled group-basis
configurations; channels and real unitaries act on it as permutations with
weights.
"""
from .group_core import (
    ConjugacyPartition,
    FiniteGroup,
    GroupAxiomError,
    GroupSyntaxError,
    builtin_group,
    cyclic_group,
    dihedral_group,
    is_isomorphic,
    load_group,
    parse_group,
    quaternion_group,
    symmetric_group,
)
from .lattice import Lattice, LatticeError, StringSpec, StringSpecError, torus, validate_string_spec
from .doubled_state import SparseState, initial_state, trace_of_rho, overlap_with_I, hermiticity_defect
from .experiments import ExperimentReport, prepare_ground_state, verify_ground_state

__version__ = "0.1.0"

__all__ = [
    "ConjugacyPartition", "FiniteGroup", "GroupAxiomError", "GroupSyntaxError",
    "builtin_group", "cyclic_group", "dihedral_group", "is_isomorphic", "load_group",
    "parse_group", "quaternion_group", "symmetric_group",
    "Lattice", "LatticeError", "StringSpec", "StringSpecError", "torus", "validate_string_spec",
    "SparseState", "initial_state", "trace_of_rho", "overlap_with_I", "hermiticity_defect",
    "ExperimentReport", "prepare_ground_state", "verify_ground_state",
]
