"""Thermodynamic formalism on one-sided topological Markov shifts.

Transfer operators and their Perron-Frobenius data, KMS states of
generalized gauge actions on Cuntz-Krieger algebras (through their diagonal
Markov measures), and entropy limits along continuous orbit equivalences.
"""

from .coe import (
    CoeWitness,
    SubstitutionCode,
    apply_code,
    coboundary_solve,
    cocycle,
    decode,
    entropy_limit_sequence,
    golden_example,
    hn_check,
    is_scoe,
    limit_constants,
    verify_equivalence,
)
from .errors import (
    InvalidMatrix,
    IsPermutation,
    NoBracket,
    NoConvergence,
    NotAdmissible,
    NotIrreducible,
    NotSquare,
    NotZeroOne,
    TooSmall,
)
from .kms import KmsSolution, gauge_kms, kms_condition_check, kms_measure, solve_beta
from .locfun import LocallyConstantFunction, constant, from_symbol_table, indicator
from .measure import MarkovMeasure, expectation
from .ruelle import RpfData, TransferMatrix, apply, build_matrix, rpf
from .sft import (
    PerronData,
    TransitionMatrix,
    admissible_words,
    entropy,
    enumerate_cycles,
    periodic_point_count,
    perron,
    validate,
    zeta_series,
)

__version__ = "0.1.0"
