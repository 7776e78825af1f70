"""Matrix-free truncations of infinite-dimensional inverse linear problems,
solved over Krylov subspaces, with structural diagnostics.

The package builds the model operators as matrix-free handles
(:mod:`krylov.operators`), orthonormalizes their Krylov subspaces by the
Arnoldi process (:mod:`krylov.arnoldi`), solves the truncated problems with
GMRES while recording ambient-space convergence indicators
(:mod:`krylov.gmres`), probes reducibility, subspace intersection, and kernel
structure numerically (:mod:`krylov.diagnostics`), approximates operator
inverses by polynomials on spectral disks (:mod:`krylov.polyinv`), and ships
reproducible reference experiments with CSV/SVG output
(:mod:`krylov.experiments`, ``krylov`` CLI).
"""

from .arnoldi import (
    ArnoldiProcess,
    KrylovBasis,
    arnoldi,
    complement_basis,
    distance_to_subspace,
)
from .diagnostics import (
    DiagnosticsReport,
    KernelErrorProfile,
    adjoint_defect_ladder,
    defect_ladder_from_basis,
    intersection_indicator,
    kernel_error_profile,
    krylov_solution_projection,
    reducibility_defect,
)
from .errors import NumericalFailureError, UnsupportedOperatorError
from .experiments import (
    ExperimentSpec,
    ReferenceSolution,
    build_experiment,
    experiment_names,
    polygamma_trigamma,
    reference_solution,
    run_experiment,
)
from .gmres import SolveTrace, TraceRow, gmres_solve, residual_and_error
from .operators import (
    LinearOperatorHandle,
    OperatorMetadata,
    WeightSequence,
    convolution_coefficient,
    make_bilateral_weighted_shift,
    make_dense_operator,
    make_fourier_convolution,
    make_left_shift,
    make_masked_multiplication,
    make_multiplication,
    make_right_shift,
    make_volterra,
    make_weighted_right_shift,
)
from .polyinv import PolySeries, apply_poly, inverse_poly
from .spaces import (
    CoefficientVector,
    Space,
    basis_vector,
    sequence_space,
    slot_to_zindex,
    unit_interval_space,
    vector,
    zero_vector,
    zindex_to_slot,
)

__version__ = "0.1.0"
