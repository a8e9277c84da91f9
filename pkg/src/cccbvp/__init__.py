"""CCC-spline collocation and quasi-collocation for L2 y = f."""
from .bvp import (
    BVPProblem,
    BoundaryElement,
    approximate_rhs,
    boundary_element,
    greens_eval,
    residual_check,
    solve,
    solve_deboor,
    solve_green,
)
from .closedform import ClosedFormSpace
from .examples import exact_solution, get_example
from .harness import ConvergenceReport, ExperimentConfig, emit_profile, run_convergence, sup_error
from .kernels import BACKEND
from .measures import (
    Cosh,
    CustomMeasure,
    Lebesgue,
    MeasureVector,
    Sech2,
    Singular,
    Weight,
    canonical_functions,
    family,
    generalized_derivative,
    reduced_vector,
)
from .operators import condition_estimate, greville_points, interpolate, schoenberg_apply
from .quadrature import gauss_legendre, sqrt_mapped_integral, tension_exact_integral
from .splines import (
    ExtendedPartition,
    SplineFunction,
    SplineSpace,
    UnstableComputationError,
    bspline_eval,
    build_uniform_partition,
    c_integral,
    derive_chain,
    spline_eval,
)

__version__ = "0.1.0"
