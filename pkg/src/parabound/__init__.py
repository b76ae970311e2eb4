"""Fundamental solutions and sharp gradient bounds for constant-coefficient
parabolic Cauchy problems on R^n x (0, T).

The homogeneous problem evolves initial data phi by convolution with an
anisotropic drift-shifted Gaussian kernel; the nonhomogeneous problem
integrates a forcing term against the same kernel over time. For both,
this package evaluates the kernel, solves pointwise, computes the sharp
coefficients bounding |du/dl| and |grad u| in terms of the data's L^p
norm, and verifies correctness and sharpness with independent quadrature
oracles.
"""

from .errors import (
    AsymmetricInput,
    DivergentIntegral,
    DomainError,
    ExponentTooSmall,
    InvalidExponent,
    MalformedGridFile,
    NonpositiveTime,
    NotPositiveDefinite,
    ParaboundError,
    QuadratureFailure,
    UnsupportedData,
)
from .kernel import FundamentalSolution, ProblemSpec
from .mathcore import (
    SpdDecomposition,
    SpdMatrix,
    decompose,
    duhamel_time_integral,
    gamma,
    log_gamma,
    lower_incomplete_gamma,
    spectral_norm_inv_sqrt,
)
from .sharp_constants import (
    BoundQuery,
    SharpConstant,
    conjugate_exponent,
    evaluate_query,
    radial_integral,
    sharp_coefficient_hom,
    sharp_coefficient_nonhom,
    sphere_integral,
)
from .solver import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    gradient_homogeneous,
    gradient_nonhomogeneous,
    solve_batch,
    solve_homogeneous,
    solve_nonhomogeneous,
)
from .sources import (
    BoxIndicator,
    ConstantData,
    GaussianBump,
    GridData,
    PolynomialGaussian,
    SourceFunction,
    SpaceTimeSource,
    TimeInvariantForcing,
    read_grid,
    write_grid,
)
from .verify import (
    ExtremalTarget,
    VerificationReport,
    attainment_ratio_hom,
    attainment_ratio_nonhom,
    b_invariance_check,
    default_checks,
    extremal_forcing,
    extremal_initial_data,
    kernel_grad_norm_oracle,
    mass_quadrature_oracle,
    max_principle_check,
    random_problem,
    run_checks,
    spacetime_grad_norm_oracle,
)

__version__ = "0.1.0"
