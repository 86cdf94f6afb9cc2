"""Orthogonal matrix polynomials on the unit circle.

Left and right orthonormal systems of a matrix measure, their reflection
coefficients, synthesis from prescribed coefficients, Christoffel-Darboux
identities and decay diagnostics for the coefficients.
"""
from .errors import (
    ConfigError,
    DegenerateMeasure,
    DegreeExceedsFormal,
    DimensionMismatch,
    EmptyGrid,
    IncompatiblePair,
    InsufficientMoments,
    MopucError,
    NoConvergence,
    NotHermitian,
    NotPSD,
    NumericalError,
    QuadratureUnderResolved,
    ReflectionTooLarge,
    SingularMatrix,
    VerificationFailed,
)
from .kernels import cd_kernel_left, cd_kernel_right, circle_identity_residual, ratio_unitarity, verify_cd
from .measure import (
    ArcIndicator,
    BernsteinSzego,
    Conjugated,
    DiagonalScalar,
    IdentityLebesgue,
    MatMeasure,
    MomentTable,
    TrigPoly,
    compute_moments,
    inner_left,
    inner_right,
    integrate_circle,
    moment,
)
from .mpoly import MatPoly
from .opuc import (
    OPUCSystem,
    build_system,
    gram_schmidt_left,
    gram_schmidt_right,
    gram_schmidt_system,
    leading_ladder_check,
    reflection_from_coeffs,
    reflection_from_moments,
)
from .rakhmanov import DecayReport, hn_bound_check, nevai_integral, ratio_deviation, scan, verify_system
from .recurrence import (
    ReflectionSequence,
    bernstein_szego_measure,
    favard_synthesize,
    roundtrip,
    szego_step,
)

__version__ = "0.1.0"
