"""Certified two-sided bounds on the spectral radius of a matrix and the
joint spectral radius of a finite matrix set, from norms of matrix products."""

__version__ = "0.1.0"

from .bounds import (
    BochiReport,
    BoundMode,
    BoundParams,
    BoundSequence,
    CertifiedInterval,
    DigitDecomposition,
    OmegaReport,
    base_d_digits,
    bochi_check,
    bochi_constant,
    bound_params,
    certify,
    omega_recursion_check,
    sigma_nu_closed,
    sigma_nu_exact,
    sweep,
)
from .linalg import (
    ConvergenceError,
    DimensionError,
    NormKind,
    eigen_spectral_radius,
    mat_mul,
    mat_power,
    matrix_norm,
)
from .semigroup import (
    DEFAULT_BUDGET,
    BudgetExhausted,
    MatrixSet,
    PowerNorm,
    ProductWord,
    gsr_lower_estimate,
    nilpotency_check,
    power_norm,
    power_set_norm,
    realize,
    set_norm,
)
