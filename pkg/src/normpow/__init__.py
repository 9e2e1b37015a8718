"""Derivatives of powers of a Euclidean norm and their Hölder constants."""

from .constants import (
    HolderConstants,
    constant_A,
    constant_A_tilde,
    estimate_H_poly,
    extend_H_to_symmetric,
    holder_bound_product,
    holder_constants,
    lipschitz_constant,
    lower_bound_C,
    optimal_H2,
)
from .errors import NormpowError
from .normcalc import (
    DirectionalDerivative,
    Metric,
    deriv_diag,
    deriv_mixed,
    fd_oracle,
    make_metric,
    tau,
    tensor_diff_norm_lb,
    tensor_diff_norms_lb,
)
from .polyfamily import (
    GPoly,
    QPoly,
    boundary_values,
    check_identity_suite,
    eval_poly,
    family_member,
    generate_family,
    poly_derivative,
    shift_q,
)
from .propcheck import run_verification, sample_tensor_holder
from .report import VerifyReport, Violation

__version__ = "0.1.0"

__all__ = [
    "HolderConstants",
    "constant_A",
    "constant_A_tilde",
    "estimate_H_poly",
    "extend_H_to_symmetric",
    "holder_bound_product",
    "holder_constants",
    "lipschitz_constant",
    "lower_bound_C",
    "optimal_H2",
    "NormpowError",
    "DirectionalDerivative",
    "Metric",
    "deriv_diag",
    "deriv_mixed",
    "fd_oracle",
    "make_metric",
    "tau",
    "tensor_diff_norm_lb",
    "tensor_diff_norms_lb",
    "GPoly",
    "QPoly",
    "boundary_values",
    "check_identity_suite",
    "eval_poly",
    "family_member",
    "generate_family",
    "poly_derivative",
    "shift_q",
    "run_verification",
    "sample_tensor_holder",
    "VerifyReport",
    "Violation",
]
