"""Random linear systems driven by Wick products in Kondratiev spaces.

Coefficients are chaos expansions ``sum_alpha c_alpha H_alpha``; time
convolutions multiply them with the Wick product. The package simulates such
systems on truncated multi-index slices and certifies BIBO, l1-l2,
L2-Linf and dissipativity properties with explicit lower/upper bounds.
"""

from ._backend import BACKEND
from .chaos import (
    ChaosExpansion,
    TruncationLossError,
    hermite_transform_eval,
    inner_k,
    norm_k,
    random_expansion,
    white_noise_norm,
    wick_power,
    wick_product,
)
from .continuous import (
    GridMismatchError,
    GridSignal,
    breguet_sabin_oracle,
    certify_cont_bibo,
    cont_bibo_probe,
    cont_bibo_sufficient,
    cont_transfer_check,
    l2linf_certify,
    wick_convolve_grid,
)
from .discrete import (
    CoisometricRealization,
    DiscreteSignal,
    RationalSpec,
    TransferFunction,
    bibo_probe,
    bibo_sufficient,
    certify_bibo,
    dissipativity_check,
    double_convolution_oracle,
    l1l2_certify,
    rational_eval,
    rational_expand,
    realization_verify,
    schur_kernel_gram,
    transfer_eval,
    wick_convolve,
)
from .kernel import kernel_K, membership_Kk
from .multiindex import MultiIndex, PolicyError, TruncationPolicy
from .operators import (
    MultiplierMatrix,
    NonConvergenceError,
    OrderError,
    adjoint_apply,
    assemble,
    operator_norm,
    vage_upper_bound,
)
from .report import CERTIFIED, INCONCLUSIVE, REFUTED, StabilityReport
from .vage import vage_constant

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CERTIFIED",
    "ChaosExpansion",
    "CoisometricRealization",
    "DiscreteSignal",
    "GridMismatchError",
    "GridSignal",
    "INCONCLUSIVE",
    "MultiIndex",
    "MultiplierMatrix",
    "NonConvergenceError",
    "OrderError",
    "PolicyError",
    "REFUTED",
    "RationalSpec",
    "StabilityReport",
    "TransferFunction",
    "TruncationLossError",
    "TruncationPolicy",
    "adjoint_apply",
    "assemble",
    "bibo_probe",
    "bibo_sufficient",
    "breguet_sabin_oracle",
    "certify_bibo",
    "certify_cont_bibo",
    "cont_bibo_probe",
    "cont_bibo_sufficient",
    "cont_transfer_check",
    "dissipativity_check",
    "double_convolution_oracle",
    "hermite_transform_eval",
    "inner_k",
    "kernel_K",
    "l1l2_certify",
    "l2linf_certify",
    "membership_Kk",
    "norm_k",
    "operator_norm",
    "random_expansion",
    "rational_eval",
    "rational_expand",
    "realization_verify",
    "schur_kernel_gram",
    "transfer_eval",
    "vage_constant",
    "vage_upper_bound",
    "white_noise_norm",
    "wick_convolve",
    "wick_convolve_grid",
    "wick_power",
    "wick_product",
]
