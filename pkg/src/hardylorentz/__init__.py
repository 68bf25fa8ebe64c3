"""Numerical toolkit for Hardy-type inequalities on the cone of non-increasing functions."""

from .characterize import (
    MaximalSpec,
    RestrictedSpec,
    fractional,
    fractional_log,
    hardy_littlewood,
    k_restricted,
    lorentz_maximal,
    maximal_norm,
    maximal_regime,
    restricted_regime,
)
from .constants import (
    ConstantReport,
    copson_constant,
    gks_constant,
    hardy_constant,
    krepick_constant,
    supop_D,
    supop_E,
)
from .errors import HardyLorentzError
from .grid import Grid
from .norms import associate_ggamma_norm, gamma_norm, ggamma_norm, lambda_norm
from .stepfn import StepFn
from .verify import brute_force_background, brute_force_k, equivalence_report
from .weights import Weight, check_admissibility, check_shape, parse_weight, render_weight

__all__ = [
    "ConstantReport", "Grid", "HardyLorentzError", "MaximalSpec", "RestrictedSpec", "StepFn",
    "Weight", "associate_ggamma_norm", "brute_force_background", "brute_force_k",
    "check_admissibility", "check_shape", "copson_constant", "equivalence_report",
    "fractional", "fractional_log", "gamma_norm", "ggamma_norm", "gks_constant",
    "hardy_constant", "hardy_littlewood", "k_restricted", "krepick_constant", "lambda_norm",
    "lorentz_maximal", "maximal_norm", "maximal_regime", "parse_weight", "render_weight",
    "restricted_regime", "supop_D", "supop_E",
]
