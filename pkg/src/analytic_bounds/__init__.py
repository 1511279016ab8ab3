from .constants import CONSTANTS, AnalyticConstants
from .functions import f1, f2, f1_target, f2_target, prefactor, f3_lower_bound, f4_upper_bound, f3_f4_exact
from .sweep import (
    CheckResult,
    auxiliary_certificate,
    auxiliary_checks,
    f1_upper_at,
    f3_f4_check,
    f3_f4_grid,
    sweep_f1,
)

__all__ = [
    "CONSTANTS",
    "AnalyticConstants",
    "f1",
    "f2",
    "f1_target",
    "f2_target",
    "prefactor",
    "f3_lower_bound",
    "f4_upper_bound",
    "f3_f4_exact",
    "CheckResult",
    "auxiliary_checks",
    "auxiliary_certificate",
    "f3_f4_check",
    "f3_f4_grid",
    "sweep_f1",
    "f1_upper_at",
]
