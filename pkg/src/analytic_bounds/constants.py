"""
Constants of the prime-sum estimates. Decimal literals are kept as Fractions so
that they enter enclosures exactly.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Final


@dataclass(frozen=True)
class AnalyticConstants:
    A: int = 28_900_000
    epsilon: Fraction = Fraction("0.006788")
    f1_slope: Fraction = Fraction(1, 2)
    f1_fringe: Fraction = Fraction("0.01865")
    f2_slope: Fraction = Fraction(3, 2)
    f2_fringe: Fraction = Fraction("0.06")
    f1_sweep_start: int = 200_000

    # f3 / f4 closed forms
    f3_shift: Fraction = Fraction("2.14")
    f4_fringe: Fraction = Fraction("4.33")
    f3_f4_min_log: int = 31

    # auxiliary proof computations
    recip_sum_cap: Fraction = Fraction("0.8")
    plogp_head: Fraction = Fraction("0.485")
    plogp_slack: Fraction = Fraction("0.008")
    plogp_tail: Fraction = Fraction("1.523")
    theta_sqrt_ratio: Fraction = Fraction("0.94")


CONSTANTS: Final[AnalyticConstants] = AnalyticConstants()
