"""
Constant checks behind the ε-form of the abc inequality and the large-h tail.

Both run in mpmath interval arithmetic; the tail inequality is certified on
every subinterval of a geometric partition, not only at grid points.
"""
from fractions import Fraction
from typing import List, Tuple

import mpmath
from mpmath import iv

from src.core.clock import Stopwatch
from src.core.enclosure import Enclosure
from src.core.errors import IndecisiveVerdictError
from src.core.logger import get_logger
from src.core.types import EnclosureModel, SweepCertificate
from src.core.verdict import VerdictStatus

logger = get_logger(__name__)

EPSILON = Fraction(1, 10)
DERIVATIVE_GRID = 200
TAIL_X_LO = 31
TAIL_X_HI = 10_000
TAIL_RATIO = Fraction(1001, 1000)


def _iv(q) -> "iv.mpf":
    q = Fraction(q)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def h0_u0(epsilon: Fraction = EPSILON) -> Tuple["iv.mpf", int]:
    """h0 = 400 ε⁻² log ε⁻¹ (interval) and u0 = 64(1 + ε⁻¹)² (exact when ε⁻¹ is an integer)."""
    inv = 1 / Fraction(epsilon)
    h0 = 400 * _iv(inv * inv) * iv.log(_iv(inv))
    u0 = 64 * (1 + inv) ** 2
    return h0, u0


def f_value(x) -> "iv.mpf":
    """log(400x² log x) − log log(400x² log x) − log(64(1+x)²)."""
    X = x if hasattr(x, "delta") else _iv(x)
    inner = 400 * X * X * iv.log(X)
    return iv.log(inner) - iv.log(iv.log(inner)) - iv.log(64 * (1 + X) ** 2)


def f_derivative(x) -> "iv.mpf":
    X = x if hasattr(x, "delta") else _iv(x)
    lx = iv.log(X)
    return 2 / (X * (X + 1)) + (iv.log(400 * lx) - 1) / (X * lx * iv.log(400 * X * X * lx))


def _positive(value, what: str, **context) -> bool:
    if value.a > 0:
        return True
    if value.b <= 0:
        return False
    raise IndecisiveVerdictError(what, lo=float(value.a), hi=float(value.b), **context)


def corollary33_check(epsilon: Fraction = EPSILON, grid: int = DERIVATIVE_GRID) -> SweepCertificate:
    watch = Stopwatch()
    epsilon = Fraction(epsilon)
    inv = 1 / epsilon
    f_at = f_value(inv)
    f_ok = _positive(f_at, "f at 1/epsilon", x=str(inv))

    # f' on a log-spaced grid of [10, 10^6]
    xs = [mpmath.mpf(10) ** (1 + 5 * mpmath.mpf(i) / (grid - 1)) for i in range(grid)]
    derivative_failures = [float(x) for x in xs if not _positive(f_derivative(iv.mpf(x)), "f'", x=float(x))]

    # 8/√u0 = ε/(1+ε): √u0 = 8(1 + ε⁻¹) exactly
    _, u0 = h0_u0(epsilon)
    root_u0 = 8 * (1 + inv)
    identity_ok = root_u0 * root_u0 == u0 and 1 - 8 / root_u0 == 1 / (1 + epsilon)

    h0, _ = h0_u0(epsilon)
    ratio = h0 / iv.log(h0) - _iv(u0)
    ratio_ok = _positive(ratio, "h0/log h0 above u0")
    h0_ok = _positive(h0 - 40000, "h0 above 40000")

    passed = f_ok and not derivative_failures and identity_ok and ratio_ok and h0_ok
    f_enc = Enclosure.from_mpi(f_at)
    logger.info("cor33_checked", f_lo=f_enc.lo, f_hi=f_enc.hi, passed=passed)
    return SweepCertificate(
        kind="cor33",
        status=VerdictStatus.PASS if passed else VerdictStatus.FAIL,
        range=[10.0, 1e6],
        grid=f"{grid} log-spaced points for f'",
        worst_margin=EnclosureModel.of(f_enc),
        points_checked=grid + 1,
        duration_ms=watch.elapsed_ms(),
        details={
            "epsilon": str(epsilon),
            "f": f_enc.to_dict(),
            "f_positive": f_ok,
            "derivative_failures": derivative_failures,
            "u0": str(u0),
            "identity": identity_ok,
            "h0": Enclosure.from_mpi(h0).to_dict(),
            "h0_over_log_h0_minus_u0": Enclosure.from_mpi(ratio).to_dict(),
        },
    )


def _g(X):
    sx = iv.sqrt(X)
    return (
        (1 + _iv("2.165") / X) / (1 - _iv("2.14") / sx) * (1 + iv.log(X) / X)
        + 10 / (3 * sx)
        + _iv("0.08") / X
    )


def _g_cap(X):
    return 1 + 6 / iv.sqrt(X) + _iv("14.5") / X


def tail_constants_check(x_lo: int = TAIL_X_LO, x_hi: int = TAIL_X_HI, ratio: Fraction = TAIL_RATIO) -> SweepCertificate:
    """
    g(x) < 1 + 6/√x + 14.5/x for x in [x_lo, x_hi], each partition cell enclosed
    as a whole, and 3(1 + 6/√31 + 15/31) < 8.
    """
    watch = Stopwatch()
    edges: List[Fraction] = [Fraction(x_lo)]
    while edges[-1] < x_hi:
        edges.append(min(Fraction(float(edges[-1] * ratio)), Fraction(x_hi)))
    worst = None
    failures = []
    for a, b in zip(edges, edges[1:]):
        X = iv.mpf([_iv(a).a, _iv(b).b])
        gap = _g_cap(X) - _g(X)
        if worst is None or gap.a < worst.a:
            worst = gap
        if gap.a <= 0:
            failures.append([float(a), float(b)])

    final = 8 - 3 * (1 + 6 / iv.sqrt(iv.mpf(31)) + _iv(Fraction(15, 31)))
    final_ok = _positive(final, "3(1 + 6/sqrt 31 + 15/31) below 8")
    passed = not failures and final_ok
    logger.info("tail_constants_checked", cells=len(edges) - 1, failures=len(failures), passed=passed)
    return SweepCertificate(
        kind="tail_constants",
        status=VerdictStatus.PASS if passed else VerdictStatus.FAIL,
        range=[float(x_lo), float(x_hi)],
        grid=f"geometric cells, ratio {float(ratio)}",
        worst_margin=EnclosureModel.of(Enclosure.from_mpi(worst)),
        points_checked=len(edges) - 1,
        duration_ms=watch.elapsed_ms(),
        details={
            "failures": failures[:20],
            "final_constant_margin": Enclosure.from_mpi(final).to_dict(),
        },
        notes=["6/sqrt(x) + 15/x decreases in x, so the constant 8 holds for every x >= 31"],
    )
