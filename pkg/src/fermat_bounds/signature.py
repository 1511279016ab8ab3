"""
Signature classes of x^r + y^s = z^t and the (b1, b2) constants that turn the
averaged local inequality into an excluded range of heights.

Exponents are normalized as r′ = min(r, s), s′ = max(r, s) and t; u0 = min(r′, t).
For one exponent tuple each of the three cases below is a valid bound whenever
its condition holds, so a tuple takes the smallest applicable value:

    a  (2/s′ ≤ 1/r′ + 1/t)  max{K, K/2 + T/(2u0), T(1/(2r′) + 1/(2t))}
    b  (2/s′ ≥ 1/r′ + 1/t)  max{K, K/3 + 2T/(3r′), T(2/(3r′) + 1/(3t))}
    c  (t = r′)             max{K, K(t−1)/(3t−1) + 2T/(3t−1), T(2s′+t−1)/(s′(3t−1))}

with K = k/n + (3 + a1)/p0 and T = 3 + a1. A class takes the largest value
over its tuples.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.abc_verifier.combiner import CombinerParams, exclusion_certificate
from src.abc_verifier.sweep import VolProvider, check_recorded_constants, params_from_certificate
from src.core.enclosure import LOG2, UNIT_ROUNDOFF, Enclosure
from src.core.errors import CertificateError, DomainError
from src.core.logger import get_logger
from src.core.types import CheckKind, ExclusionCertificateModel
from src.prime_tables.tables import PrimeTables

logger = get_logger(__name__)

CASES = ("a", "b", "c")
# exponents enumerated past the lower end of an unbounded range
SPAN = 32
# relative widening of the float class evaluation (all coefficients positive)
B1_ULPS = 32

EULER_333 = "x^3 + y^3 = z^3 has no solution in positive integers (Euler)"


@dataclass(frozen=True)
class SignatureClass:
    """
    r′ ∈ [r_lo, r_hi], t ∈ [t_lo, t_hi], s′ ≥ max(r′, s_lo); None means unbounded.
    `excluded` lists (r′, s′, t) tuples settled elsewhere.
    """
    name: str
    r_lo: int
    t_lo: int
    s_lo: int = 0
    r_hi: Optional[int] = None
    t_hi: Optional[int] = None
    excluded: Tuple[Tuple[int, int, int], ...] = ()
    external_inputs: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if min(self.r_lo, self.t_lo) < 3:
            raise DomainError("signature classes need every exponent >= 3", name=self.name)
        for lo, hi in ((self.r_lo, self.r_hi), (self.t_lo, self.t_hi)):
            if hi is not None and hi < lo:
                raise DomainError("empty exponent range", name=self.name, lo=lo, hi=hi)

    @property
    def u0_min(self) -> int:
        return min(self.r_lo, self.t_lo)

    @property
    def exact(self) -> bool:
        return self.r_hi == self.r_lo and self.t_hi == self.t_lo

    @property
    def allow_13(self) -> bool:
        """13 may sit in S, and Vol of the primed family may be used, only when u0 ≥ 4."""
        return self.u0_min >= 4

    @property
    def variant(self) -> str:
        return "rlprime" if self.u0_min >= 4 else "rl"

    def contains(self, r: int, s: int, t: int) -> bool:
        rp, sp = min(r, s), max(r, s)
        if (rp, sp, t) in self.excluded:
            return False
        return (
            rp >= self.r_lo
            and (self.r_hi is None or rp <= self.r_hi)
            and t >= self.t_lo
            and (self.t_hi is None or t <= self.t_hi)
            and sp >= self.s_lo
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "r_lo": self.r_lo,
            "r_hi": self.r_hi,
            "t_lo": self.t_lo,
            "t_hi": self.t_hi,
            "s_lo": self.s_lo,
            "excluded": [list(e) for e in self.excluded],
            "external_inputs": list(self.external_inputs),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SignatureClass":
        return cls(
            name=data["name"],
            r_lo=int(data["r_lo"]),
            t_lo=int(data["t_lo"]),
            s_lo=int(data.get("s_lo", 0)),
            r_hi=data.get("r_hi"),
            t_hi=data.get("t_hi"),
            excluded=tuple(tuple(int(v) for v in e) for e in data.get("excluded", [])),
            external_inputs=tuple(data.get("external_inputs", [])),
        )

    @classmethod
    def exponents(cls, r: int, s: int, t: int) -> "SignatureClass":
        rp, sp = min(r, s), max(r, s)
        return cls(name=f"({r},{s},{t})", r_lo=rp, r_hi=rp, t_lo=t, t_hi=t, s_lo=sp)


def min_class(m: int, at_least: bool = False) -> SignatureClass:
    # min{r,s,t} = m is widened to r,s,t ≥ m; the extremal tuple is the same
    return SignatureClass(name=f"min>={m}" if at_least else f"min={m}", r_lo=m, t_lo=m, s_lo=m)


TABLE1_ROWS: List[Tuple[SignatureClass, int]] = [
    (SignatureClass("(3,3)", r_lo=3, r_hi=3, t_lo=3, t_hi=3, s_lo=4, excluded=((3, 3, 3),), external_inputs=(EULER_333,)), 24626),
    (SignatureClass("(3,4)", r_lo=3, r_hi=3, t_lo=4, t_hi=4, s_lo=3), 14750),
    (SignatureClass("(3,>=5)", r_lo=3, r_hi=3, t_lo=5, s_lo=3), 6648),
    (SignatureClass("(4,3)", r_lo=4, r_hi=4, t_lo=3, t_hi=3, s_lo=4), 7254),
    (SignatureClass("(>=5,3)", r_lo=5, t_lo=3, t_hi=3, s_lo=5), 3406),
    (min_class(4), 2283),
    (min_class(5), 907),
    (min_class(6), 697),
    (min_class(7), 635),
    (min_class(8, at_least=True), 573),
]


def table1_row(name: str) -> Tuple[SignatureClass, int]:
    for cls, bound in TABLE1_ROWS:
        if cls.name == name:
            return cls, bound
    raise DomainError("unknown height-bound row", row=name, known=[c.name for c, _ in TABLE1_ROWS])


# --- one tuple, enclosure arithmetic ---

def case_applies(case: str, rp: int, sp: int, t: int) -> bool:
    lhs, rhs = Fraction(2, sp), Fraction(1, rp) + Fraction(1, t)
    if case == "a":
        return lhs <= rhs
    if case == "b":
        return lhs >= rhs
    if case == "c":
        return t == rp
    raise DomainError("unknown case selector", case=case)


def case_coefficients(case: str, rp: int, sp: int, t: int) -> Tuple[Fraction, Fraction, Fraction]:
    """(c1, c2, c3) of max{K, c1·K + c2·T, c3·T}."""
    u0 = min(rp, t)
    if case == "a":
        return Fraction(1, 2), Fraction(1, 2 * u0), Fraction(1, 2 * rp) + Fraction(1, 2 * t)
    if case == "b":
        return Fraction(1, 3), Fraction(2, 3 * rp), Fraction(2, 3 * rp) + Fraction(1, 3 * t)
    if case == "c":
        return Fraction(t - 1, 3 * t - 1), Fraction(2, 3 * t - 1), Fraction(2 * sp + t - 1, sp * (3 * t - 1))
    raise DomainError("unknown case selector", case=case)


def _check_tuple(rp: int, sp: int, t: int):
    if rp > sp:
        raise DomainError("r′ must not exceed s′", r_prime=rp, s_prime=sp)
    if min(rp, t) < 2:
        raise DomainError("exponents must be at least 2", r_prime=rp, t=t)


def case_terms(case: str, rp: int, sp: int, t: int, params: CombinerParams) -> List[Enclosure]:
    K, T = params.slack, params.three_plus_a1
    c1, c2, c3 = case_coefficients(case, rp, sp, t)
    return [K, K * c1 + T * c2, T * c3]


def tuple_b1(rp: int, sp: int, t: int, params: CombinerParams, case: str) -> Enclosure:
    _check_tuple(rp, sp, t)
    if not case_applies(case, rp, sp, t):
        raise DomainError("case does not apply to these exponents", case=case, r_prime=rp, s_prime=sp, t=t)
    K, middle, third = case_terms(case, rp, sp, t, params)
    return K.maximum(middle).maximum(third)


def best_b1(rp: int, sp: int, t: int, params: CombinerParams) -> Tuple[Enclosure, str]:
    """Smallest applicable case value and the case attaining it (by upper end)."""
    _check_tuple(rp, sp, t)
    values = {c: tuple_b1(rp, sp, t, params, c) for c in CASES if case_applies(c, rp, sp, t)}
    case = min(values, key=lambda c: (values[c].hi, c))
    out = values[case]
    for v in values.values():
        out = out.minimum(v)
    return out, case


# --- the whole class, vectorized ---

@dataclass
class B1Table:
    """
    One row per distinct (r′, t, applicable cases) with the smallest s′ of that
    kind; columns hold the per-case coefficients (c1, c2, d1, d2, c3) of
    max{K, c1·K + c2·T, d1·K + d2·T, c3·T}, inf-masked where a case does not apply.
    """
    coeffs: np.ndarray  # (m, 3, 5)
    applies: np.ndarray  # (m, 3) bool
    labels: List[Dict[str, Any]]

    def __len__(self) -> int:
        return len(self.labels)

    def evaluate(self, K: np.ndarray, T: np.ndarray, rows: Optional[np.ndarray] = None) -> np.ndarray:
        """Per-row value for each (K, T) pair: shape (m, N)."""
        K = np.atleast_1d(np.asarray(K, dtype=np.float64))
        T = np.atleast_1d(np.asarray(T, dtype=np.float64))
        coeffs = self.coeffs if rows is None else self.coeffs[rows]
        applies = self.applies if rows is None else self.applies[rows]
        c = coeffs[:, :, :, None]
        value = np.maximum.reduce(
            [
                np.broadcast_to(K, (coeffs.shape[0], coeffs.shape[1], K.size)),
                c[:, :, 0] * K + c[:, :, 1] * T,
                c[:, :, 2] * K + c[:, :, 3] * T,
                c[:, :, 4] * T,
            ]
        )
        value = np.where(applies[:, :, None], value, np.inf)
        return value.min(axis=1)

    def upper(self, K: np.ndarray, T: np.ndarray, rows: Optional[np.ndarray] = None) -> np.ndarray:
        return self.evaluate(K, T, rows).max(axis=0)


def _tail_row(cls: SignatureClass, r_top: Optional[int], t_top: Optional[int]) -> Optional[Tuple[np.ndarray, Dict[str, Any]]]:
    """
    One row bounding every tuple past the enumerated box: case a or b always
    applies, so the larger of their terms at the box's far side bounds the rest.
    """
    regions = []
    if r_top is not None:
        regions.append((r_top + 1, cls.t_lo))
    if t_top is not None:
        regions.append((cls.r_lo, t_top + 1))
    if not regions:
        return None
    c3 = max(
        max(Fraction(1, 2 * rp) + Fraction(1, 2 * t), Fraction(2, 3 * rp) + Fraction(1, 3 * t)) for rp, t in regions
    )
    row = np.zeros((3, 5))
    row[0] = [0.5, 1 / (2 * cls.u0_min), 1 / 3, 2 / (3 * cls.r_lo), float(c3)]
    row[1:] = row[0]
    return row, {"tail": True, "r_prime_from": regions[0][0], "t_from": regions[-1][1]}


@lru_cache(maxsize=64)
def b1_table(cls: SignatureClass, span: int = SPAN) -> B1Table:
    r_top = cls.r_hi if cls.r_hi is not None else cls.r_lo + span
    t_top = cls.t_hi if cls.t_hi is not None else cls.t_lo + span
    coeffs, applies, labels = [], [], []
    seen = set()
    for rp in range(cls.r_lo, r_top + 1):
        for t in range(cls.t_lo, t_top + 1):
            s_first = max(rp, cls.s_lo)
            for sp in range(s_first, max(cls.s_lo, 2 * max(rp, t)) + 2):
                if (rp, sp, t) in cls.excluded:
                    continue
                mask = tuple(case_applies(c, rp, sp, t) for c in CASES)
                if (rp, t, mask) in seen:
                    continue
                seen.add((rp, t, mask))
                row = np.zeros((3, 5))
                for j, c in enumerate(CASES):
                    c1, c2, c3 = case_coefficients(c, rp, sp, t)
                    row[j] = [float(c1), float(c2), 0.0, 0.0, float(c3)]
                coeffs.append(row)
                applies.append(mask)
                labels.append({"r_prime": rp, "s_prime": sp, "t": t})
    tail = _tail_row(
        cls,
        None if cls.r_hi is not None else r_top,
        None if cls.t_hi is not None else t_top,
    )
    if tail is not None:
        coeffs.append(tail[0])
        applies.append((True, False, False))
        labels.append(tail[1])
    if not labels:
        raise DomainError("signature class has no admissible tuple", name=cls.name)
    return B1Table(np.array(coeffs), np.array(applies, dtype=bool), labels)


def class_b1(cls: SignatureClass, params: CombinerParams) -> Tuple[Enclosure, Dict[str, Any]]:
    """
    Enclosure of the class maximum of b1 and the tuple attaining it. Every
    coefficient is positive, so evaluating at the upper (lower) ends of K and T
    and widening by B1_ULPS relative units bounds the exact value.
    """
    table = b1_table(cls)
    K, T = params.slack, params.three_plus_a1
    hi_rows = table.evaluate(np.array([K.hi]), np.array([T.hi]))[:, 0]
    lo_rows = table.evaluate(np.array([K.lo]), np.array([T.lo]))[:, 0]
    i = int(np.argmax(hi_rows))
    rel = B1_ULPS * UNIT_ROUNDOFF
    value = Enclosure(float(lo_rows.max()) * (1 - rel), float(hi_rows[i]) * (1 + rel))
    extremal = dict(table.labels[i])
    if not extremal.get("tail"):
        _, extremal["case"] = best_b1(extremal["r_prime"], extremal["s_prime"], extremal["t"], params)
    return value, extremal


def _check_preconditions(cls: SignatureClass, params: CombinerParams):
    if int(params.S[0]) < 11:
        raise DomainError("S holds a prime below 11", p=int(params.S[0]))
    if cls.u0_min < 4 and np.any(params.S == 13):
        raise DomainError("13 is admissible only when u0 >= 4", signature=cls.name)
    if cls.u0_min < 4 and params.vol_variant == "rlprime":
        raise DomainError("the primed family needs u0 >= 4", signature=cls.name)


def b2_value(cls: SignatureClass, params: CombinerParams) -> Enclosure:
    """a2 + (3 + a1)(a3 + 4 log 2/u0), largest at the smallest u0."""
    return params.a2 + params.three_plus_a1 * (params.a3 + 4 * LOG2 / cls.u0_min)


def b1_b2(cls: SignatureClass, params: CombinerParams) -> Tuple[Enclosure, Enclosure]:
    _check_preconditions(cls, params)
    b1, _ = class_b1(cls, params)
    return b1, b2_value(cls, params)


def exclusion_interval(
    cls: SignatureClass,
    params: CombinerParams,
    selection: Optional[Dict[str, Any]] = None,
) -> Optional[ExclusionCertificateModel]:
    """
    Certificate that log N avoids (b2/(1 − b1), k(S)·log 2) for every primitive
    solution in the class, or None when b1 ≥ 1 or the interval is empty.
    """
    _check_preconditions(cls, params)
    b1, extremal = class_b1(cls, params)
    b2 = b2_value(cls, params)
    if not b1.hi < 1:
        return None
    lower = b2 / (1 - b1)
    upper = params.k_of_S_log2
    if not lower.hi < upper.lo:
        return None
    return exclusion_certificate(
        params,
        lower.hi,
        upper.lo,
        CheckKind.FERMAT_CASE,
        margins={"one_minus_b1": 1 - b1, "width": upper - lower},
        selection=selection,
        b1=b1,
        b2=b2,
        signature={"class": cls.to_dict(), "extremal": extremal},
    )


def revalidate_exclusion(
    cert: ExclusionCertificateModel,
    tables: Optional[PrimeTables] = None,
    provider: Optional[VolProvider] = None,
) -> bool:
    """Recompute a1, a2, a3, b1 and b2 and check the recorded interval sits inside the derived one."""
    if cert.check_kind != CheckKind.FERMAT_CASE or not cert.signature:
        raise CertificateError("not a fermat_case certificate", check_kind=cert.check_kind.value)
    cls = SignatureClass.from_dict(cert.signature["class"])
    params = params_from_certificate(cert, tables, provider)
    check_recorded_constants(cert, params)
    b1, b2 = b1_b2(cls, params)
    if not b1.hi < 1:
        logger.warning("certificate_rejected", signature=cls.name, reason="b1 not below 1", b1=b1.to_dict())
        return False
    lower = b2 / (1 - b1)
    ok = lower.hi <= cert.lower and cert.upper <= params.k_of_S_log2.lo and cert.lower < cert.upper
    if not ok:
        logger.warning("certificate_rejected", signature=cls.name, lower=cert.lower, upper=cert.upper, derived=lower.to_dict())
    return ok


def chain_covers(certs: Sequence[ExclusionCertificateModel], bound: float, cap: float) -> bool:
    """
    Open intervals (lower_i, upper_i), ordered from the top, cover (bound, cap):
    the first reaches cap and each reaches past the previous lower end.
    """
    if not certs:
        return False
    if certs[0].upper < cap:
        return False
    for prev, cur in zip(certs, certs[1:]):
        if not cur.upper > prev.lower:
            return False
    return min(c.lower for c in certs) <= bound


def describe_params(params: CombinerParams) -> Dict[str, Any]:
    return {"p0": params.p0, "n": params.n, "k": params.k, "k_of_S_log2": params.k_of_S_log2.lo}


__all__ = [
    "CASES",
    "TABLE1_ROWS",
    "SignatureClass",
    "b1_b2",
    "b1_table",
    "b2_value",
    "best_b1",
    "case_applies",
    "chain_covers",
    "class_b1",
    "exclusion_interval",
    "min_class",
    "revalidate_exclusion",
    "table1_row",
    "tuple_b1",
]
