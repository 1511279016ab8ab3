"""
Outward-rounded real intervals.

Every quantity that ends up on either side of a certified inequality is carried
as an Enclosure [lo, hi] that is guaranteed to contain the true value. Float
operations are widened by one ulp per rounding step with math.nextafter;
elementary functions are widened by LOG_ULPS (the libm accuracy we budget for).
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Final, Union

import mpmath

from .errors import DomainError, IndecisiveVerdictError

# libm log/exp/sqrt are within 1 ulp on every platform we target; budget 2.
LOG_ULPS: Final[int] = 2
UNIT_ROUNDOFF: Final[float] = 2.0 ** -53

Number = Union[int, float, Fraction, "Enclosure"]


def _down(x: float, steps: int = 1) -> float:
    for _ in range(steps):
        x = math.nextafter(x, -math.inf)
    return x


def _up(x: float, steps: int = 1) -> float:
    for _ in range(steps):
        x = math.nextafter(x, math.inf)
    return x


def _int_log(n: int) -> float:
    # math.log accepts arbitrarily large ints without overflowing.
    return math.log(n)


@dataclass(frozen=True, slots=True)
class Enclosure:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"Invalid enclosure [{self.lo}, {self.hi}]")

    # --- constructors ---

    @classmethod
    def exact(cls, x: float) -> "Enclosure":
        return cls(x, x)

    @classmethod
    def from_int(cls, n: int) -> "Enclosure":
        try:
            f = float(n)
        except OverflowError:
            raise DomainError("integer too large for a float enclosure", value_bits=n.bit_length())
        if int(f) == n:
            return cls(f, f)
        if int(f) > n:
            return cls(_down(f), f)
        return cls(f, _up(f))

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Enclosure":
        q = Fraction(q)
        f = float(q)
        exact = Fraction(f)
        if exact == q:
            return cls(f, f)
        if exact > q:
            return cls(_down(f), f)
        return cls(f, _up(f))

    @classmethod
    def from_float(cls, x: float) -> "Enclosure":
        """A float literal standing for a decimal constant: widen one ulp each side."""
        return cls(_down(x), _up(x))

    @classmethod
    def coerce(cls, x: Number) -> "Enclosure":
        if isinstance(x, Enclosure):
            return x
        if isinstance(x, bool):
            raise TypeError("bool is not a number here")
        if isinstance(x, int):
            return cls.from_int(x)
        if isinstance(x, Fraction):
            return cls.from_fraction(x)
        if isinstance(x, float):
            return cls(x, x)
        raise TypeError(f"Cannot enclose {type(x).__name__}")

    @classmethod
    def hull(cls, *items: "Enclosure") -> "Enclosure":
        return cls(min(e.lo for e in items), max(e.hi for e in items))

    @classmethod
    def from_mpi(cls, value) -> "Enclosure":
        """Convert an mpmath.iv interval, rounding its endpoints outward to doubles."""
        a = float(value.a)
        b = float(value.b)
        if mpmath.mpf(a) > value.a:
            a = _down(a)
        if mpmath.mpf(b) < value.b:
            b = _up(b)
        return cls(a, b)

    # --- arithmetic ---

    def __add__(self, other: Number) -> "Enclosure":
        o = Enclosure.coerce(other)
        return Enclosure(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other: Number) -> "Enclosure":
        o = Enclosure.coerce(other)
        return Enclosure(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other: Number) -> "Enclosure":
        return Enclosure.coerce(other) - self

    def __mul__(self, other: Number) -> "Enclosure":
        o = Enclosure.coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Enclosure(_down(min(products)), _up(max(products)))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Enclosure":
        o = Enclosure.coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError(f"Divisor enclosure {o} contains zero")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Enclosure(_down(min(quotients)), _up(max(quotients)))

    def __rtruediv__(self, other: Number) -> "Enclosure":
        return Enclosure.coerce(other) / self

    def log(self) -> "Enclosure":
        if self.lo <= 0.0:
            raise DomainError("log of a non-positive enclosure", lo=self.lo, hi=self.hi)
        return Enclosure(_down(math.log(self.lo), LOG_ULPS), _up(math.log(self.hi), LOG_ULPS))

    def exp(self) -> "Enclosure":
        return Enclosure(max(0.0, _down(math.exp(self.lo), LOG_ULPS)), _up(math.exp(self.hi), LOG_ULPS))

    def sqrt(self) -> "Enclosure":
        if self.lo < 0.0:
            raise DomainError("sqrt of a negative enclosure", lo=self.lo, hi=self.hi)
        return Enclosure(max(0.0, _down(math.sqrt(self.lo))), _up(math.sqrt(self.hi)))

    def max0(self) -> "Enclosure":
        return Enclosure(max(0.0, self.lo), max(0.0, self.hi))

    def maximum(self, other: Number) -> "Enclosure":
        o = Enclosure.coerce(other)
        return Enclosure(max(self.lo, o.lo), max(self.hi, o.hi))

    def minimum(self, other: Number) -> "Enclosure":
        o = Enclosure.coerce(other)
        return Enclosure(min(self.lo, o.lo), min(self.hi, o.hi))

    # --- queries ---

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: Union[float, int, Fraction]) -> bool:
        if isinstance(x, (int, Fraction)):
            return Fraction(self.lo) <= x <= Fraction(self.hi)
        return self.lo <= x <= self.hi

    def overlaps(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def definitely_lt(self, other: Number) -> bool:
        return self.hi < Enclosure.coerce(other).lo

    def definitely_le(self, other: Number) -> bool:
        return self.hi <= Enclosure.coerce(other).lo

    def definitely_gt(self, other: Number) -> bool:
        return self.lo > Enclosure.coerce(other).hi

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def log_of(n: Union[int, Fraction]) -> Enclosure:
    """Enclosure of log n for a positive integer or rational (ints may be huge)."""
    if isinstance(n, int):
        if n <= 0:
            raise DomainError("log of non-positive integer", value=n)
        if n == 1:
            return Enclosure(0.0, 0.0)
        v = _int_log(n)
        return Enclosure(_down(v, LOG_ULPS), _up(v, LOG_ULPS))
    q = Fraction(n)
    if q <= 0:
        raise DomainError("log of non-positive rational", value=str(q))
    return log_of(q.numerator) - log_of(q.denominator)


def require_lt(left: Enclosure, right: Enclosure, what: str, **context) -> bool:
    """
    Decide left < right. Returns True/False when decisive, raises otherwise.
    """
    if left.hi < right.lo:
        return True
    if left.lo >= right.hi:
        return False
    raise IndecisiveVerdictError(what, left=left.to_dict(), right=right.to_dict(), **context)


LOG2: Final[Enclosure] = log_of(2)
LOG_PI: Final[Enclosure] = Enclosure(_down(math.log(math.pi), LOG_ULPS + 1), _up(math.log(math.pi), LOG_ULPS + 1))
