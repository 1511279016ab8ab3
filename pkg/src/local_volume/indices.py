"""
Local indices a_p, b_p, d_p and the B0 / B1 / B2 maximization, in exact rationals.

B0 and B1 are evaluated on integers scaled by the common denominator D = 2l·e
(every a, b, d has denominator dividing e and the u-term has denominator 2l),
vectorized over j with numpy when the scaled magnitudes fit in int64.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

import numpy as np

from src.core.errors import DomainError

INT64_SAFE = 1 << 61


@dataclass(frozen=True)
class LocalIndexTriple:
    a: Fraction
    b: Fraction
    d: Fraction


def v_p(p: int, n: int) -> int:
    if n == 0:
        raise DomainError("valuation of zero", p=p)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def a_p(p: int, e: int) -> Fraction:
    return Fraction(-(-(e + 1) // (p - 1)), e)


def b_p(p: int, e: int) -> Fraction:
    """
    sup_{n ≥ 0} (n − pⁿ/e). Consecutive differences are 1 − pⁿ(p−1)/e, so the
    supremum sits at the first n with pⁿ(p−1) ≥ e.
    """
    n = 0
    pn = 1
    while pn * (p - 1) < e:
        n += 1
        pn *= p
    return n - Fraction(pn, e)


def d_p(p: int, e: int) -> Fraction:
    if e % p:
        return 1 - Fraction(1, e)
    return Fraction(1 + v_p(p, e))


def local_indices(p: int, e: int) -> LocalIndexTriple:
    if e < 1:
        raise DomainError("ramification index must be positive", p=p, e=e)
    return LocalIndexTriple(a=a_p(p, e), b=b_p(p, e), d=d_p(p, e))


def v_p_2p(p: int) -> int:
    return 2 if p == 2 else 1


def l0_of(e: int, l: int) -> int:
    return l if e % l == 0 else 1


def admissible_u(e: int, delta: int, l: int) -> range:
    """u = 0 when δ = 0; otherwise the multiples of 2l/gcd(e, 2l) in [0, 2l)."""
    if delta == 0:
        return range(0, 1)
    step = (2 * l) // math.gcd(e, 2 * l)
    return range(0, 2 * l, step)


def _check_admissible(e: int, delta: int, u: int, l: int):
    if delta not in (0, 1):
        raise DomainError("delta must be 0 or 1", delta=delta)
    if delta == 0 and u != 0:
        raise DomainError("u must vanish when delta = 0", e=e, u=u)
    if delta == 1 and not (0 <= u <= 2 * l - 1 and (e * u) % (2 * l) == 0):
        raise DomainError("inadmissible u", e=e, u=u, l=l)


def B0(p: int, e: int, delta: int, u: int, j: int, l: int) -> Fraction:
    _check_admissible(e, delta, u, l)
    if not 1 <= j <= (l - 1) // 2:
        raise DomainError("j out of range", j=j, l=l)
    tri = local_indices(p, e)
    y = Fraction(j * j * u, 2 * l)
    x = -y + j * tri.d + (j + 1) * tri.a
    return max(math.ceil(x) + y, Fraction(v_p_2p(p) * (j + 1))) + (j + 1) * tri.b


def B0_relaxed(p: int, e: int, j: int, l: int) -> Fraction:
    """B0 with ⌈x⌉ replaced by x + 1; independent of u and an upper bound for every admissible u."""
    tri = local_indices(p, e)
    x = j * tri.d + (j + 1) * tri.a + 1
    return max(x, Fraction(v_p_2p(p) * (j + 1))) + (j + 1) * tri.b


def _delta_term(e: int, delta: int, l: int, e0: int) -> Fraction:
    if delta == 0:
        return Fraction(0)
    return 1 - Fraction(1, e0 * l0_of(e, l))


def B1(p: int, e: int, delta: int, u: int, l: int, e0: int) -> Fraction:
    _check_admissible(e, delta, u, l)
    total, denom = _b0_sum_scaled(p, e, u, l, relaxed=False)
    lstar = (l - 1) // 2
    return Fraction(total, denom * lstar) * Fraction(4, l + 5) - _delta_term(e, delta, l, e0)


def B1_relaxed(p: int, e: int, delta: int, l: int, e0: int) -> Fraction:
    total, denom = _b0_sum_scaled(p, e, 0, l, relaxed=True)
    lstar = (l - 1) // 2
    return Fraction(total, denom * lstar) * Fraction(4, l + 5) - _delta_term(e, delta, l, e0)


def _scaled(q: Fraction, denom: int) -> int:
    s = q * denom
    if s.denominator != 1:
        raise ArithmeticError(f"{q} does not scale to an integer by {denom}")
    return s.numerator


def _b0_sum_scaled(p: int, e: int, u: int, l: int, relaxed: bool) -> Tuple[int, int]:
    """
    Σ_{j=1}^{(l−1)/2} B0(p, e, δ, u, j) · D and D = 2l·e.
    """
    tri = local_indices(p, e)
    D = 2 * l * e
    aD, bD, dD = _scaled(tri.a, D), _scaled(tri.b, D), _scaled(tri.d, D)
    v = v_p_2p(p)
    lstar = (l - 1) // 2
    ue = u * e

    bound = lstar * (lstar * lstar * ue + lstar * abs(dD) + (lstar + 1) * (abs(aD) + abs(bD) + (v + 2) * D))
    if bound < INT64_SAFE:
        j = np.arange(1, lstar + 1, dtype=np.int64)
        jj = j * j * ue
        if relaxed:
            term1 = j * dD + (j + 1) * aD + D
        else:
            X = -jj + j * dD + (j + 1) * aD
            term1 = (-((-X) // D)) * D + jj
        term2 = v * (j + 1) * D
        return int(np.sum(np.maximum(term1, term2) + (j + 1) * bD)), D

    total = 0
    for j in range(1, lstar + 1):
        jj = j * j * ue
        if relaxed:
            term1 = j * dD + (j + 1) * aD + D
        else:
            X = -jj + j * dD + (j + 1) * aD
            term1 = (-((-X) // D)) * D + jj
        total += max(term1, v * (j + 1) * D) + (j + 1) * bD
    return total, D


def step0_triples(dataset, p: int) -> List[Tuple[int, int]]:
    """The (e, δ) pairs the dataset admits at p."""
    if p in dataset.special_primes:
        return [(e, 0) for e in sorted(dataset.good_sets.get(p, ()))] + [
            (e, 1) for e in sorted(dataset.multi_sets.get(p, ()))
        ]
    return [(1, 0)] + [(e, 1) for e in sorted(dataset.gen_multi)]


def B2(dataset, p: int) -> Fraction:
    """max of B1 over every admissible (e, δ, u) of Step 0."""
    l, e0 = dataset.base_prime, dataset.base_index
    best = None
    for e, delta in step0_triples(dataset, p):
        for u in admissible_u(e, delta, l):
            value = B1(p, e, delta, u, l, e0)
            if best is None or value > best:
                best = value
    if best is None:
        raise DomainError("dataset admits no local data at p", p=p)
    return best


def B2_relaxed(dataset, p: int) -> Fraction:
    l, e0 = dataset.base_prime, dataset.base_index
    values = [B1_relaxed(p, e, delta, l, e0) for e, delta in step0_triples(dataset, p)]
    if not values:
        raise DomainError("dataset admits no local data at p", p=p)
    return max(values)


def B2_bruteforce(dataset, p: int) -> Fraction:
    """
    Reference maximization: every u in [0, 2l) is tried and filtered by 2l | e·u,
    and B0 is summed term by term in Fractions.
    """
    l, e0 = dataset.base_prime, dataset.base_index
    lstar = (l - 1) // 2
    best = None
    for e, delta in step0_triples(dataset, p):
        for u in range(2 * l):
            if delta == 0 and u != 0:
                continue
            if (e * u) % (2 * l) != 0:
                continue
            s = sum(B0(p, e, delta, u, j, l) for j in range(1, lstar + 1))
            value = s / lstar * Fraction(4, l + 5) - _delta_term(e, delta, l, e0)
            if best is None or value > best:
                best = value
    return best
