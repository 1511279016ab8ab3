"""
Exhaustive search for x^r + y^s = z^t with every exponent ≥ k_min, bases ≥ 2
and log(x^r y^s z^t) < h_max.

Solutions are listed once, as a = x^r ≤ b = y^s. With c = z^t:

    b ≥ c/2 and a ≥ 2^k_min give  abc ≥ 2^k_min·c²/2,  so  c ≤ √(2e^h/2^k_min)
    b ≥ c/2 gives                 abc ≥ a·c²/2,        so  a ≤ 2e^h/c²

Both caps are applied with slack 2 and recorded in the report.
"""
import math
from typing import Any, Dict, List, Optional, Tuple

import gmpy2
import mpmath

from src.core.clock import Stopwatch
from src.core.config import DeterministicRNG
from src.core.enclosure import Enclosure, log_of
from src.core.errors import CapacityError, DomainError
from src.core.logger import get_logger
from src.core.types import EnclosureModel, SearchReport, SolutionModel
from src.core.verdict import VerdictStatus
from src.core.workers import ordered_map

from .index import PerfectPowerIndex, build_power_index, iroot_floor, is_power_at_least

logger = get_logger(__name__)

H_MAX_CAP = 700.0
SLACK = 2

CAP_JUSTIFICATION = [
    "x^r <= y^s and x^r + y^s = z^t give y^s >= z^t/2",
    "x^r >= 2^k_min, so e^h > x^r y^s z^t >= 2^k_min (z^t)^2 / 2 and z^t < sqrt(2 e^h / 2^k_min)",
    "e^h > x^r y^s z^t >= x^r (z^t)^2 / 2, so x^r < 2 e^h / (z^t)^2",
]


def exp_ceiling(h: float) -> int:
    """An integer E ≥ e^h."""
    bits = int(h * 1.4427) + 64
    with mpmath.workprec(bits):
        return int(mpmath.floor(mpmath.exp(mpmath.mpf(h)))) + 2


def search_caps(h_max: float, k_min: int) -> Dict[str, Any]:
    E = exp_ceiling(h_max)
    z_cap = math.isqrt(SLACK * 2 * E // 2**k_min) + 1
    return {"E": E, "z_cap": z_cap, "x_cap_numerator": SLACK * 2 * E}


def x_cap(c: int, numerator: int) -> int:
    return min(c // 2, numerator // (c * c))


def _check_args(h_max: float, k_min: int):
    if h_max > H_MAX_CAP:
        raise CapacityError("h_max above the hard cap", h_max=h_max, cap=H_MAX_CAP)
    if k_min < 2:
        raise DomainError("k_min must be at least 2", k_min=k_min)
    if h_max <= 0:
        raise DomainError("h_max must be positive", h_max=h_max)


def _solution(x, y, z, r, s, t, h: Enclosure) -> SolutionModel:
    return SolutionModel(
        x=x, y=y, z=z, r=r, s=s, t=t, h=EnclosureModel.of(h), primitive=math.gcd(math.gcd(x, y), z) == 1
    )


_SEARCH_STATE: Dict[str, Any] = {}


def _install(index: PerfectPowerIndex, caps: Dict[str, Any], h_max: float, primitive_only: bool):
    _SEARCH_STATE.update(index=index, caps=caps, h_max=h_max, primitive_only=primitive_only)


def _range_task(task: Tuple[int, int]) -> Dict[str, Any]:
    """All (a, b, c) with c in [lo, hi)."""
    lo, hi = task
    index: PerfectPowerIndex = _SEARCH_STATE["index"]
    h_max = _SEARCH_STATE["h_max"]
    primitive_only = _SEARCH_STATE["primitive_only"]
    numerator = _SEARCH_STATE["caps"]["x_cap_numerator"]
    smallest = index.values[0]
    limit = Enclosure.exact(h_max)

    solutions, boundary = [], []
    tested = 0
    for c in index.values_between(lo, hi):
        if numerator // (c * c) < smallest:
            break
        for a in index.values_upto(x_cap(c, numerator)):
            tested += 1
            reps_b = index.representations(c - a)
            if not reps_b:
                continue
            h = log_of(a * (c - a) * c)
            for x, r in index.representations(a):
                for y, s in reps_b:
                    for z, t in index.representations(c):
                        sol = _solution(x, y, z, r, s, t, h)
                        if primitive_only and not sol.primitive:
                            continue
                        if h.hi < limit.lo:
                            solutions.append(sol)
                        elif h.lo < limit.hi:
                            boundary.append(sol)
    return {"solutions": solutions, "boundary": boundary, "tested": tested}


def dyadic_ranges(lo: int, hi: int) -> List[Tuple[int, int]]:
    """[2^b, 2^(b+1)) pieces covering [lo, hi]."""
    out = []
    start = lo
    while start <= hi:
        stop = min(1 << start.bit_length(), hi + 1)
        out.append((start, stop))
        start = stop
    return out


def run_search(
    h_max: float,
    k_min: int,
    primitive_only: bool = True,
    workers: int = 1,
    index: Optional[PerfectPowerIndex] = None,
    with_one_plus: bool = True,
) -> SearchReport:
    _check_args(h_max, k_min)
    watch = Stopwatch()
    caps = search_caps(h_max, k_min)
    z_cap = caps["z_cap"]
    if z_cap < 2**k_min:
        index = None
        results = []
    else:
        if index is None or index.k_min != k_min or index.v_max < z_cap:
            index = build_power_index(k_min, z_cap)
        tasks = dyadic_ranges(2**k_min, z_cap)
        results = ordered_map(
            _range_task,
            tasks,
            workers=workers,
            initializer=_install,
            initargs=(index, caps, h_max, primitive_only),
            label="power_search",
        )

    def order(sol: SolutionModel):
        return (sol.z**sol.t, sol.x**sol.r, sol.r, sol.s, sol.t)

    solutions = sorted((s for res in results for s in res["solutions"]), key=order)
    boundary = sorted((s for res in results for s in res["boundary"]), key=order)
    tested = sum(res["tested"] for res in results)
    one_plus = one_plus_power_scan(h_max, k_min) if with_one_plus else {}

    # a base-1 hit is a solution the main enumeration never visits
    if solutions or one_plus.get("hits"):
        status = VerdictStatus.FAIL
    elif boundary:
        status = VerdictStatus.ERROR
    else:
        status = VerdictStatus.PASS
    logger.info(
        "search_done",
        h_max=h_max,
        k_min=k_min,
        solutions=len(solutions),
        boundary=len(boundary),
        one_plus_hits=len(one_plus.get("hits", [])),
        tested=tested,
        duration_ms=watch.elapsed_ms(),
    )
    return SearchReport(
        status=status,
        h_max=h_max,
        k_min=k_min,
        caps={
            "e_h_upper": str(caps["E"]),
            "z_cap": str(z_cap),
            "x_cap": f"min(z^t // 2, {SLACK}*2*E // (z^t)^2)",
            "slack": SLACK,
            "justification": CAP_JUSTIFICATION,
        },
        index_size=len(index) if index is not None else 0,
        candidates_tested=tested,
        solutions=solutions,
        boundary=boundary,
        one_plus_power=one_plus,
        exhaustive=not boundary,
        duration_ms=watch.elapsed_ms(),
        external_inputs=["bases equal to 1 only occur in 1 + 2^3 = 3^2 (Catalan); also scanned directly below"],
    )


def search(h_max: float, k_min: int, primitive_only: bool = True, workers: int = 1) -> List[SolutionModel]:
    return run_search(h_max, k_min, primitive_only, workers, with_one_plus=False).solutions


def one_plus_power_scan(h_max: float, k_min: int) -> Dict[str, Any]:
    """
    1 + y^s = z^t with s, t ≥ k_min and log(y^s z^t) < h_max: y^s ≥ z^t/2 forces
    z^t ≤ √(2e^h), and each z^t − 1 is tested for a perfect power directly.
    """
    _check_args(h_max, k_min)
    watch = Stopwatch()
    c_cap = math.isqrt(2 * exp_ceiling(h_max)) + 1
    limit = Enclosure.exact(h_max)
    scanned = 0
    hits = []
    k = k_min
    while 2**k <= c_cap:
        for m in range(2, iroot_floor(c_cap, k) + 1):
            c = int(gmpy2.mpz(m) ** k)
            scanned += 1
            if not gmpy2.is_power(c - 1):
                continue
            for y, s in is_power_at_least(c - 1, k_min):
                h = log_of((c - 1) * c)
                if h.lo < limit.hi:
                    hits.append({"y": y, "s": s, "z": m, "t": k, "h": h.to_dict()})
        k += 1
    logger.info("one_plus_scan_done", h_max=h_max, k_min=k_min, scanned=scanned, hits=len(hits), duration_ms=watch.elapsed_ms())
    return {"c_cap_bits": c_cap.bit_length(), "scanned": scanned, "hits": hits, "duration_ms": watch.elapsed_ms()}


def audit_pruning(h_max: float, k_min: int, samples: int = 100_000, seed: int = 42) -> int:
    """
    Random (c, a) just outside the caps; returns how many would still have
    a·(c−a)·c < e^h (zero when the pruning is sound).
    """
    rng = DeterministicRNG(seed)
    caps = search_caps(h_max, k_min)
    E, z_cap, numerator = caps["E"] - 2, caps["z_cap"], caps["x_cap_numerator"]
    floor = 2**k_min
    bad = 0
    for _ in range(samples):
        if rng.random() < 0.5:
            c = rng.randint(z_cap + 1, 4 * z_cap)
            a = rng.randint(floor, max(floor, c // 2))
        else:
            c = rng.randint(2 * floor, z_cap)
            cap = x_cap(c, numerator)
            if cap >= c // 2:
                continue
            a = rng.randint(cap + 1, c // 2)
        if a * (c - a) * c < E:
            bad += 1
    return bad
