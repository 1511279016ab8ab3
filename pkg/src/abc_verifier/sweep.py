"""
Finite-range verification of

    h − 3·log rad N + 4·log 2 < 8·√(h·log h)        for h_lo ≤ h ≤ h_hi,

through h − 3·log rad N ≤ a1·h + a2 + 2h/n (log rad N ≤ h). For a fixed S the
margin m(h) = a1·h + a2 + 2h/n − 8√(h log h) + 4 log 2 is convex in h, so
m < 0 at both ends of an interval certifies the whole interval.

The range is cut into a geometric grid; every grid interval is certified on its
own (splitting it when no S works) and yields one or more exclusion certificates.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import primerange

from src.core.clock import Stopwatch
from src.core.enclosure import LOG2, Enclosure
from src.core.errors import CertificateError, DomainError, IndecisiveVerdictError, OutOfRangeError, UncoverableIntervalError
from src.core.hasher import CanonicalHasher
from src.core.journal import CertificateJournal
from src.core.logger import get_logger
from src.core.types import CheckKind, EnclosureModel, ExclusionCertificateModel, SweepCertificate, VolRecord
from src.core.verdict import VerdictStatus
from src.core.workers import ordered_map
from src.local_volume.volume import VolCache, VolMethod, f2_bound_array
from src.prime_tables.tables import PrimeTables

from .combiner import EXACT_SUM_MAX, CombinerParams, exclusion_certificate

logger = get_logger(__name__)

DEFAULT_H_LO = 680.0
DEFAULT_STEP_RATIO = 1.1
WINDOW_BETAS = (2 / 3, 0.75, 0.85, 1.0)
MAX_SPLIT_DEPTH = 3
OPT_STARTS = 64
# relative agreement demanded between recorded and recomputed constants
RECHECK_TOL = 1e-9


def e31_upper() -> float:
    return Enclosure.exact(31.0).exp().hi


# --- Vol supply ---

class VolProvider:
    """
    Upper bounds of Vol(l) for arrays of primes: exact values for l ≤ exact_max_l,
    a table-backed bound above (the vectorized f2_bound by default, closed_form
    on request). A constant provider stands in for an externally supplied bound.
    """

    def __init__(
        self,
        tables: Optional[PrimeTables] = None,
        variant: str = "rl",
        exact_max_l: int = 200,
        constant_value: Optional[Fraction] = None,
        large_method: VolMethod = VolMethod.F2_BOUND,
    ):
        if VolMethod(large_method) not in (VolMethod.F2_BOUND, VolMethod.CLOSED_FORM):
            raise DomainError("large primes take f2_bound or closed_form", method=str(large_method))
        self.tables = tables
        self.variant = variant
        self.exact_max_l = exact_max_l
        self.constant_value = None if constant_value is None else Fraction(constant_value)
        self.large_method = VolMethod(large_method)
        self._cache = VolCache(tables)

    @classmethod
    def constant(cls, value, variant: str = "rl") -> "VolProvider":
        if Fraction(value) < 0:
            raise DomainError("Vol bound must be nonnegative", value=str(value))
        return cls(variant=variant, constant_value=Fraction(value))

    @classmethod
    def from_description(cls, desc: Dict[str, Any], tables: Optional[PrimeTables] = None) -> "VolProvider":
        if desc.get("source") == "constant":
            return cls.constant(Fraction(desc["value"]), desc.get("variant", "rl"))
        return cls(
            tables,
            variant=desc.get("variant", "rl"),
            exact_max_l=int(desc.get("exact_max_l", 200)),
            large_method=VolMethod(desc.get("large_method", VolMethod.F2_BOUND.value)),
        )

    @property
    def is_external(self) -> bool:
        return self.constant_value is not None

    def describe(self) -> Dict[str, Any]:
        if self.is_external:
            return {"source": "constant", "variant": self.variant, "value": str(self.constant_value)}
        return {
            "source": f"exact+{self.large_method.value}",
            "variant": self.variant,
            "exact_max_l": self.exact_max_l,
            "large_method": self.large_method.value,
        }

    def max_l(self) -> Optional[int]:
        """Largest l whose Vol the provider can bound, None when unlimited."""
        if self.is_external:
            return None
        if self.tables is None:
            return self.exact_max_l
        return max(self.exact_max_l, (self.tables.limit - 1) // 3)

    def warm(self, ls: Iterable[int]):
        for l in ls:
            if l <= self.exact_max_l:
                self._cache.get(int(l), self.variant, VolMethod.EXACT)

    def _exact_enclosure(self, l: int) -> Enclosure:
        if self.is_external:
            return Enclosure.from_fraction(self.constant_value)
        return self._cache.get(l, self.variant, VolMethod.EXACT).value

    def bounds(self, ls: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(lower, upper) float bounds per prime; lower is 0 where only an upper bound is known."""
        ls = np.asarray(ls, dtype=np.int64)
        if self.is_external:
            v = Enclosure.from_fraction(self.constant_value)
            return np.full(ls.size, v.lo), np.full(ls.size, v.hi)
        lo = np.zeros(ls.size, dtype=np.float64)
        hi = np.empty(ls.size, dtype=np.float64)
        small = ls <= self.exact_max_l
        for i in np.flatnonzero(small):
            v = self._exact_enclosure(int(ls[i]))
            lo[i], hi[i] = v.lo, v.hi
        if not small.all():
            if self.tables is None:
                raise OutOfRangeError("Vol beyond the exact range needs prime tables", l=int(ls[-1]))
            large = ls[~small]
            if self.large_method == VolMethod.CLOSED_FORM:
                hi[~small] = [self._cache.get(int(l), self.variant, VolMethod.CLOSED_FORM).value.hi for l in large]
            else:
                hi[~small] = f2_bound_array(large, self.tables)
        return lo, hi

    def records(self, ls: Sequence[int], hi: np.ndarray) -> List[VolRecord]:
        out = []
        for l, upper in zip(ls, hi):
            l = int(l)
            if self.is_external:
                value = Enclosure.from_fraction(self.constant_value)
                out.append(
                    VolRecord(l=l, variant=self.variant, method="constant", value=EnclosureModel.of(value), dataset_id="external")
                )
            elif l <= self.exact_max_l:
                out.append(self._cache.get(l, self.variant, VolMethod.EXACT).to_record())
            elif self.large_method == VolMethod.CLOSED_FORM:
                out.append(self._cache.get(l, self.variant, VolMethod.CLOSED_FORM).to_record())
            else:
                out.append(
                    VolRecord(
                        l=l,
                        variant=self.variant,
                        method=VolMethod.F2_BOUND.value,
                        value=EnclosureModel(lo=0.0, hi=float(upper)),
                        dataset_id="f2_bound",
                    )
                )
        return out

    def params(self, S: np.ndarray, k: int = 2, allow_13: bool = False) -> CombinerParams:
        lo, hi = self.bounds(S)
        records = self.records(S, hi) if S.size <= EXACT_SUM_MAX else None
        return CombinerParams(
            S=S, k=k, vol_hi=hi, vol_lo=lo, allow_13=allow_13, vol_records=records, vol_variant=self.variant
        )


def admissible_primes(tables: PrimeTables, lo: float, hi: float, allow_13: bool = False) -> np.ndarray:
    """Primes p with lo < p ≤ hi, p ≥ 11, and p ≠ 13 unless allowed."""
    primes = tables.primes_in_array(max(lo, 10), hi)
    if not allow_13:
        primes = primes[primes != 13]
    return primes


# --- the margin ---

def theorem32_margin(params: CombinerParams, h) -> Enclosure:
    H = Enclosure.coerce(h)
    rhs = 8 * (H * H.log()).sqrt() - 4 * LOG2
    return params.a1 * H + params.a2 + H * params.k / params.n - rhs


def _target_float(h: float) -> float:
    return 8 * math.sqrt(h * math.log(h)) - 4 * math.log(2)


@dataclass
class Attempt:
    ok: bool
    lower: float
    upper: float
    params: Optional[CombinerParams] = None
    margins: Dict[str, Enclosure] = field(default_factory=dict)
    selection: Dict[str, Any] = field(default_factory=dict)
    reason: str = ""

    @property
    def worst(self) -> Optional[Enclosure]:
        if not self.margins:
            return None
        return max(self.margins.values(), key=lambda m: m.hi)


def certify_interval(params: CombinerParams, L: float, U: float) -> Tuple[bool, Dict[str, Enclosure], str]:
    if not params.k_of_S_log2.definitely_gt(Enclosure.exact(U)):
        return False, {}, "k(S) log 2 does not exceed the upper end"
    margins = {"lower": theorem32_margin(params, L), "upper": theorem32_margin(params, U)}
    if all(m.hi < 0 for m in margins.values()):
        return True, margins, ""
    return False, margins, "margin not negative"


class IntervalCertifier:
    """Chooses S for an interval [L, U] and checks it."""

    def __init__(self, tables: PrimeTables, provider: VolProvider, allow_13: bool = False, grid_interval=None):
        self.tables = tables
        self.provider = provider
        self.allow_13 = allow_13
        self.grid_interval = grid_interval

    def _pool_cap(self, U: float, scale: float) -> float:
        cap = max(200.0, math.ceil(scale * math.sqrt(U * math.log(U))))
        cap = min(cap, float(self.tables.limit))
        max_l = self.provider.max_l()
        if max_l is not None:
            cap = min(cap, float(max_l))
        return cap

    def _selection(self, rule: str, S: np.ndarray, params: CombinerParams, **extra) -> Dict[str, Any]:
        return {
            "rule": rule,
            "first": int(S[0]),
            "last": int(S[-1]),
            "n": int(S.size),
            "allow_13": self.allow_13,
            "vol_source": self.provider.describe(),
            "vol_sum_hi": float(params.vol_hi.sum()),
            "tables_limit": self.tables.limit,
            "grid_interval": list(self.grid_interval) if self.grid_interval else None,
            **extra,
        }

    def _try(self, rule: str, S: np.ndarray, L: float, U: float, **extra) -> Attempt:
        if S.size < 2:
            return Attempt(False, L, U, reason=f"{rule}: fewer than two primes")
        params = self.provider.params(S, k=2, allow_13=self.allow_13)
        ok, margins, reason = certify_interval(params, L, U)
        return Attempt(ok, L, U, params, margins, self._selection(rule, S, params, **extra), reason)

    def window(self, L: float, U: float, beta: float) -> Attempt:
        a = math.sqrt(U / math.log(2))
        b = min(beta * math.sqrt(U * math.log(U)), self._pool_cap(U, beta))
        return self._try("window", admissible_primes(self.tables, a, b, self.allow_13), L, U, beta=beta)

    def optimized(self, L: float, U: float) -> Attempt:
        """
        Best contiguous run pool[i..j] of admissible primes with pool[i]·pool[i+1] > U/log 2,
        minimizing the larger of the two float endpoint margins.
        """
        pool = admissible_primes(self.tables, 0, self._pool_cap(U, 1.5), self.allow_13)
        if pool.size < 2:
            return Attempt(False, L, U, reason="optimized: pool too small")
        pf = pool.astype(np.float64)
        ok_start = np.flatnonzero(pf[:-1] * pf[1:] * math.log(2) > U * (1 + 1e-12))
        if ok_start.size == 0:
            return Attempt(False, L, U, reason="optimized: no pair exceeds U/log 2")
        i0 = int(ok_start[0])

        _, vol_hi = self.provider.bounds(pool)
        slope = (11 * pf + 31) / (pf * pf + pf - 12)
        W = {}
        for name, h in (("lower", L), ("upper", U)):
            W[name] = np.concatenate(([0.0], np.cumsum(h * slope + 3 * vol_hi)))

        starts = set(range(i0, min(i0 + OPT_STARTS, pool.size - 1)))
        step = OPT_STARTS
        while i0 + step < pool.size - 1:
            starts.add(i0 + step)
            step *= 2

        best = None
        for i in sorted(starts):
            js = np.arange(i + 1, pool.size)
            n = (js - i + 1).astype(np.float64)
            worst = np.maximum(
                (W["lower"][js + 1] - W["lower"][i] + 2 * L) / n - _target_float(L),
                (W["upper"][js + 1] - W["upper"][i] + 2 * U) / n - _target_float(U),
            )
            j = int(np.argmin(worst))
            if best is None or worst[j] < best[0]:
                best = (float(worst[j]), i, int(js[j]))
        _, i, j = best
        return self._try("optimized", pool[i : j + 1], L, U)

    def attempts(self, L: float, U: float) -> Iterable[Attempt]:
        for beta in WINDOW_BETAS:
            yield self.window(L, U, beta)
        yield self.optimized(L, U)

    def cover(self, L: float, U: float, depth: int = 0) -> Tuple[List[Attempt], Optional[Attempt]]:
        """(certified pieces, None) or (pieces so far, the failing attempt)."""
        best = None
        for attempt in self.attempts(L, U):
            if attempt.ok:
                return [attempt], None
            if attempt.worst is not None and (best is None or attempt.worst.hi < best.worst.hi):
                best = attempt
        if best is None:
            best = Attempt(False, L, U, reason="no admissible S")
        if depth >= MAX_SPLIT_DEPTH:
            return [], best
        mid = math.sqrt(L * U)
        logger.warning("interval_retry", h_lo=L, h_hi=U, depth=depth + 1, reason=best.reason)
        left, fail = self.cover(L, mid, depth + 1)
        if fail is not None:
            return left, fail
        right, fail = self.cover(mid, U, depth + 1)
        return left + right, fail


# --- sweep ---

_CERTIFIER_STATE: Dict[str, Any] = {}


def _install(tables: PrimeTables, provider: VolProvider, allow_13: bool):
    _CERTIFIER_STATE.update(tables=tables, provider=provider, allow_13=allow_13)


def _interval_task(task) -> Dict[str, Any]:
    index, L, U = task
    certifier = IntervalCertifier(
        _CERTIFIER_STATE["tables"], _CERTIFIER_STATE["provider"], _CERTIFIER_STATE["allow_13"], grid_interval=(L, U)
    )
    pieces, fail = certifier.cover(L, U)
    if fail is not None:
        worst = fail.worst
        return {
            "index": index,
            "ok": False,
            "lower": fail.lower,
            "upper": fail.upper,
            "reason": fail.reason,
            "worst": worst.to_dict() if worst else None,
        }
    certs = [
        exclusion_certificate(p.params, p.lower, p.upper, CheckKind.ABC_SWEEP, p.margins, p.selection) for p in pieces
    ]
    return {"index": index, "ok": True, "certificates": certs}


def geometric_grid(h_lo: float, h_hi: float, step_ratio: float) -> List[float]:
    if step_ratio <= 1:
        raise DomainError("step ratio must exceed 1", step_ratio=step_ratio)
    if not 1 < h_lo < h_hi:
        raise DomainError("bad sweep range", h_lo=h_lo, h_hi=h_hi)
    points = [float(h_lo)]
    while points[-1] < h_hi:
        points.append(min(points[-1] * step_ratio, float(h_hi)))
    return points


def _resumable(existing: Iterable[ExclusionCertificateModel]) -> Dict[Tuple[float, float], List[ExclusionCertificateModel]]:
    groups: Dict[Tuple[float, float], List[ExclusionCertificateModel]] = {}
    for cert in existing:
        if cert.check_kind != CheckKind.ABC_SWEEP:
            continue
        key = cert.selection.get("grid_interval")
        if key:
            groups.setdefault((float(key[0]), float(key[1])), []).append(cert)
    return groups


def _raise_uncoverable(failure: Dict[str, Any]):
    worst = failure.get("worst")
    details = {k: v for k, v in failure.items() if k != "ok"}
    if worst is not None and worst["lo"] < 0 <= worst["hi"]:
        raise IndecisiveVerdictError("interval margin straddles zero", **details)
    raise UncoverableIntervalError("no prime set certifies the interval", **details)


def sweep_theorem32(
    tables: PrimeTables,
    h_lo: float = DEFAULT_H_LO,
    h_hi: Optional[float] = None,
    step_ratio: float = DEFAULT_STEP_RATIO,
    provider: Optional[VolProvider] = None,
    workers: int = 1,
    journal: Optional[CertificateJournal] = None,
    resume_from: Optional[Iterable[ExclusionCertificateModel]] = None,
    allow_13: bool = False,
) -> List[ExclusionCertificateModel]:
    h_hi = e31_upper() if h_hi is None else float(h_hi)
    provider = provider or VolProvider(tables)
    grid = geometric_grid(h_lo, h_hi, step_ratio)
    tasks = [(i, grid[i], grid[i + 1]) for i in range(len(grid) - 1)]

    done: Dict[int, List[ExclusionCertificateModel]] = {}
    if resume_from is not None:
        groups = _resumable(resume_from)
        for index, L, U in tasks:
            group = sorted(groups.get((L, U), []), key=lambda c: c.lower)
            if group and covers(group, L, U) and all(revalidate_certificate(c, tables, provider) for c in group):
                done[index] = group
        logger.info("sweep_resume", reused=len(done), total=len(tasks))

    provider.warm(primerange(11, provider.exact_max_l + 1))
    pending = [t for t in tasks if t[0] not in done]
    batch = max(1, 4 * workers)
    watch = Stopwatch()
    for start in range(0, len(pending), batch):
        chunk = pending[start : start + batch]
        results = ordered_map(
            _interval_task,
            chunk,
            workers=workers,
            initializer=_install,
            initargs=(tables, provider, allow_13),
            label="abc_intervals",
        )
        for result in results:
            if not result["ok"]:
                logger.error("interval_uncoverable", **{k: v for k, v in result.items() if k != "ok"})
                _raise_uncoverable(result)
            done[result["index"]] = result["certificates"]
            if journal is not None:
                for cert in result["certificates"]:
                    journal.append(cert)
        logger.info("sweep_progress", done=len(done), total=len(tasks), duration_ms=watch.elapsed_ms())

    certs = [c for i in range(len(tasks)) for c in done[i]]
    if not covers(certs, grid[0], grid[-1]):
        raise CertificateError("sweep certificates leave a gap", h_lo=grid[0], h_hi=grid[-1])
    return certs


def covers(certs: Sequence[ExclusionCertificateModel], lo: float, hi: float) -> bool:
    """Consecutive certificates join end to start and span [lo, hi]."""
    if not certs:
        return False
    if certs[0].lower > lo or certs[-1].upper < hi:
        return False
    return all(a.upper >= b.lower for a, b in zip(certs, certs[1:]))


def sweep_summary(
    certs: Sequence[ExclusionCertificateModel],
    h_lo: float,
    h_hi: float,
    step_ratio: float,
    tables_limit: Optional[int] = None,
    duration_ms: int = 0,
    config_hash: Optional[str] = None,
) -> SweepCertificate:
    worst = max((m for c in certs for m in c.margins.values()), key=lambda m: m.hi)
    sources = {CanonicalHasher.short(c.selection.get("vol_source")) for c in certs}
    external = any(c.selection.get("vol_source", {}).get("source") == "constant" for c in certs)
    return SweepCertificate(
        kind="abc_sweep",
        status=VerdictStatus.PASS if covers(certs, h_lo, h_hi) else VerdictStatus.FAIL,
        range=[h_lo, h_hi],
        grid=f"geometric, ratio {step_ratio}",
        worst_margin=worst,
        tables_limit=tables_limit,
        points_checked=2 * len(certs),
        duration_ms=duration_ms,
        details={
            "intervals": len(certs),
            "max_n": max(c.selection.get("n", len(c.S)) for c in certs),
            "rules": sorted({c.selection.get("rule") for c in certs}),
            "vol_sources": len(sources),
        },
        external_inputs=["Vol(l) supplied as a constant"] if external else [],
        notes=["m(h) is convex for fixed S; negative endpoint margins certify each interval"],
        config_hash=config_hash,
    )


# --- standalone re-validation ---

def _regenerate_S(cert: ExclusionCertificateModel, tables: Optional[PrimeTables]) -> np.ndarray:
    if cert.S:
        return np.array(cert.S, dtype=np.int64)
    sel = cert.selection
    if tables is None:
        raise CertificateError("certificate stores its prime set by rule; prime tables are required")
    if tables.limit < sel["last"]:
        raise CertificateError("tables too small to regenerate S", need=sel["last"], limit=tables.limit)
    S = admissible_primes(tables, sel["first"] - 1, sel["last"], bool(sel.get("allow_13")))
    if S.size != sel["n"]:
        raise CertificateError("regenerated S has the wrong size", expected=sel["n"], got=int(S.size))
    return S


def _provider_for(cert: ExclusionCertificateModel, tables, provider: Optional[VolProvider]) -> VolProvider:
    desc = cert.selection.get("vol_source")
    if desc is None:
        methods = {v.method for v in cert.vols}
        if methods == {"constant"}:
            value = Fraction(cert.vols[0].value.hi)
            return VolProvider.constant(value, cert.vols[0].variant)
        variant = cert.vols[0].variant if cert.vols else "rl"
        return provider or VolProvider(tables, variant=variant)
    if provider is not None and provider.describe() == desc:
        return provider
    return VolProvider.from_description(desc, tables)


def params_from_certificate(
    cert: ExclusionCertificateModel,
    tables: Optional[PrimeTables] = None,
    provider: Optional[VolProvider] = None,
) -> CombinerParams:
    """Rebuild S and its Vol bounds from what the certificate declares, recomputing every Vol."""
    S = _regenerate_S(cert, tables)
    vp = _provider_for(cert, tables, provider)
    params = vp.params(S, k=cert.k, allow_13=cert.allow_13)
    if str(params.k_of_S) != cert.k_of_S:
        raise CertificateError("k(S) mismatch", recorded=cert.k_of_S, recomputed=str(params.k_of_S))
    return params


def _agrees(recorded: EnclosureModel, recomputed: Enclosure) -> bool:
    tol = RECHECK_TOL * max(1.0, abs(recomputed.mid))
    return abs(recorded.lo - recomputed.lo) <= tol and abs(recorded.hi - recomputed.hi) <= tol


def check_recorded_constants(cert: ExclusionCertificateModel, params: CombinerParams):
    if cert.digest is not None:
        digest = CanonicalHasher.digest_certificate(cert.model_dump(mode="json"))
        if digest != cert.digest:
            raise CertificateError("certificate digest mismatch", recorded=cert.digest, recomputed=digest)
    for name, value in params.constants().items():
        if not _agrees(getattr(cert, name), value):
            raise CertificateError(f"{name} disagrees with its recomputation", recorded=getattr(cert, name).model_dump(), recomputed=value.to_dict())


def revalidate_certificate(
    cert: ExclusionCertificateModel,
    tables: Optional[PrimeTables] = None,
    provider: Optional[VolProvider] = None,
) -> bool:
    """
    Re-derive a1, a2, a3 and the endpoint margins of an abc_sweep certificate.
    Returns the recomputed verdict; structural mismatches raise CertificateError.
    """
    if cert.check_kind != CheckKind.ABC_SWEEP:
        raise CertificateError("not an abc_sweep certificate", check_kind=cert.check_kind.value)
    params = params_from_certificate(cert, tables, provider)
    check_recorded_constants(cert, params)
    ok, _, reason = certify_interval(params, cert.lower, cert.upper)
    if not ok:
        logger.warning("certificate_rejected", lower=cert.lower, upper=cert.upper, reason=reason)
    return ok
