"""
Bounds on log(x^r y^s z^t) per signature class, certified by chains of
exclusion intervals reaching down from the height cap.

Every chain starts at H_CAP = 10^6, above which no solution survives (see
cap_check), and repeatedly picks the (S, k) whose excluded interval reaches
past the current target with the smallest lower end. The final lower end B
bounds h = log N; log(x^r y^s z^t) ≤ B + 4 log 2.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import iv

from src.abc_verifier.sweep import VolProvider, admissible_primes
from src.core.clock import Stopwatch
from src.core.enclosure import LOG2, Enclosure
from src.core.errors import DomainError
from src.core.journal import CertificateJournal
from src.core.logger import get_logger
from src.core.types import SCHEMA_VERSION, EnclosureModel, ExclusionCertificateModel, SweepCertificate, Table1RowModel
from src.core.verdict import VerdictStatus
from src.core.workers import ordered_map
from src.local_volume.volume import VolMethod
from src.prime_tables.tables import PrimeTables

from .signature import TABLE1_ROWS, SignatureClass, b1_table, chain_covers, exclusion_interval, table1_row

logger = get_logger(__name__)

H_CAP = 1e6
TOLERANCE = 1.10
POOL_SCALE = 3.0
OPT_STARTS = 48
CERTIFY_TRIES = 8
MAX_STEPS = 400
# a step must lower the target by at least this relative amount
PROGRESS = 1e-9
K_CHOICES = (2, 3)
LOG2_F = math.log(2)


def default_provider(cls: SignatureClass, tables: PrimeTables) -> VolProvider:
    return VolProvider(tables, variant=cls.variant, exact_max_l=200, large_method=VolMethod.CLOSED_FORM)


@lru_cache(maxsize=64)
def search_rows(cls: SignatureClass) -> np.ndarray:
    """
    Rows of the class table that attain the maximum somewhere on a sample of
    (K, T); the optimizer scores candidates on these only. Certification
    always uses the full table.
    """
    table = b1_table(cls)
    KK, TT = np.meshgrid(np.linspace(0.002, 1.2, 60), np.linspace(3.0, 4.3, 14))
    values = table.evaluate(KK.ravel(), TT.ravel())
    order = np.argsort(-values, axis=0)
    keep = set(order[0].tolist()) | set(order[min(1, len(table) - 1)].tolist())
    return np.array(sorted(keep), dtype=np.int64)


@dataclass(frozen=True)
class Candidate:
    lower: float
    p0: int
    n: int
    k: int
    i: int
    j: int

    @property
    def key(self) -> Tuple[float, int, int]:
        return (self.lower, self.p0, self.n)


class RowOptimizer:
    """Greedy interval covering of (B, cap) for one signature class."""

    def __init__(
        self,
        cls: SignatureClass,
        tables: PrimeTables,
        provider: Optional[VolProvider] = None,
        cap: float = H_CAP,
    ):
        self.cls = cls
        self.tables = tables
        self.provider = provider or default_provider(cls, tables)
        if self.provider.variant == "rlprime" and cls.u0_min < 4:
            raise DomainError("the primed family needs u0 >= 4", signature=cls.name)
        self.cap = float(cap)

        pool_hi = POOL_SCALE * math.sqrt(self.cap / LOG2_F) + 200
        max_l = self.provider.max_l()
        if max_l is not None:
            pool_hi = min(pool_hi, max_l)
        self.pool = admissible_primes(tables, 0, min(pool_hi, tables.limit), cls.allow_13)
        if self.pool.size < 3:
            raise DomainError("prime pool too small for the optimizer", limit=tables.limit, pool=int(self.pool.size))

        pf = self.pool.astype(np.float64)
        _, vol_hi = self.provider.bounds(self.pool)
        slope = (11 * pf + 31) / (pf * pf + pf - 12)
        self._pf = pf
        self._cs = np.concatenate(([0.0], np.cumsum(slope)))
        self._cv = np.concatenate(([0.0], np.cumsum(vol_hi)))
        self._cl = np.concatenate(([0.0], np.cumsum(np.log(pf))))
        self._table = b1_table(cls)
        self._rows = search_rows(cls)

    def _starts(self, i0: int, stop: int) -> List[int]:
        starts = set(range(i0, min(i0 + OPT_STARTS, stop)))
        step = OPT_STARTS
        while i0 + step < stop:
            starts.add(i0 + step)
            step *= 2
        return sorted(starts)

    def candidates(self, U: float) -> List[Candidate]:
        """Best window per (k, start) by float estimate, sorted by lower end, then p0, then n."""
        pf, size = self._pf, self.pool.size
        u0 = self.cls.u0_min
        out: List[Candidate] = []
        for k in K_CHOICES:
            if size < k + 1:
                continue
            prods = np.ones(size - k + 1)
            for m in range(k):
                prods = prods * pf[m : size - k + 1 + m]
            ok = np.flatnonzero(prods * LOG2_F > U * (1 + 1e-12))
            if ok.size == 0:
                continue
            for i in self._starts(int(ok[0]), size - k + 1):
                js = np.arange(i + max(k, 2) - 1, size)
                if js.size == 0:
                    continue
                n = (js - i + 1).astype(np.float64)
                T = 3 + (self._cs[js + 1] - self._cs[i]) / n
                K = k / n + T / pf[i]
                a2 = 3 * (self._cv[js + 1] - self._cv[i]) / n
                a3 = self._cl[js + 1] - self._cl[i]
                b1 = self._table.upper(K, T, self._rows)
                b2 = a2 + T * (a3 + 4 * LOG2_F / u0)
                with np.errstate(divide="ignore", invalid="ignore"):
                    lower = np.where(b1 < 1, b2 / (1 - b1), np.inf)
                lower = np.where(lower < prods[i] * LOG2_F, lower, np.inf)
                jb = int(np.argmin(lower))
                if np.isfinite(lower[jb]):
                    out.append(Candidate(float(lower[jb]), int(self.pool[i]), int(n[jb]), k, i, int(js[jb])))
        out.sort(key=lambda c: c.key)
        return out

    def _selection(self, cand: Candidate, U: float) -> Dict[str, Any]:
        S = self.pool[cand.i : cand.j + 1]
        return {
            "rule": "table1",
            "row": self.cls.name,
            "first": int(S[0]),
            "last": int(S[-1]),
            "n": int(S.size),
            "allow_13": self.cls.allow_13,
            "vol_source": self.provider.describe(),
            "target": U,
            "tables_limit": self.tables.limit,
        }

    def certify(self, cand: Candidate, U: float) -> Optional[ExclusionCertificateModel]:
        S = self.pool[cand.i : cand.j + 1]
        params = self.provider.params(S, k=cand.k, allow_13=self.cls.allow_13)
        cert = exclusion_interval(self.cls, params, self._selection(cand, U))
        if cert is None or not cert.upper > U:
            return None
        return cert

    def step(self, U: float) -> Optional[ExclusionCertificateModel]:
        found: List[Tuple[Tuple[float, int, int], ExclusionCertificateModel]] = []
        for cand in self.candidates(U)[:CERTIFY_TRIES]:
            cert = self.certify(cand, U)
            if cert is not None:
                found.append(((cert.lower, cand.p0, cand.n), cert))
                if len(found) >= 2:
                    break
        if not found:
            return None
        return min(found, key=lambda item: item[0])[1]

    def run(self) -> Tuple[List[ExclusionCertificateModel], float]:
        U = self.cap
        chain: List[ExclusionCertificateModel] = []
        for _ in range(MAX_STEPS):
            cert = self.step(U)
            if cert is None or cert.lower >= U * (1 - PROGRESS):
                break
            chain.append(cert)
            U = cert.lower
            logger.debug("table1_step", row=self.cls.name, lower=U, n=cert.selection["n"], k=cert.k)
        return chain, U


def row_report(
    cls: SignatureClass,
    published_bound: int,
    tables: PrimeTables,
    provider: Optional[VolProvider] = None,
    tolerance: float = TOLERANCE,
    cap: float = H_CAP,
) -> Table1RowModel:
    watch = Stopwatch()
    optimizer = RowOptimizer(cls, tables, provider, cap)
    chain, B = optimizer.run()
    h_bound = Enclosure.exact(B)
    computed = h_bound + 4 * LOG2
    covered = chain_covers(chain, B, cap)
    passed = covered and computed.hi <= tolerance * published_bound
    logger.info(
        "table1_row",
        row=cls.name,
        published=published_bound,
        computed=computed.hi,
        steps=len(chain),
        passed=passed,
        duration_ms=watch.elapsed_ms(),
    )
    return Table1RowModel(
        row=cls.name,
        published_bound=published_bound,
        tolerance=tolerance,
        h_bound=EnclosureModel.of(h_bound),
        computed_bound=EnclosureModel.of(computed),
        passed=passed,
        extremal={
            "class": cls.to_dict(),
            "steps": len(chain),
            "covered": covered,
            "cap": cap,
            "last": chain[-1].signature["extremal"] if chain else None,
            "vol_source": optimizer.provider.describe(),
        },
        certificates=chain,
        duration_ms=watch.elapsed_ms(),
    )


_ROW_STATE: Dict[str, Any] = {}


def _install(tables: PrimeTables, tolerance: float, cap: float, vol_constant: Optional[Fraction]):
    _ROW_STATE.update(tables=tables, tolerance=tolerance, cap=cap, vol_constant=vol_constant)


def _row_task(name: str) -> Table1RowModel:
    cls, published = table1_row(name)
    provider = None
    if _ROW_STATE["vol_constant"] is not None:
        provider = VolProvider.constant(_ROW_STATE["vol_constant"], cls.variant)
    return row_report(cls, published, _ROW_STATE["tables"], provider, _ROW_STATE["tolerance"], _ROW_STATE["cap"])


def table1(
    tables: PrimeTables,
    rows: Optional[Sequence[str]] = None,
    workers: int = 1,
    tolerance: float = TOLERANCE,
    cap: float = H_CAP,
    journal: Optional[CertificateJournal] = None,
    vol_constant: Optional[Fraction] = None,
) -> List[Table1RowModel]:
    names = list(rows) if rows else [cls.name for cls, _ in TABLE1_ROWS]
    for name in names:
        table1_row(name)
    results = ordered_map(
        _row_task,
        names,
        workers=workers,
        initializer=_install,
        initargs=(tables, tolerance, cap, vol_constant),
        label="table1_rows",
    )
    if journal is not None:
        for row in results:
            journal.append(row)
    return results


def ordering_ok(rows: Sequence[Table1RowModel]) -> bool:
    """Bounds of the nested min{r,s,t} classes weakly decrease as the minimum grows."""
    order = [cls.name for cls, _ in TABLE1_ROWS if cls.name.startswith("min")]
    values = [r.computed_bound.hi for name in order for r in rows if r.row == name]
    return all(a >= b for a, b in zip(values, values[1:]))


def table1_report(
    rows: Sequence[Table1RowModel],
    cap: Optional[SweepCertificate] = None,
    config_hash: Optional[str] = None,
) -> Dict[str, Any]:
    passed = all(r.passed for r in rows) and (cap is None or cap.is_pass())
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "table1",
        "status": (VerdictStatus.PASS if passed else VerdictStatus.FAIL).value,
        "summary": [
            {
                "row": r.row,
                "published": r.published_bound,
                "computed": r.computed_bound.hi,
                "certificates": len(r.certificates),
                "duration_ms": r.duration_ms,
                "passed": r.passed,
            }
            for r in rows
        ],
        "ordering_ok": ordering_ok(rows),
        "cap": cap.model_dump(mode="json") if cap is not None else None,
        "rows": [r.model_dump(mode="json") for r in rows],
        "config_hash": config_hash,
    }


# --- the height cap ---

def _weights_case(name: str, weights, exponent_mins, target: Fraction, excess_ok: bool) -> Dict[str, Any]:
    lowest = min(w * e for w, e in zip(weights, exponent_mins))
    return {
        "case": name,
        "weights": [str(w) for w in weights],
        "weights_sum_ok": excess_ok,
        "exponent": str(lowest),
        "exponent_ok": lowest >= target,
        "coefficient": str(1 / target),
    }


def _iv(q) -> "iv.mpf":
    q = Fraction(q)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def cap_check(cap: float = H_CAP, tail_hi: float = 1e12, ratio: float = 2.0) -> SweepCertificate:
    """
    log rad(abc) < (5/16)·log(abc) for h ≥ log 4 through its three exponent
    cases, then h ≤ (15/16)h + 9√(h log h) fails from h = cap on.
    """
    watch = Stopwatch()
    five16 = Fraction(5, 16)
    cases = []

    # t ≥ 4: abc > a^(12/11) b^(12/11) c^(9/11) since ab < c²
    w = (Fraction(12, 11), Fraction(12, 11), Fraction(9, 11))
    ok = sum(w) == 3 and w[0] - 1 == w[1] - 1 == (1 - w[2]) / 2
    c1 = _weights_case("t>=4", w, (3, 3, 4), Fraction(36, 11), ok)
    c1["below_5_16"] = Fraction(11, 36) < five16
    cases.append(c1)

    # s ≥ r ≥ 4: 2^(1/7)·abc > a^(6/7) b^(6/7) c^(8/7) since c ≤ 2ab
    w = (Fraction(6, 7), Fraction(6, 7), Fraction(8, 7))
    ok = sum(w) == Fraction(20, 7) and 1 - w[0] == 1 - w[1] == w[2] - 1 == Fraction(1, 7)
    c2 = _weights_case("s>=r>=4", w, (4, 4, 3), Fraction(24, 7), ok)
    # 7h/24 + log 2/24 ≤ 5h/16 exactly when h ≥ 2 log 2
    c2["threshold_in_log2"] = str(Fraction(1, 24) / (five16 - Fraction(7, 24)))
    c2["below_5_16"] = Fraction(1, 24) / (five16 - Fraction(7, 24)) == 2
    cases.append(c2)

    # s ≥ 4, r = t = 3: abc > (xyz)^(3+λ), λ = (s−3)/(s+1) = 1 − 4/(s+1) increasing
    lam = [Fraction(s - 3, s + 1) for s in range(4, 200)]
    split_ok = all(s - s * l == 3 + l for s, l in zip(range(4, 200), lam))
    c3 = {
        "case": "s>=4,r=t=3",
        "lambda_at_4": str(lam[0]),
        "lambda_increasing": all(a < b for a, b in zip(lam, lam[1:])),
        "split_ok": split_ok,
        "exponent": str(3 + lam[0]),
        "below_5_16": 1 / (3 + lam[0]) <= five16,
    }
    cases.append(c3)

    algebra_ok = all(
        c.get("weights_sum_ok", True) and c.get("exponent_ok", True) and c["below_5_16"] for c in cases
    ) and c3["lambda_increasing"] and c3["split_ok"]

    # φ(h) = h/16 − 9√(h log h) > 0 at the cap, φ' > 0 on every tail cell
    H = _iv(Fraction(cap))
    phi = H / 16 - 9 * iv.sqrt(H * iv.log(H))
    phi_ok = phi.a > 0
    edges = [cap]
    while edges[-1] < tail_hi:
        edges.append(min(edges[-1] * ratio, tail_hi))
    worst = None
    for a, b in zip(edges, edges[1:]):
        A, B = _iv(Fraction(a)), _iv(Fraction(b))
        # φ'(h) = 1/16 − 9(log h + 1)/(2√(h log h)), bounded below on [a, b]
        slope = _iv(Fraction(1, 16)) - 9 * (iv.log(B) + 1) / (2 * iv.sqrt(A * iv.log(A)))
        if worst is None or slope.a < worst.a:
            worst = slope
    slope_ok = worst is not None and worst.a > 0

    passed = algebra_ok and phi_ok and slope_ok
    phi_enc = Enclosure.from_mpi(phi)
    logger.info("cap_checked", passed=passed, phi_lo=phi_enc.lo, cells=len(edges) - 1)
    return SweepCertificate(
        kind="table1_cap",
        status=VerdictStatus.PASS if passed else VerdictStatus.FAIL,
        range=[cap, tail_hi],
        grid=f"geometric cells, ratio {ratio}",
        worst_margin=EnclosureModel.of(phi_enc),
        points_checked=len(edges),
        duration_ms=watch.elapsed_ms(),
        details={
            "radical_cases": cases,
            "phi_at_cap": phi_enc.to_dict(),
            "tail_slope_min": Enclosure.from_mpi(worst).to_dict() if worst is not None else None,
        },
        external_inputs=[
            "x^3 + y^3 = z^3 has no solution in positive integers (Euler)",
            "abc inequality h <= 3 log rad(abc) + 9 sqrt(h log h) for h >= log 4",
        ],
        notes=[
            "(log h + 1)/sqrt(h log h) decreases for h >= e, so phi' stays positive past the last cell",
        ],
    )
