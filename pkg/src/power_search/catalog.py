"""
Known primitive solutions of x^r + y^s = z^t with 1/r + 1/s + 1/t < 1.
"""
import math
from typing import List, NamedTuple

from src.core.clock import Stopwatch
from src.core.enclosure import log_of
from src.core.errors import CertificateError
from src.core.logger import get_logger
from src.core.types import EnclosureModel, SweepCertificate
from src.core.verdict import VerdictStatus

logger = get_logger(__name__)


class KnownSolution(NamedTuple):
    x: int
    r: int
    y: int
    s: int
    z: int
    t: int

    def __str__(self) -> str:
        return f"{self.x}^{self.r} + {self.y}^{self.s} = {self.z}^{self.t}"

    @property
    def as_tuple(self):
        return (self.x, self.y, self.z, self.r, self.s, self.t)


# 1^n + 2^3 = 3^2 holds for every n; n = 7 is the first hyperbolic signature
CATALOG: List[KnownSolution] = [
    KnownSolution(1, 7, 2, 3, 3, 2),
    KnownSolution(2, 5, 7, 2, 3, 4),
    KnownSolution(7, 3, 13, 2, 2, 9),
    KnownSolution(2, 7, 17, 3, 71, 2),
    KnownSolution(3, 5, 11, 4, 122, 2),
    KnownSolution(17, 7, 76271, 3, 21063928, 2),
    KnownSolution(1414, 3, 2213459, 2, 65, 7),
    KnownSolution(9262, 3, 15312283, 2, 113, 7),
    KnownSolution(43, 8, 96222, 3, 30042907, 2),
    KnownSolution(33, 8, 1549034, 2, 15613, 3),
]


def verify_catalog() -> SweepCertificate:
    watch = Stopwatch()
    entries = []
    for sol in CATALOG:
        a, b, c = sol.x**sol.r, sol.y**sol.s, sol.z**sol.t
        if a + b != c:
            raise CertificateError("catalog identity fails", identity=str(sol), difference=str(c - a - b))
        if math.gcd(math.gcd(sol.x, sol.y), sol.z) != 1:
            raise CertificateError("catalog solution is not primitive", identity=str(sol))
        h = log_of(a * b * c)
        entries.append({"identity": str(sol), "h": h.to_dict(), "hyperbolic": sol.r * sol.s + sol.s * sol.t + sol.r * sol.t < sol.r * sol.s * sol.t})
    logger.info("catalog_verified", identities=len(entries), duration_ms=watch.elapsed_ms())
    largest = max(entries, key=lambda e: e["h"]["hi"])
    return SweepCertificate(
        kind="catalog",
        status=VerdictStatus.PASS,
        worst_margin=EnclosureModel(**largest["h"]),
        points_checked=len(entries),
        duration_ms=watch.elapsed_ms(),
        details={"solutions": entries},
        notes=["exact integer arithmetic; h = log(x^r y^s z^t)"],
    )
