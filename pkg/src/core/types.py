from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from .enclosure import Enclosure
from .verdict import VerdictStatus

# Bumped whenever a record layout changes incompatibly.
SCHEMA_VERSION = "abcv/1"


class EnclosureModel(BaseModel):
    lo: float
    hi: float

    @classmethod
    def of(cls, e: Enclosure) -> "EnclosureModel":
        return cls(lo=e.lo, hi=e.hi)

    def to_enclosure(self) -> Enclosure:
        return Enclosure(self.lo, self.hi)


class CheckKind(str, Enum):
    ABC_SWEEP = "abc_sweep"
    FERMAT_CASE = "fermat_case"


class VolRecord(BaseModel):
    """
    Vol(l) as consumed by a certificate: which dataset, which method, which value.
    """
    l: int
    variant: Literal["rl", "rlprime"]
    method: str
    value: EnclosureModel
    dataset_id: str
    note: Optional[str] = None


class ExclusionCertificateModel(BaseModel):
    """
    Self-contained record that no admissible height lies in an interval.

    abc_sweep: the closed interval [lower, upper] is verified (margin < 0 at both
    endpoints). fermat_case: the open interval (lower, upper) is excluded.
    """
    schema_version: str = SCHEMA_VERSION
    kind: Literal["exclusion"] = "exclusion"
    check_kind: CheckKind
    lower: float
    upper: float
    S: List[int]
    k: int
    allow_13: bool = False
    vols: List[VolRecord]
    a1: EnclosureModel
    a2: EnclosureModel
    a3: EnclosureModel
    b1: Optional[EnclosureModel] = None
    b2: Optional[EnclosureModel] = None
    k_of_S: str  # decimal string, may exceed 64 bits
    margins: Dict[str, EnclosureModel] = Field(default_factory=dict)
    signature: Optional[Dict[str, Any]] = None
    selection: Dict[str, Any] = Field(default_factory=dict)
    digest: Optional[str] = None


class SweepCertificate(BaseModel):
    schema_version: str = SCHEMA_VERSION
    kind: str
    status: VerdictStatus
    range: Optional[List[float]] = None
    grid: Optional[str] = None
    worst_margin: Optional[EnclosureModel] = None
    tables_limit: Optional[int] = None
    points_checked: int = 0
    duration_ms: int = 0
    details: Dict[str, Any] = Field(default_factory=dict)
    external_inputs: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    config_hash: Optional[str] = None

    def is_pass(self) -> bool:
        return self.status == VerdictStatus.PASS


class Table1RowModel(BaseModel):
    schema_version: str = SCHEMA_VERSION
    kind: Literal["table1_row"] = "table1_row"
    row: str
    published_bound: int
    tolerance: float
    h_bound: EnclosureModel
    computed_bound: EnclosureModel
    passed: bool
    extremal: Dict[str, Any] = Field(default_factory=dict)
    certificates: List[ExclusionCertificateModel] = Field(default_factory=list)
    duration_ms: int = 0


class SolutionModel(BaseModel):
    x: int
    y: int
    z: int
    r: int
    s: int
    t: int
    h: EnclosureModel
    primitive: bool


class SearchReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    kind: Literal["search"] = "search"
    status: VerdictStatus
    h_max: float
    k_min: int
    caps: Dict[str, Any]
    index_size: int
    candidates_tested: int
    solutions: List[SolutionModel] = Field(default_factory=list)
    boundary: List[SolutionModel] = Field(default_factory=list)
    one_plus_power: Dict[str, Any] = Field(default_factory=dict)
    exhaustive: bool = True
    duration_ms: int = 0
    external_inputs: List[str] = Field(default_factory=list)
