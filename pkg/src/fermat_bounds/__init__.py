from .corollaries import cor48_33n_check, flt_contradiction
from .radical import radical_bound_check, radical_bounds
from .signature import (
    TABLE1_ROWS,
    SignatureClass,
    b1_b2,
    best_b1,
    chain_covers,
    class_b1,
    exclusion_interval,
    revalidate_exclusion,
    tuple_b1,
)
from .table1 import RowOptimizer, cap_check, row_report, table1, table1_report

__all__ = [
    "cor48_33n_check",
    "flt_contradiction",
    "radical_bound_check",
    "radical_bounds",
    "TABLE1_ROWS",
    "SignatureClass",
    "b1_b2",
    "best_b1",
    "chain_covers",
    "class_b1",
    "exclusion_interval",
    "revalidate_exclusion",
    "tuple_b1",
    "RowOptimizer",
    "cap_check",
    "row_report",
    "table1",
    "table1_report",
]
