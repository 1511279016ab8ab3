from .catalog import CATALOG, KnownSolution, verify_catalog
from .index import PerfectPowerIndex, build_power_index, is_power_at_least
from .search import audit_pruning, one_plus_power_scan, run_search, search, search_caps

__all__ = [
    "CATALOG",
    "KnownSolution",
    "verify_catalog",
    "PerfectPowerIndex",
    "build_power_index",
    "is_power_at_least",
    "audit_pruning",
    "one_plus_power_scan",
    "run_search",
    "search",
    "search_caps",
]
