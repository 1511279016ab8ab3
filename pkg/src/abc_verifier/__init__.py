from .combiner import (
    CombinerParams,
    combiner_bound,
    combiner_bound_c,
    exclusion_certificate,
    lemma31_part_i_check,
    lemma31_part_ii_check,
    lemma31_part_iii_check,
    partition,
)
from .corollary import corollary33_check, tail_constants_check
from .factored import FactoredInteger
from .sweep import (
    VolProvider,
    covers,
    params_from_certificate,
    revalidate_certificate,
    sweep_summary,
    sweep_theorem32,
    theorem32_margin,
)

__all__ = [
    "CombinerParams",
    "combiner_bound",
    "combiner_bound_c",
    "exclusion_certificate",
    "lemma31_part_i_check",
    "lemma31_part_ii_check",
    "lemma31_part_iii_check",
    "partition",
    "corollary33_check",
    "tail_constants_check",
    "FactoredInteger",
    "VolProvider",
    "covers",
    "params_from_certificate",
    "revalidate_certificate",
    "sweep_summary",
    "sweep_theorem32",
    "theorem32_margin",
]
