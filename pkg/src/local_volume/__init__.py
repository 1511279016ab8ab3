from .datasets import RamificationDataset, make_dataset, make_family, make_Rl, make_Rl_prime
from .indices import B0, B1, B2, B2_bruteforce, B2_relaxed, LocalIndexTriple, a_p, b_p, d_p, local_indices
from .volume import VolCache, VolMethod, VolResult, f2_bound_array, parse_method, vol, vol_of

__all__ = [
    "RamificationDataset",
    "make_dataset",
    "make_family",
    "make_Rl",
    "make_Rl_prime",
    "LocalIndexTriple",
    "a_p",
    "b_p",
    "d_p",
    "local_indices",
    "B0",
    "B1",
    "B2",
    "B2_bruteforce",
    "B2_relaxed",
    "VolCache",
    "VolMethod",
    "VolResult",
    "f2_bound_array",
    "parse_method",
    "vol",
    "vol_of",
]
