"""
Canonical hashing of certificates and datasets.

Serialization uses sorted keys so the same record always hashes to the same
digest, independent of construction order.
"""
import hashlib
from fractions import Fraction
from typing import Any, Dict

import orjson
from pydantic import BaseModel


def _default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"Type is not serializable: {type(obj).__name__}")


def canonical_bytes(obj: Any) -> bytes:
    if isinstance(obj, BaseModel):
        obj = obj.model_dump(mode="json")
    return orjson.dumps(obj, default=_default, option=orjson.OPT_SORT_KEYS | orjson.OPT_NON_STR_KEYS)


class CanonicalHasher:
    """
    Computes deterministic SHA-256 digests of JSON-like records.
    """

    @staticmethod
    def digest(obj: Any) -> str:
        return hashlib.sha256(canonical_bytes(obj)).hexdigest()

    @staticmethod
    def short(obj: Any) -> str:
        return CanonicalHasher.digest(obj)[:16]

    @staticmethod
    def digest_certificate(payload: Dict[str, Any]) -> str:
        """
        Hash a certificate payload, excluding its own digest field.
        """
        body = {k: v for k, v in payload.items() if k != "digest"}
        return CanonicalHasher.digest(body)
