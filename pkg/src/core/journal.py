import os
from typing import Iterator, Type, TypeVar, Union

import orjson
from pydantic import BaseModel

from .errors import CertificateError
from .types import ExclusionCertificateModel, SearchReport, SweepCertificate, Table1RowModel

M = TypeVar("M", bound=BaseModel)

RECORD_TYPES = {
    "exclusion": ExclusionCertificateModel,
    "table1_row": Table1RowModel,
    "search": SearchReport,
}


def dumps(record: Union[BaseModel, dict]) -> bytes:
    payload = record.model_dump(mode="json") if isinstance(record, BaseModel) else record
    return orjson.dumps(payload, option=orjson.OPT_SORT_KEYS)


def parse_record(payload: dict) -> BaseModel:
    """
    Rebuild the typed record from a decoded JSON object by its `kind`.
    """
    kind = payload.get("kind")
    model = RECORD_TYPES.get(kind, SweepCertificate)
    try:
        return model.model_validate(payload)
    except Exception as e:
        raise CertificateError("malformed certificate record", kind=kind, reason=str(e))


class CertificateJournal:
    """
    Append-only certificate stream.
    Writes newline-delimited JSON, one certificate per line.
    """
    def __init__(self, filepath: str = "certificates.jsonl"):
        self.filepath = filepath
        parent = os.path.dirname(filepath)
        if parent:
            os.makedirs(parent, exist_ok=True)
        # Unbuffered so a crashed run keeps every finished certificate.
        self._file = open(self.filepath, "ab", buffering=0)

    def append(self, record: BaseModel):
        self._file.write(dumps(record) + b"\n")

    def close(self):
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @staticmethod
    def replay(filepath: str) -> Iterator[BaseModel]:
        """
        Generator over the records of a journal (or a single JSON document).
        """
        with open(filepath, "rb") as f:
            data = f.read()
        stripped = data.strip()
        if not stripped:
            return
        if stripped.startswith(b"[") or (stripped.startswith(b"{") and b"\n" not in stripped):
            doc = orjson.loads(stripped)
            items = doc if isinstance(doc, list) else [doc]
            for item in items:
                yield from _expand(item)
            return
        for line in data.splitlines():
            if line.strip():
                yield from _expand(orjson.loads(line))

    @staticmethod
    def replay_typed(filepath: str, model: Type[M]) -> Iterator[M]:
        for record in CertificateJournal.replay(filepath):
            if isinstance(record, model):
                yield record


def _expand(item: dict) -> Iterator[BaseModel]:
    # Composite reports (table1, sweep-abc) carry their certificates inline.
    if isinstance(item, dict) and "rows" in item and item.get("kind") == "table1":
        for row in item["rows"]:
            yield parse_record(row)
        return
    if isinstance(item, dict) and str(item.get("kind", "")).endswith("_report"):
        if "summary" in item:
            yield parse_record(item["summary"])
        for cert in item.get("certificates", []):
            yield parse_record(cert)
        return
    yield parse_record(item)
