"""Eigenvalue records shared by every solver, with CSV and JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterator

__all__ = ["METHODS", "EigenRecord", "Spectrum", "SpectrumError", "CSV_COLUMNS"]

METHODS = ("bohr-sommerfeld", "low-lying", "evans", "reference")
CSV_COLUMNS = ("n", "energy", "method", "residual")


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class EigenRecord:
    n: int
    energy: float
    method: str
    residual: float = math.nan
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "energy": self.energy,
            "method": self.method,
            "residual": None if math.isnan(self.residual) else self.residual,
            "diagnostics": _jsonable(self.diagnostics),
        }


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues from one method, sorted by index.

    Construction checks that energies are positive and strictly increasing
    and that indices are consecutive.
    """

    method: str
    records: tuple[EigenRecord, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise SpectrumError(f"unknown method tag {self.method!r}")
        object.__setattr__(self, "records", tuple(self.records))
        self.check()

    def check(self) -> None:
        prev = None
        for r in self.records:
            if r.method != self.method:
                raise SpectrumError(f"record method {r.method!r} differs from spectrum method {self.method!r}")
            if not (r.n >= 0 and r.energy > 0 and math.isfinite(r.energy)):
                raise SpectrumError(f"invalid record {r!r}")
            if prev is not None:
                if r.n != prev.n + 1:
                    raise SpectrumError(f"indices not consecutive: {prev.n} then {r.n}")
                if not r.energy > prev.energy:
                    raise SpectrumError(f"energies not increasing at n={r.n}: {prev.energy!r} >= {r.energy!r}")
            prev = r

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EigenRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> EigenRecord:
        return self.records[i]

    @property
    def energies(self) -> list[float]:
        return [r.energy for r in self.records]

    @property
    def indices(self) -> list[int]:
        return [r.n for r in self.records]

    def by_index(self) -> dict[int, EigenRecord]:
        return {r.n: r for r in self.records}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([r.n, repr(float(r.energy)), r.method,
                        "" if math.isnan(r.residual) else repr(float(r.residual))])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "metadata": _jsonable(self.metadata),
            "method": self.method,
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Spectrum":
        recs = [
            EigenRecord(int(r["n"]), float(r["energy"]), r["method"],
                        math.nan if r.get("residual") is None else float(r["residual"]),
                        dict(r.get("diagnostics") or {}))
            for r in data["records"]
        ]
        return cls(data["method"], tuple(recs), dict(data.get("metadata") or {}))

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_csv(cls, text: str, metadata: dict[str, Any] | None = None) -> "Spectrum":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise SpectrumError("cannot infer the method of an empty CSV spectrum")
        recs = [EigenRecord(int(r["n"]), float(r["energy"]), r["method"],
                            float(r["residual"]) if r["residual"] else math.nan) for r in rows]
        return cls(recs[0].method, tuple(recs), metadata or {})
