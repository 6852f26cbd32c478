"""Operation counters threaded explicitly through instrumented operations."""
from __future__ import annotations

from dataclasses import dataclass, fields, asdict


@dataclass
class OpCounters:
    ntt: int = 0
    intt: int = 0
    bconv: int = 0
    modmul: int = 0
    modadd: int = 0
    const_mul: int = 0

    def merge(self, other: "OpCounters") -> "OpCounters":
        return OpCounters(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})

    __add__ = merge

    def absorb(self, other: "OpCounters") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def as_dict(self) -> dict:
        return asdict(self)


def bump(counters: OpCounters | None, **deltas) -> None:
    if counters is None:
        return
    for k, v in deltas.items():
        setattr(counters, k, getattr(counters, k) + v)
