"""Ring elements of Z_Q[x]/(x^N+1) held as one residue row per RNS modulus."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .counters import OpCounters, bump
from .errors import DomainMismatch, ModulusMismatch
from .modarith import Modulus, VecMod, vadd, vmul, vneg, vsub
from .ntt import Domain, intt_rows, ntt_rows


@lru_cache(maxsize=None)
def vecmod(moduli: tuple[Modulus, ...]) -> VecMod:
    return VecMod([m.value for m in moduli])


@lru_cache(maxsize=None)
def _tables(moduli: tuple[Modulus, ...]):
    fwd = np.stack([m.psi_rev for m in moduli])
    inv = np.stack([m.psi_inv_rev for m in moduli])
    ninv = np.array([[m.n_inv] for m in moduli], dtype=np.uint64)
    return fwd, inv, ninv


@dataclass(eq=False)
class RnsPoly:
    coeffs: np.ndarray  # (len(moduli), N) uint64
    moduli: tuple[Modulus, ...]
    domain: Domain

    @property
    def ring_degree(self) -> int:
        return self.coeffs.shape[1]

    @property
    def level(self) -> int:
        return len(self.moduli)

    @property
    def vm(self) -> VecMod:
        return vecmod(self.moduli)

    @classmethod
    def zeros(cls, moduli: Sequence[Modulus], n: int, domain=Domain.COEFFICIENT) -> "RnsPoly":
        moduli = tuple(moduli)
        return cls(np.zeros((len(moduli), n), dtype=np.uint64), moduli, domain)

    @classmethod
    def from_ints(cls, values, moduli: Sequence[Modulus], domain=Domain.COEFFICIENT) -> "RnsPoly":
        """Reduce an integer polynomial (arbitrary-size Python ints) into every modulus."""
        moduli = tuple(moduli)
        vals = list(values)
        small = all(-(1 << 62) < int(v) < (1 << 62) for v in vals)
        if small:
            arr = np.array([int(v) for v in vals], dtype=np.int64)
            rows = [(arr % np.int64(m.value)).astype(np.uint64) for m in moduli]
        else:
            rows = [np.array([int(v) % m.value for v in vals], dtype=np.uint64) for m in moduli]
        return cls(np.stack(rows), moduli, domain)

    @classmethod
    def constant(cls, c: int, moduli: Sequence[Modulus], n: int, domain=Domain.COEFFICIENT) -> "RnsPoly":
        if domain == Domain.EVALUATION:
            return cls(np.array([[c % m.value] * n for m in moduli], dtype=np.uint64), tuple(moduli), domain)
        return cls.from_ints([c] + [0] * (n - 1), moduli, domain)

    def copy(self) -> "RnsPoly":
        return RnsPoly(self.coeffs.copy(), self.moduli, self.domain)

    def _check(self, other: "RnsPoly") -> None:
        if self.moduli != other.moduli:
            raise ModulusMismatch("operands live over different RNS bases")
        if self.domain != other.domain:
            raise DomainMismatch("operands are in different domains")

    def __add__(self, other: "RnsPoly") -> "RnsPoly":
        self._check(other)
        return RnsPoly(vadd(self.coeffs, other.coeffs, self.vm), self.moduli, self.domain)

    def __sub__(self, other: "RnsPoly") -> "RnsPoly":
        self._check(other)
        return RnsPoly(vsub(self.coeffs, other.coeffs, self.vm), self.moduli, self.domain)

    def __neg__(self) -> "RnsPoly":
        return RnsPoly(vneg(self.coeffs, self.vm), self.moduli, self.domain)

    def __mul__(self, other: "RnsPoly") -> "RnsPoly":
        self._check(other)
        if self.domain != Domain.EVALUATION:
            raise DomainMismatch("ring products are taken in the evaluation domain")
        return RnsPoly(vmul(self.coeffs, other.coeffs, self.vm), self.moduli, self.domain)

    def scale_rows(self, consts: Sequence[int], counters: OpCounters | None = None) -> "RnsPoly":
        """Multiply row j by ``consts[j]`` (already reduced mod q_j)."""
        c = np.array([int(x) for x in consts], dtype=np.uint64).reshape(-1, 1)
        bump(counters, const_mul=self.level)
        return RnsPoly(vmul(self.coeffs, c, self.vm), self.moduli, self.domain)

    def ntt(self, counters: OpCounters | None = None) -> "RnsPoly":
        if self.domain != Domain.COEFFICIENT:
            raise DomainMismatch("already in the evaluation domain")
        fwd, _, _ = _tables(self.moduli)
        bump(counters, ntt=self.level)
        return RnsPoly(ntt_rows(self.coeffs.copy(), self.vm, fwd), self.moduli, Domain.EVALUATION)

    def intt(self, counters: OpCounters | None = None) -> "RnsPoly":
        if self.domain != Domain.EVALUATION:
            raise DomainMismatch("already in the coefficient domain")
        _, inv, ninv = _tables(self.moduli)
        bump(counters, intt=self.level)
        return RnsPoly(intt_rows(self.coeffs.copy(), self.vm, inv, ninv), self.moduli, Domain.COEFFICIENT)

    def to_domain(self, domain: Domain, counters: OpCounters | None = None) -> "RnsPoly":
        if domain == self.domain:
            return self
        return self.ntt(counters) if domain == Domain.EVALUATION else self.intt(counters)

    def rows(self, start: int, stop: int | None = None) -> "RnsPoly":
        stop = self.level if stop is None else stop
        return RnsPoly(self.coeffs[start:stop].copy(), self.moduli[start:stop], self.domain)

    def drop_to(self, level: int) -> "RnsPoly":
        """Keep the first ``level`` residue rows."""
        return self.rows(0, level)

    @staticmethod
    def concat(parts: Sequence["RnsPoly"]) -> "RnsPoly":
        dom = parts[0].domain
        if any(p.domain != dom for p in parts):
            raise DomainMismatch("cannot stack polynomials from different domains")
        mods = tuple(m for p in parts for m in p.moduli)
        return RnsPoly(np.concatenate([p.coeffs for p in parts]), mods, dom)

    def __eq__(self, other):
        if not isinstance(other, RnsPoly):
            return NotImplemented
        return (
            self.moduli == other.moduli
            and self.domain == other.domain
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def is_zero(self) -> bool:
        return not self.coeffs.any()
