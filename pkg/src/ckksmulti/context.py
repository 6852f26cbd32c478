"""Parameter sets: modulus chains, CRT constants and the multi-rescale table."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .errors import FormatError, LevelOutOfRange, ParameterError
from .modarith import Modulus, ntt_primes

CONTEXT_VERSION = 1


@dataclass(frozen=True, eq=False)
class RnsBasis:
    moduli: tuple[Modulus, ...]

    def __post_init__(self):
        vals = [m.value for m in self.moduli]
        if len(set(vals)) != len(vals):
            raise ParameterError("RNS moduli must be distinct primes")

    def __len__(self):
        return len(self.moduli)

    def __iter__(self):
        return iter(self.moduli)

    @cached_property
    def values(self) -> list[int]:
        return [m.value for m in self.moduli]

    @cached_property
    def product(self) -> int:
        return math.prod(self.values)

    @cached_property
    def qhat_mod_self(self) -> list[int]:
        """[(Q/q_j)^-1]_{q_j} for every j."""
        out = []
        for q in self.values:
            inv = pow(self.product // q % q, -1, q)
            assert inv * (self.product // q) % q == 1
            out.append(inv)
        return out

    def qhat_mod_other(self, target: int) -> list[int]:
        return [(self.product // q) % target for q in self.values]

    def product_mod_other(self, target: int) -> int:
        return self.product % target

    def prefix(self, count: int) -> "RnsBasis":
        return _prefix(self, count)

    def __eq__(self, other):
        return isinstance(other, RnsBasis) and self.values == other.values

    def __hash__(self):
        return hash(tuple(self.values))


@lru_cache(maxsize=None)
def _prefix(basis: RnsBasis, count: int) -> RnsBasis:
    return RnsBasis(basis.moduli[:count])


@lru_cache(maxsize=None)
def conversion_tables(src: RnsBasis, dst: RnsBasis):
    """Constants for fast base conversion src -> dst.

    Returns ``(qhat_inv, matrix)`` with ``qhat_inv`` of shape ``(len(src), 1)``
    and ``matrix[i, j] = [Q_src / q_j]_{p_i}``.
    """
    qhat_inv = np.array(src.qhat_mod_self, dtype=np.uint64).reshape(-1, 1)
    mat = np.array([src.qhat_mod_other(p) for p in dst.values], dtype=np.uint64)
    return qhat_inv, mat


@dataclass(frozen=True, eq=False)
class Context:
    ring_degree: int
    q_basis: RnsBasis
    p_basis: RnsBasis
    delta_log2: int
    sigma: float = 3.2
    hamming_weight: int = 64
    seed: int = 0
    inv_prod: dict = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return self.ring_degree

    @property
    def L(self) -> int:
        return len(self.q_basis)

    @property
    def K(self) -> int:
        return len(self.p_basis)

    @property
    def delta(self) -> int:
        return 1 << self.delta_log2

    @property
    def q_moduli(self) -> tuple[Modulus, ...]:
        return self.q_basis.moduli

    @property
    def p_moduli(self) -> tuple[Modulus, ...]:
        return self.p_basis.moduli

    @cached_property
    def p_inv_mod_q(self) -> list[int]:
        P = self.p_basis.product
        return [pow(P % q, -1, q) for q in self.q_basis.values]

    @cached_property
    def p_mod_q(self) -> list[int]:
        P = self.p_basis.product
        return [P % q for q in self.q_basis.values]

    def extended_moduli(self, level: int | None = None) -> tuple[Modulus, ...]:
        """P factors followed by the first ``level`` Q factors."""
        level = self.L if level is None else level
        return self.p_moduli + self.q_moduli[:level]

    def level_basis(self, level: int) -> RnsBasis:
        if not 1 <= level <= self.L:
            raise LevelOutOfRange(f"level {level} outside [1, {self.L}]")
        return self.q_basis.prefix(level)

    def g_constant(self, eta: int, u: int, t: int) -> int:
        L = self.L
        if not (u >= 1 and 0 <= eta < L - u <= t <= L - 1):
            raise IndexError(f"g constant ({eta}, {u}, {t}) out of range for L={L}")
        return self.inv_prod[eta, L - u, t]

    def g_at_level(self, level: int, eta: int, u: int, t: int) -> int:
        """Same product of inverses with the chain truncated to ``level`` moduli."""
        if not (u >= 1 and 0 <= eta < level - u <= t <= level - 1):
            raise IndexError(f"g constant ({eta}, {u}, {t}) out of range at level {level}")
        return self.inv_prod[eta, level - u, t]

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": CONTEXT_VERSION,
            "N": self.ring_degree,
            "L": self.L,
            "K": self.K,
            "delta_log2": self.delta_log2,
            "sigma": self.sigma,
            "h": self.hamming_weight,
            "seed": self.seed,
            "q_moduli": [str(v) for v in self.q_basis.values],
            "p_moduli": [str(v) for v in self.p_basis.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Context":
        if d.get("version") != CONTEXT_VERSION:
            raise FormatError(f"unsupported context version {d.get('version')!r}")
        try:
            n = int(d["N"])
            q = [int(v) for v in d["q_moduli"]]
            p = [int(v) for v in d["p_moduli"]]
            if len(q) != int(d["L"]) or len(p) != int(d["K"]):
                raise FormatError("modulus list lengths disagree with L/K")
            return _assemble(n, q, p, int(d["delta_log2"]), float(d["sigma"]), int(d["h"]), int(d["seed"]))
        except KeyError as exc:
            raise FormatError(f"context file missing field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "Context":
        return cls.from_dict(json.loads(text))

    def same_as(self, other: "Context") -> bool:
        return self.to_dict() == other.to_dict()


def _build_inv_prod(qs: Sequence[int]) -> dict:
    """inv_prod[eta, lo, hi] = (q_lo * ... * q_hi)^-1 mod q_eta for eta < lo <= hi."""
    L = len(qs)
    table = {}
    for eta in range(L):
        qe = qs[eta]
        for lo in range(eta + 1, L):
            acc = 1
            for hi in range(lo, L):
                acc = acc * pow(qs[hi] % qe, -1, qe) % qe
                table[eta, lo, hi] = acc
    return table


def _verify_inv_prod(qs: Sequence[int], table: dict) -> None:
    for (eta, lo, hi), g in table.items():
        prod = math.prod(qs[lo : hi + 1])
        if g * prod % qs[eta] != 1:
            raise AssertionError(f"inverse-product table wrong at {(eta, lo, hi)}")


def _assemble(n, q_vals, p_vals, delta_log2, sigma, h, seed) -> Context:
    L, K = len(q_vals), len(p_vals)
    if L < 2:
        raise ParameterError("need at least two Q moduli (L >= 2) to rescale")
    if K < L:
        raise ParameterError(f"K={K} must be at least L={L}")
    if not 0 < h <= n:
        raise ParameterError(f"hamming weight {h} must be in (0, N]")
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    for q in q_vals:
        # scale must be within a factor of four of every Q factor
        if abs(math.log2(q) - delta_log2) > 2:
            raise ParameterError(f"scale 2^{delta_log2} is not within 4x of modulus {q}")
    q_basis = RnsBasis(tuple(Modulus.create(v, n) for v in q_vals))
    p_basis = RnsBasis(tuple(Modulus.create(v, n) for v in p_vals))
    if set(q_vals) & set(p_vals):
        raise ParameterError("P and Q factors must be distinct")
    q_basis.qhat_mod_self
    p_basis.qhat_mod_self
    table = _build_inv_prod(q_vals)
    _verify_inv_prod(q_vals, table)
    ctx = Context(n, q_basis, p_basis, delta_log2, sigma, h, seed, table)
    for q, pinv in zip(q_vals, ctx.p_inv_mod_q):
        assert pinv * p_basis.product % q == 1
    return ctx


def build_context(
    N: int = 1 << 10,
    L: int = 8,
    K: int = 8,
    w_q: int = 50,
    w_p: int | None = None,
    delta_log2: int | None = None,
    sigma: float = 3.2,
    h: int = 64,
    seed: int = 0,
) -> Context:
    """Deterministically build a parameter set.

    Q factors are the first ``L`` primes below ``2**w_q`` that are 1 mod 2N;
    P factors are the next ``K`` primes at width ``w_p`` (default ``w_q``).
    ``delta_log2`` defaults to ``w_q`` so that rescaling keeps the scale near Δ.
    """
    if N < 2 or N & (N - 1):
        raise ParameterError(f"N={N} is not a power of two")
    if L < 2:
        raise ParameterError("need at least two Q moduli (L >= 2) to rescale")
    if K < L:
        raise ParameterError(f"K={K} must be at least L={L}")
    w_p = w_q if w_p is None else w_p
    delta_log2 = w_q if delta_log2 is None else delta_log2
    if delta_log2 >= w_q + 2:
        raise ParameterError(f"delta_log2={delta_log2} must be below w_q + 2")
    if w_p == w_q:
        primes = ntt_primes(w_q, N, L + K)
        q_vals, p_vals = primes[:L], primes[L:]
    else:
        q_vals = ntt_primes(w_q, N, L)
        p_vals = ntt_primes(w_p, N, K)
    return _assemble(N, q_vals, p_vals, delta_log2, sigma, h, seed)


def load_context(path) -> Context:
    with open(path) as fh:
        return Context.from_json(fh.read())


def save_context(ctx: Context, path) -> None:
    with open(path, "w") as fh:
        fh.write(ctx.to_json())
