"""Key generation, encryption and decryption of generalized ciphertext tuples.

Randomness comes from ``numpy.random.default_rng`` seeded with
``(seed, stream)`` so every operation draws from its own reproducible
stream.  Gaussian samples are rounded inverse-CDF transforms of 53-bit
uniforms taken from 64-bit draws, truncated at 6 sigma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .context import Context
from .errors import (
    DomainMismatch,
    LevelMismatch,
    MessageTooLarge,
    MissingEvalKey,
    ParameterError,
)
from .modarith import Modulus
from .ntt import Domain
from .oracle import crt_reconstruct
from .poly import RnsPoly

_SECRET, _PUBLIC, _EVAL, _ENCRYPT = 1, 2, 3, 4
TAIL_CUT = 6


def _rng(seed: int, stream: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & ((1 << 64) - 1), stream, *extra])


def sample_gaussian(rng: np.random.Generator, n: int, sigma: float) -> np.ndarray:
    """Rounded Gaussian integers with |x| <= 6 sigma."""
    out = np.empty(n, dtype=np.int64)
    todo = np.arange(n)
    bound = TAIL_CUT * sigma
    while todo.size:
        raw = rng.integers(0, 1 << 64, size=todo.size, dtype=np.uint64, endpoint=False)
        u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / float(1 << 53)
        z = np.rint(ndtri(u) * sigma)
        ok = np.abs(z) <= bound
        out[todo[ok]] = z[ok].astype(np.int64)
        todo = todo[~ok]
    return out


def sample_ternary(rng: np.random.Generator, n: int, weight: int) -> np.ndarray:
    """Exactly ``weight`` nonzero entries, each +1 or -1."""
    out = np.zeros(n, dtype=np.int64)
    pos = rng.choice(n, size=weight, replace=False)
    out[pos] = rng.choice(np.array([-1, 1]), size=weight)
    return out


def sample_uniform(rng: np.random.Generator, moduli: Sequence[Modulus], n: int) -> np.ndarray:
    return np.stack([rng.integers(0, m.value, size=n, dtype=np.uint64) for m in moduli])


def fresh_noise_bound(ctx: Context) -> int:
    """6-sigma bound on the coefficients of v*e + e0 + e1*s for a fresh ciphertext."""
    return math.ceil(TAIL_CUT * ctx.sigma * math.sqrt(ctx.N / 2 + ctx.hamming_weight + 1))


@dataclass(eq=False)
class SecretKey:
    coeffs: np.ndarray  # ternary int64 coefficients
    h: int
    _cache: dict = field(default_factory=dict, repr=False)

    def poly(self, moduli: Sequence[Modulus], domain: Domain = Domain.EVALUATION) -> RnsPoly:
        key = (tuple(moduli), domain)
        if key not in self._cache:
            p = RnsPoly.from_ints(self.coeffs, moduli)
            self._cache[key] = p.to_domain(domain)
        return self._cache[key]

    def power(self, t: int, moduli: Sequence[Modulus]) -> RnsPoly:
        """s^t in the evaluation domain."""
        key = ("pow", t, tuple(moduli))
        if key not in self._cache:
            s = self.poly(moduli)
            acc = s
            for _ in range(t - 1):
                acc = acc * s
            self._cache[key] = acc
        return self._cache[key]

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.coeffs))


@dataclass(eq=False)
class PublicKey:
    b: RnsPoly
    a: RnsPoly


@dataclass(eq=False)
class EvalKeySet:
    keys: dict  # t -> (ek0, ek1) over P + Q_L, evaluation domain
    K: int
    prescaled: bool = False

    @property
    def max_t(self) -> int:
        return max(self.keys) if self.keys else 1

    def get(self, t: int, level: int) -> tuple[RnsPoly, RnsPoly]:
        """Key pair for s^t restricted to P + Q_level."""
        if t not in self.keys:
            raise MissingEvalKey(t)
        stop = self.K + level
        return tuple(k.rows(0, stop) for k in self.keys[t])

    def with_prescaling(self, ctx: Context) -> "EvalKeySet":
        """Copy whose Q rows are multiplied by P^-1 ahead of time."""
        if self.prescaled:
            return self
        consts = [1] * ctx.K + list(ctx.p_inv_mod_q)
        keys = {t: tuple(k.scale_rows(consts) for k in pair) for t, pair in self.keys.items()}
        return EvalKeySet(keys, self.K, prescaled=True)


@dataclass(eq=False)
class CiphertextTuple:
    polys: list
    scale_exp: int = 1
    scale: Fraction | None = None

    def __post_init__(self):
        if len(self.polys) < 2:
            raise ParameterError("a ciphertext tuple needs at least two polynomials")
        first = self.polys[0]
        for p in self.polys[1:]:
            if p.moduli != first.moduli:
                raise LevelMismatch("tuple polynomials live at different levels")
            if p.domain != first.domain:
                raise DomainMismatch("tuple polynomials are in different domains")
        if self.scale_exp < 1:
            raise ParameterError("scale exponent must be at least 1")

    @property
    def level(self) -> int:
        return self.polys[0].level

    @property
    def domain(self) -> Domain:
        return self.polys[0].domain

    @property
    def size(self) -> int:
        return len(self.polys)

    @property
    def moduli(self) -> tuple:
        return self.polys[0].moduli

    @property
    def ring_degree(self) -> int:
        return self.polys[0].ring_degree

    def to_domain(self, domain: Domain, counters=None) -> "CiphertextTuple":
        return self.replace([p.to_domain(domain, counters) for p in self.polys])

    def replace(self, polys, scale_exp=None, scale=None) -> "CiphertextTuple":
        return CiphertextTuple(
            list(polys),
            self.scale_exp if scale_exp is None else scale_exp,
            self.scale if scale is None else scale,
        )

    def __eq__(self, other):
        if not isinstance(other, CiphertextTuple):
            return NotImplemented
        return self.scale_exp == other.scale_exp and self.size == other.size and all(
            a == b for a, b in zip(self.polys, other.polys)
        )

    @classmethod
    def trivial(cls, ctx: Context, values, level: int | None = None, scale_exp: int = 1) -> "CiphertextTuple":
        """Noise-free tuple ``(values, 0)`` in the evaluation domain."""
        level = ctx.L if level is None else level
        mods = ctx.q_moduli[:level]
        m = RnsPoly.from_ints(values, mods).ntt()
        return cls([m, RnsPoly.zeros(mods, ctx.N, Domain.EVALUATION)], scale_exp, Fraction(ctx.delta) ** scale_exp)


def keygen(ctx: Context, seed: int = 0) -> tuple[SecretKey, PublicKey]:
    rng = _rng(seed, _SECRET)
    sk = SecretKey(sample_ternary(rng, ctx.N, ctx.hamming_weight), ctx.hamming_weight)
    rng = _rng(seed, _PUBLIC)
    mods = ctx.q_moduli
    a = RnsPoly(sample_uniform(rng, mods, ctx.N), mods, Domain.EVALUATION)
    e = RnsPoly.from_ints(sample_gaussian(rng, ctx.N, ctx.sigma), mods).ntt()
    b = e - a * sk.poly(mods)
    return sk, PublicKey(b, a)


def keygen_eval(ctx: Context, sk: SecretKey, max_t: int, seed: int = 0) -> EvalKeySet:
    """Keys ek_t = (P s^t - a s + e, a) over P + Q for t = 2..max_t."""
    if max_t < 2:
        raise ParameterError("max_t must be at least 2")
    mods = ctx.extended_moduli()
    s = sk.poly(mods)
    p_consts = [0] * ctx.K + ctx.p_mod_q
    keys = {}
    for t in range(2, max_t + 1):
        rng = _rng(seed, _EVAL, t)
        a = RnsPoly(sample_uniform(rng, mods, ctx.N), mods, Domain.EVALUATION)
        e = RnsPoly.from_ints(sample_gaussian(rng, ctx.N, ctx.sigma), mods).ntt()
        st = sk.power(t, mods).scale_rows(p_consts)
        keys[t] = (st + e - a * s, a)
    return EvalKeySet(keys, ctx.K)


def encrypt(ctx: Context, pk: PublicKey, m, seed: int = 0) -> CiphertextTuple:
    """Encrypt an integer polynomial ``m`` as ``(Δm + v b + e0, v a + e1)``."""
    m = np.asarray([int(x) for x in m], dtype=object)
    if m.shape != (ctx.N,):
        raise ParameterError(f"message must have {ctx.N} coefficients")
    bound = max((abs(int(x)) for x in m), default=0)
    if bound * ctx.delta >= ctx.q_basis.product // 4:
        raise MessageTooLarge(f"|m| = {bound} does not fit below Q/4 after scaling")
    rng = _rng(seed, _ENCRYPT)
    mods = ctx.q_moduli
    v = RnsPoly.from_ints(sample_ternary(rng, ctx.N, ctx.N // 2), mods).ntt()
    e0 = sample_gaussian(rng, ctx.N, ctx.sigma)
    e1 = sample_gaussian(rng, ctx.N, ctx.sigma)
    scaled = [int(x) * ctx.delta + int(e) for x, e in zip(m, e0)]
    c0 = RnsPoly.from_ints(scaled, mods).ntt() + v * pk.b
    c1 = RnsPoly.from_ints(e1, mods).ntt() + v * pk.a
    return CiphertextTuple([c0, c1], 1, Fraction(ctx.delta))


def decrypt_raw(ctx: Context, sk: SecretKey, ct: CiphertextTuple) -> RnsPoly:
    """Coefficient-domain residues of sum_t d_t s^t."""
    polys = [p.to_domain(Domain.EVALUATION) for p in ct.polys]
    s = sk.poly(ct.moduli)
    acc = polys[-1]
    for p in reversed(polys[:-1]):
        acc = acc * s + p
    return acc.intt()


def decrypt_tuple(ctx: Context, sk: SecretKey, ct: CiphertextTuple) -> list[int]:
    """Centered integer coefficients of sum_t d_t s^t mod Q_level."""
    return crt_reconstruct(decrypt_raw(ctx, sk, ct))


def add(a: CiphertextTuple, b: CiphertextTuple) -> CiphertextTuple:
    """Component-wise sum; the shorter tuple is padded with zeros."""
    if a.moduli != b.moduli:
        raise LevelMismatch("operands are at different levels")
    if a.domain != b.domain:
        raise DomainMismatch("operands are in different domains")
    if a.scale_exp != b.scale_exp:
        raise ParameterError("operands carry different scales")
    zero = RnsPoly.zeros(a.moduli, a.ring_degree, a.domain)
    n = max(a.size, b.size)
    pa = a.polys + [zero] * (n - a.size)
    pb = b.polys + [zero] * (n - b.size)
    return CiphertextTuple([x + y for x, y in zip(pa, pb)], a.scale_exp, a.scale)
