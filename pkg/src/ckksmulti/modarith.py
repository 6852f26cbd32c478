"""Word-size modular arithmetic and NTT-friendly prime moduli.

Scalar helpers (``mulmod`` and friends) work on Python ints and use Barrett
reduction.  The ``v*`` kernels operate on ``uint64`` numpy arrays; they use
a floating-point reciprocal of the modulus as the Barrett constant, which
keeps every intermediate inside 64-bit lanes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoPrimeFound, NotInvertible, ParameterError

# Deterministic Miller-Rabin witness set for n < 2^64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

MAX_BITS = 62
_F64_LIMIT = 1 << 50
_LD_LIMIT = 1 << 60


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def bit_reverse(i: int, bits: int) -> int:
    return int(format(i, f"0{bits}b")[::-1], 2) if bits else 0


@dataclass(frozen=True, eq=False)
class Modulus:
    """A prime ``value`` with ``value = 1 (mod 2N)`` and its NTT constants."""

    value: int
    ring_degree: int
    psi: int
    psi_inv: int
    n_inv: int
    barrett_const: int
    psi_rev: np.ndarray = field(repr=False)
    psi_inv_rev: np.ndarray = field(repr=False)

    @property
    def bit_width(self) -> int:
        return self.value.bit_length()

    @classmethod
    def create(cls, value: int, ring_degree: int) -> "Modulus":
        n = ring_degree
        if n < 2 or n & (n - 1):
            raise ParameterError(f"ring degree {n} is not a power of two")
        if not is_prime(value) or (value - 1) % (2 * n):
            raise ParameterError(f"{value} is not a prime = 1 mod {2 * n}")
        if value.bit_length() > MAX_BITS:
            raise ParameterError(f"modulus wider than {MAX_BITS} bits")
        psi = _smallest_primitive_root(value, 2 * n)
        psi_inv = pow(psi, -1, value)
        logn = n.bit_length() - 1
        fwd = _powers(psi, n, value)
        inv = _powers(psi_inv, n, value)
        order = [bit_reverse(i, logn) for i in range(n)]
        m = cls(
            value=value,
            ring_degree=n,
            psi=psi,
            psi_inv=psi_inv,
            n_inv=pow(n, -1, value),
            barrett_const=(1 << (2 * value.bit_length())) // value,
            psi_rev=np.array([fwd[j] for j in order], dtype=np.uint64),
            psi_inv_rev=np.array([inv[j] for j in order], dtype=np.uint64),
        )
        # constructor-time self checks
        assert pow(psi, n, value) == value - 1
        assert m.n_inv * n % value == 1
        return m

    def __eq__(self, other):
        if not isinstance(other, Modulus):
            return NotImplemented
        return self.value == other.value and self.ring_degree == other.ring_degree

    def __hash__(self):
        return hash((self.value, self.ring_degree))

    def __int__(self):
        return self.value


def _powers(base: int, count: int, mod: int) -> list[int]:
    out = [1] * count
    for i in range(1, count):
        out[i] = out[i - 1] * base % mod
    return out


def _smallest_primitive_root(p: int, order: int) -> int:
    """Smallest x with multiplicative order exactly ``order`` (a power of two) mod p."""
    half = order // 2
    h = 2
    while True:
        cand = pow(h, (p - 1) // order, p)
        if pow(cand, half, p) == p - 1:
            break
        h += 1
    # every primitive root is an odd power of cand
    best = cand
    sq = cand * cand % p
    x = cand
    for _ in range(half - 1):
        x = x * sq % p
        if x < best:
            best = x
    return best


def generate_ntt_prime(bits: int, ring_degree: int, seed: int = 0) -> Modulus:
    """Return the ``seed``-th prime (counting from 0) below ``2**bits`` that is 1 mod 2N.

    Candidates are scanned downward from ``2**bits - 1`` so the result is
    fully reproducible.
    """
    primes = ntt_primes(bits, ring_degree, seed + 1)
    return Modulus.create(primes[-1], ring_degree)


def ntt_primes(bits: int, ring_degree: int, count: int, skip: int = 0) -> list[int]:
    n = ring_degree
    if n < 2 or n & (n - 1):
        raise ParameterError(f"ring degree {n} is not a power of two")
    # a prime = 1 mod 2N needs more bits than 2N itself
    if not (2 * n).bit_length() < bits <= MAX_BITS:
        raise ParameterError(f"prime width {bits} out of range for N={n}")
    step = 2 * n
    lo = 1 << (bits - 1)
    top = (1 << bits) - 1
    cand = top - ((top - 1) % step)
    found: list[int] = []
    while cand > lo:
        if is_prime(cand):
            if skip:
                skip -= 1
            else:
                found.append(cand)
                if len(found) == count:
                    return found
        cand -= step
    raise NoPrimeFound(f"only {len(found)} of {count} {bits}-bit primes = 1 mod {step}")


# -- scalar arithmetic ------------------------------------------------------


def mulmod(a: int, b: int, m: Modulus) -> int:
    """Barrett modular multiplication of canonical residues."""
    q = m.value
    k2 = 2 * q.bit_length()
    x = a * b
    r = x - ((x * m.barrett_const) >> k2) * q
    while r >= q:
        r -= q
    return r


def addmod(a: int, b: int, m: Modulus) -> int:
    r = a + b
    return r - m.value if r >= m.value else r


def submod(a: int, b: int, m: Modulus) -> int:
    r = a - b
    return r + m.value if r < 0 else r


def invmod(a: int, m: Modulus | int) -> int:
    q = int(m)
    a %= q
    if a == 0:
        raise NotInvertible(f"0 has no inverse mod {q}")
    try:
        return pow(a, -1, q)
    except ValueError as exc:
        raise NotInvertible(str(exc)) from None


# -- vector kernels ---------------------------------------------------------


class VecMod:
    """Column of moduli prepared for broadcasting against ``(rows, N)`` arrays."""

    __slots__ = ("q", "qi", "recip", "wide")

    def __init__(self, values, shape=None):
        vals = [int(v) for v in values]
        shape = shape or (len(vals), 1)
        self.q = np.array(vals, dtype=np.uint64).reshape(shape)
        self.qi = self.q.view(np.int64)
        top = max(vals)
        self.wide = top >= _LD_LIMIT
        if top < _F64_LIMIT:
            self.recip = 1.0 / self.q.astype(np.float64)
        else:
            self.recip = np.longdouble(1) / self.q.astype(np.longdouble)

    def reshape(self, shape) -> "VecMod":
        out = VecMod.__new__(VecMod)
        out.q = self.q.reshape(shape)
        out.qi = out.q.view(np.int64)
        out.recip = self.recip.reshape(shape)
        out.wide = self.wide
        return out


def vmul(a: np.ndarray, b: np.ndarray, vm: VecMod) -> np.ndarray:
    """Elementwise ``a*b mod q`` for canonical uint64 inputs."""
    if vm.wide:
        q = vm.q.astype(object)
        return (a.astype(object) * b.astype(object) % q).astype(np.uint64)
    ft = vm.recip.dtype
    quot = np.floor(a.astype(ft) * b.astype(ft) * vm.recip).astype(np.uint64)
    r = (a * b - quot * vm.q).view(np.int64)
    # quotient estimate is off by at most one in either direction
    r = np.where(r < 0, r + vm.qi, r)
    r = np.where(r >= vm.qi, r - vm.qi, r)
    return r.view(np.uint64)


def vadd(a: np.ndarray, b: np.ndarray, vm: VecMod) -> np.ndarray:
    r = a + b
    return np.where(r >= vm.q, r - vm.q, r)


def vsub(a: np.ndarray, b: np.ndarray, vm: VecMod) -> np.ndarray:
    return np.where(a >= b, a - b, a + (vm.q - b))


def vneg(a: np.ndarray, vm: VecMod) -> np.ndarray:
    return np.where(a == 0, a, vm.q - a)
