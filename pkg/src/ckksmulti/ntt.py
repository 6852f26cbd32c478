"""Negacyclic NTT over Z_q[x]/(x^N + 1).

Forward transform: iterative Cooley-Tukey butterflies with the psi twist
merged into bit-reversed twiddles.  The output is in bit-reversed order:
slot ``i`` holds ``a(psi^(2*bitrev(i)+1))``.  The inverse is the matching
Gentleman-Sande pass followed by scaling with ``N^-1``.  Pointwise
products in this ordering correspond to negacyclic polynomial products.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainMismatch, ModulusMismatch, ParameterError
from .modarith import Modulus, VecMod, vadd, vmul, vsub


class Domain(enum.IntEnum):
    COEFFICIENT = 0
    EVALUATION = 1


@dataclass(frozen=True, eq=False)
class CoeffVector:
    coeffs: np.ndarray
    modulus: Modulus
    domain: Domain = Domain.COEFFICIENT

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.uint64)
        if c.ndim != 1 or c.shape[0] != self.modulus.ring_degree:
            raise ParameterError(f"expected {self.modulus.ring_degree} coefficients, got {c.shape}")
        if np.any(c >= np.uint64(self.modulus.value)):
            raise ParameterError("coefficients must be canonical residues")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_ints(cls, values, modulus: Modulus, domain=Domain.COEFFICIENT) -> "CoeffVector":
        q = modulus.value
        return cls(np.array([int(v) % q for v in values], dtype=np.uint64), modulus, domain)

    def __eq__(self, other):
        if not isinstance(other, CoeffVector):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.domain == other.domain
            and np.array_equal(self.coeffs, other.coeffs)
        )


def ntt_rows(a: np.ndarray, vm: VecMod, psi_rev: np.ndarray) -> np.ndarray:
    """Forward transform of each row of ``a`` (shape ``(k, N)``)."""
    k, n = a.shape
    q3 = vm.reshape((k, 1, 1))
    t, m = n, 1
    while m < n:
        t //= 2
        blk = a.reshape(k, m, 2, t)
        s = psi_rev[:, m : 2 * m].reshape(k, m, 1)
        u = blk[:, :, 0, :]
        v = vmul(blk[:, :, 1, :], s, q3)
        a = np.stack((vadd(u, v, q3), vsub(u, v, q3)), axis=2)
        m *= 2
    return a.reshape(k, n)


def intt_rows(a: np.ndarray, vm: VecMod, psi_inv_rev: np.ndarray, n_inv: np.ndarray) -> np.ndarray:
    k, n = a.shape
    q3 = vm.reshape((k, 1, 1))
    t, m = 1, n
    while m > 1:
        h = m // 2
        blk = a.reshape(k, h, 2, t)
        s = psi_inv_rev[:, h:m].reshape(k, h, 1)
        u = blk[:, :, 0, :]
        v = blk[:, :, 1, :]
        a = np.stack((vadd(u, v, q3), vmul(vsub(u, v, q3), s, q3)), axis=2)
        t *= 2
        m = h
    return vmul(a.reshape(k, n), n_inv, vm)


def ntt_forward(v: CoeffVector) -> CoeffVector:
    if v.domain != Domain.COEFFICIENT:
        raise DomainMismatch("ntt_forward expects a coefficient-domain vector")
    m = v.modulus
    out = ntt_rows(v.coeffs.reshape(1, -1).copy(), VecMod([m.value]), m.psi_rev.reshape(1, -1))
    return CoeffVector(out[0], m, Domain.EVALUATION)


def ntt_inverse(v: CoeffVector) -> CoeffVector:
    if v.domain != Domain.EVALUATION:
        raise DomainMismatch("ntt_inverse expects an evaluation-domain vector")
    m = v.modulus
    out = intt_rows(
        v.coeffs.reshape(1, -1).copy(),
        VecMod([m.value]),
        m.psi_inv_rev.reshape(1, -1),
        np.array([[m.n_inv]], dtype=np.uint64),
    )
    return CoeffVector(out[0], m, Domain.COEFFICIENT)


def pointwise_mul(a: CoeffVector, b: CoeffVector) -> CoeffVector:
    if a.modulus != b.modulus:
        raise ModulusMismatch("operands use different moduli")
    if a.domain != Domain.EVALUATION or b.domain != Domain.EVALUATION:
        raise DomainMismatch("pointwise product needs evaluation-domain operands")
    return CoeffVector(vmul(a.coeffs, b.coeffs, VecMod([a.modulus.value], (1,))), a.modulus, Domain.EVALUATION)


def negacyclic_mul_schoolbook(a: CoeffVector, b: CoeffVector) -> CoeffVector:
    """O(N^2) product in Z_q[x]/(x^N+1); reference path only."""
    if a.modulus != b.modulus:
        raise ModulusMismatch("operands use different moduli")
    if a.domain != Domain.COEFFICIENT or b.domain != Domain.COEFFICIENT:
        raise DomainMismatch("schoolbook product works on coefficient vectors")
    q = a.modulus.value
    n = a.modulus.ring_degree
    x = [int(c) for c in a.coeffs]
    y = [int(c) for c in b.coeffs]
    acc = [0] * n
    for i, xi in enumerate(x):
        if not xi:
            continue
        for j, yj in enumerate(y):
            k = i + j
            if k < n:
                acc[k] += xi * yj
            else:
                acc[k - n] -= xi * yj
    return CoeffVector.from_ints(acc, a.modulus)
