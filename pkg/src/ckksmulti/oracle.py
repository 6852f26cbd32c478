"""Exact big-integer references used by tests and the ``verify`` command.

Everything here is quadratic or worse and intended for small rings only.
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np


def _moduli_values(moduli) -> list[int]:
    return [int(m) for m in moduli]


def crt_reconstruct(residues, moduli=None) -> list[int]:
    """Centered CRT lift, one integer in (-Q/2, Q/2] per coefficient.

    ``residues`` is either an ``RnsPoly`` in the coefficient domain or a
    sequence of residue rows paired with ``moduli``.
    """
    if moduli is None:
        moduli = residues.moduli
        rows = residues.coeffs
    else:
        rows = residues
    qs = _moduli_values(moduli)
    Q = math.prod(qs)
    acc = np.zeros(len(rows[0]), dtype=object)
    for row, q in zip(rows, qs):
        qhat = Q // q
        w = qhat * pow(qhat % q, -1, q)
        acc = acc + np.asarray(row, dtype=np.uint64).astype(object) * w
    half = Q // 2
    out = []
    for v in acc:
        v %= Q
        out.append(v - Q if v > half else v)
    return out


def decompose(values: Sequence[int], moduli) -> list[list[int]]:
    return [[int(v) % q for v in values] for q in _moduli_values(moduli)]


def negacyclic_product(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Exact product in Z[x]/(x^N + 1)."""
    n = len(a)
    acc = [0] * n
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if not y:
                continue
            k = i + j
            if k < n:
                acc[k] += x * y
            else:
                acc[k - n] -= x * y
    return acc


def centered(values: Sequence[int], Q: int) -> list[int]:
    half = Q // 2
    out = []
    for v in values:
        v %= Q
        out.append(v - Q if v > half else v)
    return out


def exact_ring_product(polys: Sequence[Sequence[int]], Q: int | None = None) -> list[int]:
    """Product of integer polynomials mod x^N + 1, reduced (centered) mod Q if given."""
    if not polys:
        raise ValueError("need at least one polynomial")
    acc = [int(v) for v in polys[0]]
    for p in polys[1:]:
        acc = negacyclic_product(acc, [int(v) for v in p])
        if Q is not None:
            acc = centered(acc, Q)
    return centered(acc, Q) if Q is not None else acc


def subset_sum_tuple(operands: Sequence[Sequence[Sequence[int]]], Q: int | None = None) -> list[list[int]]:
    """Coefficients of prod_u (c0_u + c1_u s) in powers of s by enumerating all 2^n choices.

    Each operand is a pair ``(c0, c1)`` of integer polynomials.  Entry ``t`` of
    the result is the sum over subsets of size ``t`` of the products picking
    ``c1`` inside the subset and ``c0`` outside.
    """
    n = len(operands)
    size = len(operands[0][0])
    out = [[0] * size for _ in range(n + 1)]
    for picks in itertools.product((0, 1), repeat=n):
        term = exact_ring_product([operands[u][picks[u]] for u in range(n)], Q)
        t = sum(picks)
        out[t] = [x + y for x, y in zip(out[t], term)]
    if Q is not None:
        out = [centered(r, Q) for r in out]
    return out


def noise_measure(ctx, sk, ct, expected: Sequence[int]) -> int:
    """Largest centered coefficient of decrypt(ct) - expected modulo Q_level."""
    from .keys import decrypt_tuple

    got = decrypt_tuple(ctx, sk, ct)
    Q = math.prod(int(m) for m in ct.moduli)
    diff = centered([g - int(e) for g, e in zip(got, expected)], Q)
    return max(abs(d) for d in diff)


def rounded_division(values: Sequence[int], divisor: int) -> list[int]:
    """Coefficient-wise nearest integer to v / divisor (halves rounded up)."""
    return [(2 * int(v) + divisor) // (2 * divisor) for v in values]
