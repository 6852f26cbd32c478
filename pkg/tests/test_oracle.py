import math
import random

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from sympy.ntheory.modular import crt

from ckksmulti.acceptance import fresh_ciphertexts
from ckksmulti.ntt import Domain
from ckksmulti.oracle import (
    centered,
    crt_reconstruct,
    decompose,
    exact_ring_product,
    negacyclic_product,
    noise_measure,
    rounded_division,
    subset_sum_tuple,
)
from ckksmulti.poly import RnsPoly

PRIMES = [12289, 40961, 65537, 786433]
Q = math.prod(PRIMES)


def _fold(full, n):
    out = [0] * n
    for k, v in enumerate(full):
        out[k % n] += int(v) if (k // n) % 2 == 0 else -int(v)
    return out


def test_crt_round_trip():
    rng = random.Random(5)
    values = [rng.randrange(-(Q // 2) + 1, Q // 2 + 1) for _ in range(1000)]
    assert crt_reconstruct(decompose(values, PRIMES), PRIMES) == values


@given(st.lists(st.integers(0, Q - 1), min_size=1, max_size=8))
def test_crt_matches_sympy(values):
    rows = decompose(values, PRIMES)
    got = crt_reconstruct(rows, PRIMES)
    for i, v in enumerate(values):
        want = int(crt(PRIMES, [r[i] for r in rows])[0])
        assert got[i] % Q == want


def test_crt_from_poly(small_ctx):
    vals = list(range(-32, 32))
    p = RnsPoly.from_ints(vals, small_ctx.q_moduli)
    assert crt_reconstruct(p) == vals


def test_negacyclic_wrap():
    n = 16
    half = [0] * n
    half[n // 2] = 1
    assert negacyclic_product(half, half) == [-1] + [0] * (n - 1)


@given(st.lists(st.integers(-50, 50), min_size=8, max_size=8), st.lists(st.integers(-50, 50), min_size=8, max_size=8))
def test_negacyclic_matches_numpy(a, b):
    full = np.polynomial.polynomial.polymul(np.array(a, dtype=object), np.array(b, dtype=object))
    assert negacyclic_product(a, b) == _fold(full, 8)


def test_exact_ring_product_reduction():
    rng = np.random.default_rng(9)
    polys = [[int(v) for v in rng.integers(-1000, 1000, 8)] for _ in range(4)]
    plain = exact_ring_product(polys)
    assert exact_ring_product(polys, 10007) == centered(plain, 10007)


def test_centered_range():
    assert centered([0, 5, 6, 11, -1], 11) == [0, 5, -5, 0, -1]
    assert centered([5], 10) == [5]


def test_subset_sum_matches_direct_expansion():
    rng = np.random.default_rng(3)
    ops = [[[int(v) for v in rng.integers(-9, 9, 4)] for _ in range(2)] for _ in range(3)]
    got = subset_sum_tuple(ops)
    # evaluate prod (c0 + c1 s) at a few integer polynomials s and compare
    for s in ([1, 0, 0, 0], [0, 1, 0, 0], [2, -1, 0, 3]):
        lhs = exact_ring_product([[a + b for a, b in zip(c0, negacyclic_product(c1, s))] for c0, c1 in ops])
        rhs = [0] * 4
        power = [1, 0, 0, 0]
        for term in got:
            rhs = [x + y for x, y in zip(rhs, negacyclic_product(term, power))]
            power = negacyclic_product(power, s)
        assert lhs == rhs


def test_rounded_division():
    assert rounded_division([7, 8, 9, -7, -8, -9], 4) == [2, 2, 2, -2, -2, -2]
    assert rounded_division([6, -6], 4) == [2, -1]


def test_noise_measure_zero_on_exact(small_ctx, small_keys, rng):
    from ckksmulti.keys import decrypt_tuple

    sk, pk, _ = small_keys
    _, (ct,) = fresh_ciphertexts(small_ctx, pk, 1, rng)
    assert noise_measure(small_ctx, sk, ct, decrypt_tuple(small_ctx, sk, ct)) == 0
    assert ct.domain == Domain.EVALUATION
