import math
from fractions import Fraction

import numpy as np
import pytest

from ckksmulti.counters import OpCounters
from ckksmulti.errors import DomainMismatch, LevelMismatch, LevelTooLow, MuOutOfRange
from ckksmulti.ntt import Domain
from ckksmulti.oracle import centered, crt_reconstruct
from ckksmulti.poly import RnsPoly
from ckksmulti.rescale import multi_rs, multi_rs_naive, rs_coeff, rs_ntt, rs_sequential, rs_star

from conftest import random_poly


def test_constant_residues_vanish(small_ctx):
    c = 12345
    p = RnsPoly.constant(c, small_ctx.q_moduli, small_ctx.N)
    assert rs_coeff(p).is_zero()
    assert rs_ntt(p.ntt()).is_zero()


def test_exact_multiple_divides(small_ctx, rng):
    qs = small_ctx.q_basis.values
    z = [int(v) for v in rng.integers(-(1 << 40), 1 << 40, size=small_ctx.N)]
    p = RnsPoly.from_ints([v * qs[-1] for v in z], small_ctx.q_moduli)
    assert crt_reconstruct(rs_coeff(p)) == z


def test_rounding_against_rational_oracle(small_ctx, rng):
    for level in (2, 3, 4):
        p = random_poly(small_ctx, level, rng, Domain.COEFFICIENT)
        top = p.moduli[-1].value
        Q_low = math.prod(m.value for m in p.moduli[:-1])
        x = crt_reconstruct(p)
        want = [round(Fraction(v, top)) for v in x]
        got = crt_reconstruct(rs_coeff(p))
        diff = centered([g - w for g, w in zip(got, want)], Q_low)
        assert max(abs(d) for d in diff) <= 1


def test_rs_ntt_matches_coefficient_path(small_ctx, rng):
    for level in (2, 3, 4):
        p = random_poly(small_ctx, level, rng)
        c = OpCounters()
        out = rs_ntt(p, c)
        assert out == rs_coeff(p.intt()).ntt()
        assert (c.intt, c.ntt) == (1, level - 1)
        assert out.level == level - 1


def test_rs_star(small_ctx, rng):
    p = random_poly(small_ctx, 4, rng, Domain.COEFFICIENT)
    c = OpCounters()
    out = rs_star(p, c)
    assert out.domain == Domain.EVALUATION
    assert out == rs_ntt(p.ntt())
    assert (c.intt, c.ntt) == (0, 3)
    assert rs_star(RnsPoly.zeros(small_ctx.q_moduli, small_ctx.N)).is_zero()


def test_single_modulus_rejected(small_ctx, rng):
    p = random_poly(small_ctx, 1, rng)
    with pytest.raises(LevelTooLow):
        rs_ntt(p)
    with pytest.raises(LevelTooLow):
        rs_coeff(p.intt())
    with pytest.raises(DomainMismatch):
        rs_coeff(random_poly(small_ctx, 3, rng))
    with pytest.raises(DomainMismatch):
        rs_star(random_poly(small_ctx, 3, rng))


def test_multi_rs_base_case(desk_ctx, rng):
    p = random_poly(desk_ctx, 8, rng)
    assert multi_rs(desk_ctx, p, 1) == rs_ntt(p)


def test_multi_rs_two_levels_small_ring():
    from ckksmulti.context import build_context

    ctx = build_context(64, 6, 6, h=32)
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = random_poly(ctx, 6, rng)
        assert multi_rs(ctx, p, 2) == rs_ntt(rs_ntt(p))


@pytest.mark.parametrize("level", range(2, 9))
def test_multi_rs_all_mu(desk_ctx, rng, level):
    p = random_poly(desk_ctx, level, rng)
    for mu in range(1, level):
        c = OpCounters()
        got = multi_rs(desk_ctx, p, mu, c)
        assert got == rs_sequential(p, mu) == multi_rs_naive(p, mu)
        assert (c.intt, c.ntt) == (mu, level - mu)
        assert c.const_mul == (mu + 1) * level - mu * (mu + 3) // 2


def test_naive_counts(desk_ctx, rng):
    p = random_poly(desk_ctx, 8, rng)
    for mu in range(1, 8):
        c = OpCounters()
        multi_rs_naive(p, mu, c)
        assert (c.intt, c.ntt) == (8, 8 - mu)
        assert c.const_mul == mu * 8 - mu * (mu + 1) // 2


def test_multi_rs_errors(small_ctx, rng):
    p = random_poly(small_ctx, 3, rng)
    for mu in (0, 3):
        with pytest.raises(MuOutOfRange):
            multi_rs(small_ctx, p, mu)
    with pytest.raises(DomainMismatch):
        multi_rs(small_ctx, p.intt(), 1)
    foreign = random_poly(small_ctx, None, rng, moduli=small_ctx.p_moduli[:3])
    with pytest.raises(LevelMismatch):
        multi_rs(small_ctx, foreign, 1)
