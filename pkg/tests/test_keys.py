import math

import numpy as np
import pytest

from ckksmulti.errors import DomainMismatch, LevelMismatch, MessageTooLarge, MissingEvalKey, ParameterError
from ckksmulti.keys import (
    CiphertextTuple,
    add,
    decrypt_tuple,
    encrypt,
    fresh_noise_bound,
    keygen,
    keygen_eval,
    sample_gaussian,
    sample_ternary,
)
from ckksmulti.multiply import pm_tuple
from ckksmulti.ntt import Domain
from ckksmulti.oracle import centered, crt_reconstruct, exact_ring_product, noise_measure
from ckksmulti.poly import RnsPoly


def test_gaussian_sampler():
    rng = np.random.default_rng(1)
    x = sample_gaussian(rng, 200_000, 3.2)
    assert x.dtype.kind == "i"
    assert abs(x.mean()) < 0.05
    assert abs(x.std() - 3.2) < 0.05
    assert np.abs(x).max() <= math.ceil(6 * 3.2)
    assert np.array_equal(sample_gaussian(np.random.default_rng(1), 100, 3.2), x[:100])


def test_ternary_sampler():
    x = sample_ternary(np.random.default_rng(2), 1024, 64)
    assert np.count_nonzero(x) == 64
    assert set(np.unique(x)) <= {-1, 0, 1}


def test_secret_weight(desk_keys, desk_ctx):
    sk, _, _ = desk_keys
    assert sk.weight == desk_ctx.hamming_weight == 64
    assert set(np.unique(sk.coeffs)) <= {-1, 0, 1}


def test_public_key_residual(desk_ctx, desk_keys):
    sk, pk, _ = desk_keys
    e = crt_reconstruct((pk.b + pk.a * sk.poly(desk_ctx.q_moduli)).intt())
    assert max(abs(v) for v in e) <= 6 * desk_ctx.sigma
    assert any(e)


def test_keygen_deterministic_and_seeded(small_ctx):
    (s1, p1), (s2, p2) = keygen(small_ctx, 5), keygen(small_ctx, 5)
    assert np.array_equal(s1.coeffs, s2.coeffs) and p1.a == p2.a and p1.b == p2.b
    _, p3 = keygen(small_ctx, 6)
    assert p3.a != p1.a


def test_eval_key_identity(desk_ctx, desk_keys):
    sk, _, eks = desk_keys
    assert eks.max_t == 12 and sorted(eks.keys) == list(range(2, 13))
    mods = desk_ctx.extended_moduli()
    P = desk_ctx.p_basis.product
    s = sk.poly(mods)
    for t in (2, 3, 7, 12):
        ek0, ek1 = eks.keys[t]
        target = sk.power(t, mods).scale_rows([0] * desk_ctx.K + desk_ctx.p_mod_q)
        resid = crt_reconstruct((ek0 + ek1 * s - target).intt())
        assert max(abs(v) for v in resid) <= 6 * desk_ctx.sigma
        # the P rows carry no P s^t term at all
        assert (ek0 + ek1 * s).rows(0, desk_ctx.K).intt() == RnsPoly.from_ints(
            resid, desk_ctx.p_moduli
        )
    assert P % desk_ctx.p_moduli[0].value == 0


def test_eval_key_errors(small_ctx, small_keys):
    sk, _, eks = small_keys
    with pytest.raises(ParameterError):
        keygen_eval(small_ctx, sk, 1)
    with pytest.raises(MissingEvalKey):
        eks.get(7, 2)
    k0, k1 = eks.get(3, 2)
    assert k0.level == small_ctx.K + 2


def test_prescaled_keys(small_ctx, small_keys):
    _, _, eks = small_keys
    pre = eks.with_prescaling(small_ctx)
    assert pre.prescaled and pre.with_prescaling(small_ctx) is pre
    k = pre.keys[2][0]
    assert k.rows(0, small_ctx.K) == eks.keys[2][0].rows(0, small_ctx.K)
    assert k.rows(small_ctx.K) == eks.keys[2][0].rows(small_ctx.K).scale_rows(small_ctx.p_inv_mod_q)


def test_fresh_round_trip(desk_ctx, desk_keys):
    sk, pk, _ = desk_keys
    rng = np.random.default_rng(8)
    bound = fresh_noise_bound(desk_ctx)
    worst = 0
    for trial in range(100):
        m = rng.integers(-8, 9, size=desk_ctx.N)
        ct = encrypt(desk_ctx, pk, m, seed=trial)
        assert (ct.size, ct.level, ct.scale_exp) == (2, desk_ctx.L, 1)
        worst = max(worst, noise_measure(desk_ctx, sk, ct, [desk_ctx.delta * int(v) for v in m]))
    assert worst <= bound


def test_zero_and_unit_messages(desk_ctx, desk_keys):
    sk, pk, _ = desk_keys
    bound = fresh_noise_bound(desk_ctx)
    z = decrypt_tuple(desk_ctx, sk, encrypt(desk_ctx, pk, [0] * desk_ctx.N, seed=1))
    assert max(abs(v) for v in z) <= bound
    one = decrypt_tuple(desk_ctx, sk, encrypt(desk_ctx, pk, [1] + [0] * (desk_ctx.N - 1), seed=2))
    assert abs(one[0] - desk_ctx.delta) <= bound


def test_message_too_large(desk_ctx, desk_keys):
    _, pk, _ = desk_keys
    huge = desk_ctx.q_basis.product // desk_ctx.delta
    with pytest.raises(MessageTooLarge):
        encrypt(desk_ctx, pk, [huge] + [0] * (desk_ctx.N - 1))
    with pytest.raises(ParameterError):
        encrypt(desk_ctx, pk, [1, 2, 3])


def test_three_way_tuple_decrypts_to_product(desk_ctx, desk_keys):
    sk, pk, _ = desk_keys
    rng = np.random.default_rng(4)
    ms = [rng.integers(-2, 3, size=desk_ctx.N) for _ in range(3)]
    cts = [encrypt(desk_ctx, pk, m, seed=20 + i) for i, m in enumerate(ms)]
    d = pm_tuple(cts)
    assert d.size == 4 and d.scale_exp == 3
    want = [desk_ctx.delta**3 * v for v in exact_ring_product([list(map(int, m)) for m in ms])]
    err = noise_measure(desk_ctx, sk, d, want)
    assert err < desk_ctx.delta**2 * 2**30


def test_zero_tuple(small_ctx, small_keys):
    sk, _, _ = small_keys
    z = RnsPoly.zeros(small_ctx.q_moduli, small_ctx.N, Domain.EVALUATION)
    assert decrypt_tuple(small_ctx, sk, CiphertextTuple([z, z, z])) == [0] * small_ctx.N


def test_addition_commutes_with_decryption(small_ctx, small_keys, rng):
    sk, pk, _ = small_keys
    a = encrypt(small_ctx, pk, rng.integers(-5, 5, size=small_ctx.N), seed=1)
    b = encrypt(small_ctx, pk, rng.integers(-5, 5, size=small_ctx.N), seed=2)
    Q = small_ctx.q_basis.product
    lhs = decrypt_tuple(small_ctx, sk, add(a, b))
    rhs = centered([x + y for x, y in zip(decrypt_tuple(small_ctx, sk, a), decrypt_tuple(small_ctx, sk, b))], Q)
    assert lhs == rhs
    longer = pm_tuple([a, b])
    with pytest.raises(ParameterError):
        add(a, longer)


def test_tuple_validation(small_ctx):
    z = RnsPoly.zeros(small_ctx.q_moduli, small_ctx.N, Domain.EVALUATION)
    with pytest.raises(ParameterError):
        CiphertextTuple([z])
    with pytest.raises(LevelMismatch):
        CiphertextTuple([z, z.drop_to(2)])
    with pytest.raises(DomainMismatch):
        CiphertextTuple([z, z.intt()])
    with pytest.raises(ParameterError):
        CiphertextTuple([z, z], scale_exp=0)
