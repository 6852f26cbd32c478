import numpy as np
import pytest
from hypothesis import settings

from ckksmulti.acceptance import desk_context, _desk_keys
from ckksmulti.context import build_context
from ckksmulti.keys import keygen, keygen_eval, sample_uniform
from ckksmulti.ntt import Domain
from ckksmulti.poly import RnsPoly

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_ctx():
    return build_context(64, 4, 4, w_q=50, h=32, seed=1)


@pytest.fixture(scope="session")
def small_keys(small_ctx):
    sk, pk = keygen(small_ctx, seed=3)
    return sk, pk, keygen_eval(small_ctx, sk, 6, seed=4)


@pytest.fixture(scope="session")
def desk_ctx():
    return desk_context(1024, 8, 8)


@pytest.fixture(scope="session")
def desk_keys():
    return _desk_keys(1024, 8, 8, 12)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def random_poly(ctx, level, rng, domain=Domain.EVALUATION, moduli=None):
    mods = tuple(moduli) if moduli is not None else ctx.q_moduli[:level]
    return RnsPoly(sample_uniform(rng, mods, ctx.N), mods, domain)
