import numpy as np
import pytest

from ckksmulti import fileio
from ckksmulti.acceptance import fresh_ciphertexts
from ckksmulti.errors import FormatError
from ckksmulti.keys import decrypt_tuple
from ckksmulti.multiply import pm_2


def test_secret_key_round_trip(small_ctx, small_keys):
    sk = small_keys[0]
    back = fileio.load_secret_key(small_ctx, fileio.dump_secret_key(small_ctx, sk))
    assert np.array_equal(back.coeffs, sk.coeffs) and back.h == sk.h


def test_public_key_round_trip(small_ctx, small_keys):
    pk = small_keys[1]
    back = fileio.load_public_key(small_ctx, fileio.dump_public_key(pk))
    assert back.b == pk.b and back.a == pk.a


def test_eval_keys_round_trip(small_ctx, small_keys):
    eks = small_keys[2]
    back = fileio.load_eval_keys(small_ctx, fileio.dump_eval_keys(eks))
    assert sorted(back.keys) == sorted(eks.keys)
    for t in eks.keys:
        assert back.keys[t][0] == eks.keys[t][0] and back.keys[t][1] == eks.keys[t][1]


def test_ciphertext_round_trip(small_ctx, small_keys, rng, tmp_path):
    sk, pk, _ = small_keys
    _, cts = fresh_ciphertexts(small_ctx, pk, 2, rng)
    d = pm_2(*cts)
    path = tmp_path / "ct.bin"
    fileio.write(path, fileio.dump_ciphertext(d))
    back = fileio.load_ciphertext(small_ctx, fileio.read(path))
    assert back == d and back.scale is None
    assert decrypt_tuple(small_ctx, sk, back) == decrypt_tuple(small_ctx, sk, d)


def test_header_layout(small_ctx, small_keys):
    data = fileio.dump_public_key(small_keys[1])
    magic, version, n, level, size, scale_exp, domain = fileio.HEADER.unpack_from(data)
    assert (magic, version, n, level, size) == (b"PUBK", 1, small_ctx.N, small_ctx.L, 2)
    assert len(data) == fileio.HEADER.size + 2 * small_ctx.L * small_ctx.N * 8


def _patch(data, offset, raw):
    return data[:offset] + raw + data[offset + len(raw):]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: _patch(d, 0, b"XXXX"),
        lambda d: _patch(d, 4, (7).to_bytes(2, "little")),
        lambda d: _patch(d, fileio.HEADER.size - 1, b"\x05"),
        lambda d: d[:-8],
        lambda d: d[:10],
        lambda d: _patch(d, fileio.HEADER.size, (2**64 - 1).to_bytes(8, "little")),
    ],
    ids=["magic", "version", "domain", "truncated", "short-header", "residue"],
)
def test_corrupt_ciphertext(small_ctx, small_keys, rng, mutate):
    _, cts = fresh_ciphertexts(small_ctx, small_keys[1], 1, rng)
    data = fileio.dump_ciphertext(cts[0])
    with pytest.raises(FormatError):
        fileio.load_ciphertext(small_ctx, mutate(data))


def test_wrong_kind_and_ring(small_ctx, small_keys, desk_ctx):
    data = fileio.dump_public_key(small_keys[1])
    with pytest.raises(FormatError):
        fileio.load_ciphertext(small_ctx, data)
    with pytest.raises(FormatError):
        fileio.load_public_key(desk_ctx, data)


def test_secret_key_must_be_ternary(small_ctx, small_keys):
    data = fileio.dump_secret_key(small_ctx, small_keys[0])
    row = small_ctx.K * small_ctx.N * 8
    bad = _patch(data, fileio.HEADER.size + row, (5).to_bytes(8, "little"))
    with pytest.raises(FormatError):
        fileio.load_secret_key(small_ctx, bad)
