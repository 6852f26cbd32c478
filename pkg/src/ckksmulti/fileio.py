"""Binary files for keys and ciphertexts.

Every file starts with a fixed little-endian header::

    magic[4] version:u16 N:u32 level:u16 tuple_size:u16 scale_exp:u16 domain:u8

followed by ``tuple_size`` polynomials, each stored as ``level`` rows of
``N`` 64-bit little-endian words in modulus order.  ``level`` counts the
rows per polynomial, so key files over P + Q store K + L rows.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .context import Context
from .errors import FormatError
from .keys import CiphertextTuple, EvalKeySet, PublicKey, SecretKey
from .ntt import Domain
from .poly import RnsPoly

VERSION = 1
HEADER = struct.Struct("<4sHIHHHB")

SECRET_MAGIC = b"SECK"
PUBLIC_MAGIC = b"PUBK"
EVAL_MAGIC = b"EVKS"
CIPHER_MAGIC = b"CTXT"


def _encode(magic: bytes, polys, scale_exp: int = 1) -> bytes:
    first = polys[0]
    head = HEADER.pack(magic, VERSION, first.ring_degree, first.level, len(polys), scale_exp, int(first.domain))
    body = b"".join(np.ascontiguousarray(p.coeffs, dtype="<u8").tobytes() for p in polys)
    return head + body


def _decode(data: bytes, magic: bytes):
    if len(data) < HEADER.size:
        raise FormatError("file is shorter than its header")
    got, version, n, level, size, scale_exp, domain = HEADER.unpack_from(data)
    if got != magic:
        raise FormatError(f"expected magic {magic!r}, found {got!r}")
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    if domain not in (0, 1):
        raise FormatError(f"unknown domain flag {domain}")
    expected = HEADER.size + size * level * n * 8
    if len(data) != expected:
        raise FormatError(f"payload has {len(data)} bytes, header implies {expected}")
    words = np.frombuffer(data, dtype="<u8", offset=HEADER.size).astype(np.uint64)
    rows = words.reshape(size, level, n)
    return rows, scale_exp, Domain(domain)


def _polys(rows, moduli, domain) -> list[RnsPoly]:
    if rows.shape[1] != len(moduli):
        raise FormatError(f"file holds {rows.shape[1]} rows per polynomial, expected {len(moduli)}")
    qs = np.array([m.value for m in moduli], dtype=np.uint64)[:, None]
    if np.any(rows >= qs):
        raise FormatError("residue outside its modulus")
    return [RnsPoly(r.copy(), tuple(moduli), domain) for r in rows]


def _check_ring(rows, ctx: Context) -> None:
    if rows.shape[2] != ctx.N:
        raise FormatError(f"ring degree {rows.shape[2]} does not match context N={ctx.N}")


# secret key: its ternary coefficients lifted over P + Q, coefficient domain

def dump_secret_key(ctx: Context, sk: SecretKey) -> bytes:
    return _encode(SECRET_MAGIC, [sk.poly(ctx.extended_moduli(ctx.L), Domain.COEFFICIENT)])


def load_secret_key(ctx: Context, data: bytes) -> SecretKey:
    rows, _, domain = _decode(data, SECRET_MAGIC)
    _check_ring(rows, ctx)
    (p,) = _polys(rows, ctx.extended_moduli(ctx.L), domain)
    q0 = ctx.q_moduli[0].value
    row = p.to_domain(Domain.COEFFICIENT).coeffs[-ctx.L].astype(np.int64)
    coeffs = np.where(row > q0 // 2, row - q0, row)
    if np.any(np.abs(coeffs) > 1):
        raise FormatError("secret key is not ternary")
    return SecretKey(coeffs.astype(np.int64), int(np.count_nonzero(coeffs)))


def dump_public_key(pk: PublicKey) -> bytes:
    return _encode(PUBLIC_MAGIC, [pk.b, pk.a])


def load_public_key(ctx: Context, data: bytes) -> PublicKey:
    rows, _, domain = _decode(data, PUBLIC_MAGIC)
    _check_ring(rows, ctx)
    b, a = _polys(rows, ctx.q_moduli[: rows.shape[1]], domain)
    return PublicKey(b, a)


def dump_eval_keys(eks: EvalKeySet) -> bytes:
    polys = [p for t in sorted(eks.keys) for p in eks.keys[t]]
    return _encode(EVAL_MAGIC, polys)


def load_eval_keys(ctx: Context, data: bytes) -> EvalKeySet:
    rows, _, domain = _decode(data, EVAL_MAGIC)
    _check_ring(rows, ctx)
    if rows.shape[0] % 2:
        raise FormatError("evaluation key file holds an odd number of polynomials")
    polys = _polys(rows, ctx.extended_moduli(ctx.L), domain)
    keys = {2 + i: (polys[2 * i], polys[2 * i + 1]) for i in range(len(polys) // 2)}
    return EvalKeySet(keys, ctx.K)


def dump_ciphertext(ct: CiphertextTuple) -> bytes:
    return _encode(CIPHER_MAGIC, ct.polys, ct.scale_exp)


def load_ciphertext(ctx: Context, data: bytes) -> CiphertextTuple:
    """The exact scale is not stored; it is left unknown on the loaded tuple."""
    rows, scale_exp, domain = _decode(data, CIPHER_MAGIC)
    _check_ring(rows, ctx)
    if not 1 <= rows.shape[1] <= ctx.L:
        raise FormatError(f"ciphertext level {rows.shape[1]} outside 1..{ctx.L}")
    try:
        return CiphertextTuple(_polys(rows, ctx.q_moduli[: rows.shape[1]], domain), scale_exp)
    except ValueError as e:
        raise FormatError(str(e)) from e


def write(path, data: bytes) -> None:
    Path(path).write_bytes(data)


def read(path) -> bytes:
    return Path(path).read_bytes()
