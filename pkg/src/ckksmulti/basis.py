"""Fast basis conversion and modulus switching between Q and the special modulus P.

All conversions use the approximate (overshooting) fast conversion: the
result represents the exact value plus ``alpha * Q_src`` with
``0 <= alpha < len(src)``.  Residues are canonical, so ``alpha`` is never
negative.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .context import Context, RnsBasis, conversion_tables
from .counters import OpCounters, bump
from .errors import DomainMismatch, LevelMismatch
from .modarith import VecMod, vadd, vmul
from .ntt import Domain
from .poly import RnsPoly, vecmod


def _require(x: RnsPoly, domain: Domain, what: str) -> None:
    if x.domain != domain:
        raise DomainMismatch(f"{what} expects {domain.name.lower()}-domain input")


def _combine(y: np.ndarray, mat: np.ndarray, dst: RnsBasis) -> np.ndarray:
    """out[i] = sum_j y[j] * mat[i, j] mod p_i."""
    k_dst, k_src = mat.shape
    out = np.empty((k_dst, y.shape[1]), dtype=np.uint64)
    for i, p in enumerate(dst.values):
        vm = VecMod([p], (1,))
        pv = np.uint64(p)
        acc = np.zeros(y.shape[1], dtype=np.uint64)
        for j in range(k_src):
            term = vmul(y[j] % pv, mat[i, j : j + 1], vm)
            acc = vadd(acc, term, vm)
        out[i] = acc
    return out


def _check_basis(x: RnsPoly, src: RnsBasis) -> None:
    if tuple(x.moduli) != tuple(src.moduli):
        raise LevelMismatch("input rows do not match the source basis")


def bconv(x: RnsPoly, src: RnsBasis, dst: RnsBasis, counters: OpCounters | None = None) -> RnsPoly:
    """Fast conversion of a coefficient-domain polynomial from ``src`` to ``dst``."""
    _require(x, Domain.COEFFICIENT, "bconv")
    _check_basis(x, src)
    qhat_inv, mat = conversion_tables(src, dst)
    y = vmul(x.coeffs, qhat_inv, vecmod(src.moduli))
    bump(counters, bconv=1, modmul=len(src) * (1 + len(dst)), modadd=(len(src) - 1) * len(dst))
    return RnsPoly(_combine(y, mat, dst), dst.moduli, Domain.COEFFICIENT)


@lru_cache(maxsize=None)
def _scaled_tables(src: RnsBasis, dst: RnsBasis):
    qhat_inv, _ = conversion_tables(src, dst)
    # [p_hat_i * P^-1]_{q_j} = [p_i^-1]_{q_j}
    mat = np.array([[pow(p % q, -1, q) for p in src.values] for q in dst.values], dtype=np.uint64)
    return qhat_inv, mat


def sc_bconv(x: RnsPoly, src: RnsBasis, dst: RnsBasis, counters: OpCounters | None = None) -> RnsPoly:
    """``P^-1 * bconv(x)`` with the scaling folded into the conversion matrix."""
    _require(x, Domain.COEFFICIENT, "sc_bconv")
    _check_basis(x, src)
    qhat_inv, mat = _scaled_tables(src, dst)
    y = vmul(x.coeffs, qhat_inv, vecmod(src.moduli))
    bump(counters, bconv=1, modmul=len(src) * (1 + len(dst)), modadd=(len(src) - 1) * len(dst))
    return RnsPoly(_combine(y, mat, dst), dst.moduli, Domain.COEFFICIENT)


def mod_up(ctx: Context, x: RnsPoly, counters: OpCounters | None = None) -> RnsPoly:
    """Extend an evaluation-domain polynomial over Q_l to the basis P + Q_l (P rows first)."""
    _require(x, Domain.EVALUATION, "mod_up")
    qb = ctx.level_basis(x.level)
    _check_basis(x, qb)
    coeff = x.intt(counters)
    ext = bconv(coeff, qb, ctx.p_basis, counters).ntt(counters)
    return RnsPoly.concat([ext, x])


def _split(ctx: Context, x: RnsPoly) -> tuple[RnsPoly, RnsPoly, RnsBasis]:
    _require(x, Domain.EVALUATION, "mod_down")
    K = ctx.K
    level = x.level - K
    if level < 1 or tuple(x.moduli[:K]) != ctx.p_moduli:
        raise LevelMismatch("input is not over the extended basis P + Q_l")
    qb = ctx.level_basis(level)
    if tuple(x.moduli[K:]) != qb.moduli:
        raise LevelMismatch("Q rows of the input do not form a prefix of the chain")
    return x.rows(0, K), x.rows(K), qb


def mod_down(
    ctx: Context,
    x: RnsPoly,
    output_domain: Domain = Domain.EVALUATION,
    counters: OpCounters | None = None,
) -> RnsPoly:
    """Divide by P and drop back to Q_l: ``P^-1 (x_Q - BConv(x_P))``."""
    xp, xq, qb = _split(ctx, x)
    conv = bconv(xp.intt(counters), ctx.p_basis, qb, counters)
    if output_domain == Domain.EVALUATION:
        diff = xq - conv.ntt(counters)
    else:
        diff = xq.intt(counters) - conv
    return diff.scale_rows(ctx.p_inv_mod_q[: len(qb)], counters)


def mod_down_fused(
    ctx: Context,
    x: RnsPoly,
    addend: RnsPoly,
    counters: OpCounters | None = None,
    prescaled: bool = False,
) -> RnsPoly:
    """``INTT(addend) + mod_down(x)`` in the coefficient domain with a single INTT over Q.

    The addend joins before the inverse transform and ``P^-1`` is folded into
    the conversion constants.  With ``prescaled`` the Q rows of ``x`` are taken
    to already carry the ``P^-1`` factor (keys multiplied ahead of time).
    """
    xp, xq, qb = _split(ctx, x)
    _require(addend, Domain.EVALUATION, "mod_down_fused addend")
    if addend.moduli != xq.moduli:
        raise LevelMismatch("addend level differs from the Q part of x")
    if not prescaled:
        xq = xq.scale_rows(ctx.p_inv_mod_q[: len(qb)], counters)
    top = (addend + xq).intt(counters)
    bump(counters, modadd=len(qb))
    return top - sc_bconv(xp.intt(counters), ctx.p_basis, qb, counters)
