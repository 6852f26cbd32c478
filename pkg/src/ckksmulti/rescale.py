"""Rescaling: dropping the top modulus while dividing by it.

``rs_coeff`` and ``rs_ntt`` drop one modulus, ``rs_star`` works from the
coefficient domain and emits evaluation-domain output, and ``multi_rs``
drops ``mu`` moduli at once with the transform cost of a single rescaling.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .context import Context
from .counters import OpCounters
from .errors import DomainMismatch, LevelMismatch, LevelTooLow, MuOutOfRange
from .modarith import Modulus
from .ntt import Domain
from .poly import RnsPoly, vecmod


@lru_cache(maxsize=None)
def _top_inverses(moduli: tuple[Modulus, ...]) -> tuple[int, ...]:
    top = moduli[-1].value
    return tuple(pow(top % m.value, -1, m.value) for m in moduli[:-1])


def _lift_row(row: np.ndarray, moduli: tuple[Modulus, ...]) -> np.ndarray:
    """Reduce one residue row (canonical mod some other prime) into every modulus."""
    return row[None, :] % vecmod(moduli).q


def _check_level(p: RnsPoly, domain: Domain, what: str) -> None:
    if p.domain != domain:
        raise DomainMismatch(f"{what} expects {domain.name.lower()}-domain input")
    if p.level < 2:
        raise LevelTooLow(f"{what} needs at least two moduli, got {p.level}")


def rs_coeff(p: RnsPoly, counters: OpCounters | None = None) -> RnsPoly:
    """``[q_top^-1 (c_j - c_top)]_{q_j}`` for every remaining modulus."""
    _check_level(p, Domain.COEFFICIENT, "rs_coeff")
    low = p.rows(0, p.level - 1)
    top = RnsPoly(_lift_row(p.coeffs[-1], low.moduli), low.moduli, Domain.COEFFICIENT)
    return (low - top).scale_rows(_top_inverses(p.moduli), counters)


def rs_ntt(p: RnsPoly, counters: OpCounters | None = None) -> RnsPoly:
    """Single rescaling of an evaluation-domain polynomial: 1 INTT and l-1 NTTs."""
    _check_level(p, Domain.EVALUATION, "rs_ntt")
    low = p.rows(0, p.level - 1)
    top = p.rows(p.level - 1).intt(counters)
    top_low = RnsPoly(_lift_row(top.coeffs[0], low.moduli), low.moduli, Domain.COEFFICIENT).ntt(counters)
    return (low - top_low).scale_rows(_top_inverses(p.moduli), counters)


def rs_star(p: RnsPoly, counters: OpCounters | None = None) -> RnsPoly:
    """Coefficient-domain rescaling followed by the forward transform of the survivors."""
    _check_level(p, Domain.COEFFICIENT, "rs_star")
    return rs_coeff(p, counters).ntt(counters)


def _check_mu(p: RnsPoly, mu: int) -> None:
    if not 1 <= mu <= p.level - 1:
        raise MuOutOfRange(f"mu={mu} outside [1, {p.level - 1}]")


def multi_rs(ctx: Context, p: RnsPoly, mu: int, counters: OpCounters | None = None) -> RnsPoly:
    """Drop the top ``mu`` moduli in one pass.

    The top ``mu`` rows are brought to the coefficient domain and rescaled
    among themselves; each surviving row ``eta`` then receives
    ``g(mu, l-1) * A_eta - NTT(sum_t g(mu, t) * a_t)`` where ``g(u, t)`` is
    the inverse of ``q_{l-u} ... q_t`` modulo ``q_eta``.  The result is
    bit-identical to ``mu`` successive calls of :func:`rs_ntt`.
    """
    if p.domain != Domain.EVALUATION:
        raise DomainMismatch("multi_rs expects evaluation-domain input")
    _check_mu(p, mu)
    level = p.level
    if tuple(p.moduli) != ctx.q_moduli[:level]:
        raise LevelMismatch("polynomial rows are not a prefix of the context chain")
    keep = level - mu
    top = p.rows(keep).intt(counters)
    # a[t] holds row keep+t after every rescaling above it
    finals = [None] * mu
    block = top
    while True:
        finals[block.level - 1] = block.coeffs[-1]
        if block.level == 1:
            break
        block = rs_coeff(block, counters)

    low_mods = p.moduli[:keep]
    qs = vecmod(low_mods).q
    b = np.zeros((keep, p.ring_degree), dtype=np.uint64)
    lowp = RnsPoly(b, low_mods, Domain.COEFFICIENT)
    for i in range(mu):
        t = keep + i
        g = [ctx.g_at_level(level, eta, mu, t) for eta in range(keep)]
        term = RnsPoly(finals[i][None, :] % qs, low_mods, Domain.COEFFICIENT).scale_rows(g, counters)
        lowp = lowp + term
    B = lowp.ntt(counters)
    g_top = [ctx.g_at_level(level, eta, mu, level - 1) for eta in range(keep)]
    return p.rows(0, keep).scale_rows(g_top, counters) - B


def multi_rs_naive(p: RnsPoly, mu: int, counters: OpCounters | None = None) -> RnsPoly:
    """Reference combined rescaling: INTT everything, ``mu`` coefficient rescalings, NTT the rest."""
    if p.domain != Domain.EVALUATION:
        raise DomainMismatch("multi_rs_naive expects evaluation-domain input")
    _check_mu(p, mu)
    x = p.intt(counters)
    for _ in range(mu):
        x = rs_coeff(x, counters)
    return x.ntt(counters)


def rs_sequential(p: RnsPoly, mu: int, counters: OpCounters | None = None) -> RnsPoly:
    """``mu`` back-to-back evaluation-domain rescalings."""
    _check_mu(p, mu)
    for _ in range(mu):
        p = rs_ntt(p, counters)
    return p
