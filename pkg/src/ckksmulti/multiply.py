"""Tuple products, relinearization and tree-driven n-input multiplication."""
from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Sequence

from .basis import mod_down, mod_down_fused, mod_up
from .context import Context
from .counters import OpCounters, bump
from .errors import (
    DepthBudgetExceeded,
    DomainMismatch,
    EmptyOperands,
    LevelMismatch,
    LevelTooLow,
    MissingEvalKey,
    ParameterError,
    PlanArityMismatch,
)
from .keys import CiphertextTuple, EvalKeySet
from .ntt import Domain
from .planner import PlanNode, baseline_binary_plan, depth_budget, root_pm_offset
from .poly import RnsPoly
from .rescale import multi_rs, rs_coeff, rs_ntt, rs_star


class RelinMode(str, enum.Enum):
    CLASSIC = "classic"
    FUSED = "fused"
    IMPROVED = "improved"


def _check_operands(cts: Sequence[CiphertextTuple]) -> None:
    if not cts:
        raise EmptyOperands("nothing to multiply")
    first = cts[0]
    for ct in cts:
        if ct.domain != Domain.EVALUATION:
            raise DomainMismatch("tuple products are taken in the evaluation domain")
        if ct.moduli != first.moduli:
            raise LevelMismatch("operands are at different levels")


def _scale_product(cts: Sequence[CiphertextTuple]):
    if any(ct.scale is None for ct in cts):
        return None
    return math.prod((ct.scale for ct in cts), start=Fraction(1))


def pm_2(a: CiphertextTuple, b: CiphertextTuple, counters: OpCounters | None = None) -> CiphertextTuple:
    """Product of two 2-tuples with three ring products (Karatsuba middle term)."""
    _check_operands([a, b])
    if a.size != 2 or b.size != 2:
        raise ParameterError("pm_2 multiplies two 2-polynomial ciphertexts")
    a0, a1 = a.polys
    b0, b1 = b.polys
    d0 = a0 * b0
    d2 = a1 * b1
    d1 = (a0 + a1) * (b0 + b1) - d0 - d2
    bump(counters, modmul=3 * a.level, modadd=4 * a.level)
    return CiphertextTuple([d0, d1, d2], a.scale_exp + b.scale_exp, _scale_product([a, b]))


def pm_3(a: CiphertextTuple, b: CiphertextTuple, c: CiphertextTuple, counters: OpCounters | None = None) -> CiphertextTuple:
    """Product of three 2-tuples, returning (d0, d1, d2, d3)."""
    _check_operands([a, b, c])
    if a.size != 2 or b.size != 2 or c.size != 2:
        raise ParameterError("pm_3 multiplies three 2-polynomial ciphertexts")
    a0, a1 = a.polys
    b0, b1 = b.polys
    c0, c1 = c.polys
    x00, x11 = a0 * b0, a1 * b1
    x01 = a0 * b1 + a1 * b0
    d0 = x00 * c0
    d1 = x00 * c1 + x01 * c0
    d2 = x01 * c1 + x11 * c0
    d3 = x11 * c1
    bump(counters, modmul=10 * a.level, modadd=3 * a.level)
    return CiphertextTuple([d0, d1, d2, d3], a.scale_exp + b.scale_exp + c.scale_exp, _scale_product([a, b, c]))


def _convolve(x: list[RnsPoly], y: list[RnsPoly], counters) -> list[RnsPoly]:
    out: list[RnsPoly | None] = [None] * (len(x) + len(y) - 1)
    for i, xi in enumerate(x):
        for j, yj in enumerate(y):
            term = xi * yj
            out[i + j] = term if out[i + j] is None else out[i + j] + term
    rows = x[0].level
    bump(counters, modmul=len(x) * len(y) * rows, modadd=(len(x) * len(y) - len(out)) * rows)
    return out


def pm_tuple(operands: Sequence[CiphertextTuple], counters: OpCounters | None = None) -> CiphertextTuple:
    """Product of any number of tuples by iterated convolution in powers of s."""
    operands = list(operands)
    _check_operands(operands)
    if len(operands) == 1:
        return operands[0]
    if len(operands) == 2 and operands[0].size == operands[1].size == 2:
        return pm_2(operands[0], operands[1], counters)
    acc = list(operands[0].polys)
    for ct in operands[1:]:
        acc = _convolve(acc, list(ct.polys), counters)
    return CiphertextTuple(acc, sum(ct.scale_exp for ct in operands), _scale_product(operands))


def relinearize(
    ctx: Context,
    ct: CiphertextTuple,
    eks: EvalKeySet,
    mode: RelinMode | str = RelinMode.IMPROVED,
    counters: OpCounters | None = None,
) -> CiphertextTuple:
    """Reduce a tuple to two polynomials with the evaluation keys ek_2 .. ek_{T-1}.

    ``classic`` switches every d_t separately, ``fused`` accumulates all key
    products over P + Q before two ModDowns, and ``improved`` additionally folds
    d_0, d_1 and the P^-1 factor into the ModDown, returning coefficient-domain
    polynomials.  Prescaled keys are only meaningful for ``improved``.
    """
    mode = RelinMode(mode)
    if ct.domain != Domain.EVALUATION:
        raise DomainMismatch("relinearization expects evaluation-domain input")
    if ct.size == 2:
        return ct
    for t in range(2, ct.size):
        if t not in eks.keys:
            raise MissingEvalKey(t)
    if eks.prescaled and mode != RelinMode.IMPROVED:
        raise ParameterError("prescaled keys require the improved relinearization")
    level = ct.level
    d0, d1 = ct.polys[:2]

    if mode == RelinMode.CLASSIC:
        out0, out1 = d0, d1
        for t in range(2, ct.size):
            up = mod_up(ctx, ct.polys[t], counters)
            k0, k1 = eks.get(t, level)
            out0 = out0 + mod_down(ctx, up * k0, Domain.EVALUATION, counters)
            out1 = out1 + mod_down(ctx, up * k1, Domain.EVALUATION, counters)
            bump(counters, modmul=2 * up.level, modadd=2 * level)
        return ct.replace([out0, out1])

    acc0 = acc1 = None
    for t in range(2, ct.size):
        up = mod_up(ctx, ct.polys[t], counters)
        k0, k1 = eks.get(t, level)
        p0, p1 = up * k0, up * k1
        acc0 = p0 if acc0 is None else acc0 + p0
        acc1 = p1 if acc1 is None else acc1 + p1
        bump(counters, modmul=2 * up.level, modadd=(2 * up.level) if t > 2 else 0)
    if mode == RelinMode.FUSED:
        out0 = d0 + mod_down(ctx, acc0, Domain.EVALUATION, counters)
        out1 = d1 + mod_down(ctx, acc1, Domain.EVALUATION, counters)
        bump(counters, modadd=2 * level)
        return ct.replace([out0, out1])
    out0 = mod_down_fused(ctx, acc0, d0, counters, prescaled=eks.prescaled)
    out1 = mod_down_fused(ctx, acc1, d1, counters, prescaled=eks.prescaled)
    return ct.replace([out0, out1])


def level_align(ct: CiphertextTuple, target_level: int) -> CiphertextTuple:
    """Drop residue rows above ``target_level``; the encrypted value is unchanged mod Q_target."""
    if target_level < 1 or target_level > ct.level:
        raise LevelTooLow(f"cannot align level {ct.level} to {target_level}")
    if target_level == ct.level:
        return ct
    return ct.replace([p.drop_to(target_level) for p in ct.polys])


def _dropped_product(moduli, count: int) -> int:
    return math.prod(m.value for m in moduli[len(moduli) - count :])


def _rescaled(ct: CiphertextTuple, polys, mu: int) -> CiphertextTuple:
    scale = None if ct.scale is None else ct.scale / _dropped_product(ct.moduli, mu)
    return CiphertextTuple(list(polys), ct.scale_exp - mu, scale)


def rescale(ctx: Context, ct: CiphertextTuple, mu: int = 1, counters: OpCounters | None = None) -> CiphertextTuple:
    """Drop ``mu`` levels from every polynomial of an evaluation-domain tuple."""
    if ct.domain != Domain.EVALUATION:
        raise DomainMismatch("rescale expects evaluation-domain input")
    if mu < 1:
        return ct
    if mu == 1:
        polys = [rs_ntt(p, counters) for p in ct.polys]
    else:
        polys = [multi_rs(ctx, p, mu, counters) for p in ct.polys]
    return _rescaled(ct, polys, mu)


def rescale_coeff_chain(ct: CiphertextTuple, mu: int, counters: OpCounters | None = None) -> CiphertextTuple:
    """``mu`` rescalings of a coefficient-domain tuple: ``mu - 1`` rs steps then RS*."""
    if ct.domain != Domain.COEFFICIENT:
        raise DomainMismatch("coefficient rescaling chain expects coefficient-domain input")
    if mu < 1:
        return ct.to_domain(Domain.EVALUATION, counters)
    polys = list(ct.polys)
    for _ in range(mu - 1):
        polys = [rs_coeff(p, counters) for p in polys]
    polys = [rs_star(p, counters) for p in polys]
    return _rescaled(ct, polys, mu)


def mult3_improved(
    ctx: Context,
    ct1: CiphertextTuple,
    ct2: CiphertextTuple,
    ct3: CiphertextTuple,
    eks: EvalKeySet,
    counters: OpCounters | None = None,
) -> CiphertextTuple:
    """Three-input product: PM, improved relinearization, rs, then RS*."""
    _check_operands([ct1, ct2, ct3])
    if ct1.level < 3:
        raise LevelTooLow("three-input multiplication needs level >= 3")
    d = pm_3(ct1, ct2, ct3, counters)
    r = relinearize(ctx, d, eks, RelinMode.IMPROVED, counters)
    return rescale_coeff_chain(r, d.scale_exp - 1, counters)


def _counted(step, counters, rs_counters):
    """Run ``step(sub)`` with a scratch counter charged to both accumulators."""
    if counters is None and rs_counters is None:
        return step(None)
    sub = OpCounters()
    out = step(sub)
    for acc in (counters, rs_counters):
        if acc is not None:
            acc.absorb(sub)
    return out


def _finish_root(ctx, tup: CiphertextTuple, eks, relin_mode, counters, rs_counters) -> CiphertextTuple:
    mu = tup.scale_exp - 1
    r = relinearize(ctx, tup, eks, relin_mode, counters)
    if r.domain == Domain.COEFFICIENT:
        return _counted(lambda c: rescale_coeff_chain(r, mu, c), counters, rs_counters)
    return _counted(lambda c: rescale(ctx, r, mu, c), counters, rs_counters)


def leaf_order(plan: PlanNode) -> list[PlanNode]:
    """Leaf groups in the order inputs are consumed (depth first, siblings as stored)."""
    if plan.is_leaf:
        return [plan]
    out = []
    for c in plan.children:
        out.extend(leaf_order(c))
    return out


def mult_n(
    ctx: Context,
    plan: PlanNode,
    cts: Sequence[CiphertextTuple],
    eks: EvalKeySet,
    counters: OpCounters | None = None,
    rs_counters: OpCounters | None = None,
    relin_mode: RelinMode | str = RelinMode.IMPROVED,
    budget: int | None = None,
) -> CiphertextTuple:
    """Multiply ``len(cts)`` ciphertexts following a partition tree.

    Inputs are consumed by the leaf groups in depth-first order.  Every
    non-root node multiplies its operands at its own level (raw operands are
    aligned down to it) and rescales by ``fanin - 1`` levels; the root
    relinearizes and then rescales its two polynomials.  ``rs_counters`` only
    collects the transforms spent in rescaling.
    """
    cts = list(cts)
    if plan.n != len(cts):
        raise PlanArityMismatch(f"plan expects {plan.n} ciphertexts, got {len(cts)}")
    budget = depth_budget(len(cts)) if budget is None else budget
    if plan.depth > budget:
        raise DepthBudgetExceeded(f"plan depth {plan.depth} exceeds the budget {budget}")
    _check_operands(cts)
    start = cts[0].level
    if plan.depth > start - 1:
        raise DepthBudgetExceeded(f"plan depth {plan.depth} needs more than the {start} available levels")
    if any(ct.size != 2 for ct in cts):
        raise ParameterError("inputs must be relinearized 2-polynomial ciphertexts")
    for t in range(2, plan.n + 1):
        if t not in eks.keys:
            raise MissingEvalKey(t)
    feed = iter(cts)

    def run(p: PlanNode, out_level: int) -> CiphertextTuple:
        pm_level = out_level + p.mu
        if p.is_leaf:
            group = [level_align(next(feed), pm_level) for _ in range(p.group)]
            if p.group == 1:
                return group[0]
            prod = pm_tuple(group, counters)
        else:
            prod = pm_tuple([run(c, pm_level) for c in p.children], counters)
        return _counted(lambda c: rescale(ctx, prod, p.mu, c), counters, rs_counters)

    root_level = start - root_pm_offset(plan)
    if plan.is_leaf:
        operands = [level_align(next(feed), root_level) for _ in range(plan.group)]
    else:
        operands = [run(c, root_level) for c in plan.children]
    prod = pm_tuple(operands, counters)
    return _finish_root(ctx, prod, eks, relin_mode, counters, rs_counters)


def mult_binary_tree(
    ctx: Context,
    cts: Sequence[CiphertextTuple],
    eks: EvalKeySet,
    counters: OpCounters | None = None,
    relin_mode: RelinMode | str = RelinMode.CLASSIC,
) -> CiphertextTuple:
    """Reference n-input product from two-input multipliers (PM, relinearize, rescale at every node)."""
    cts = list(cts)
    if len(cts) < 2:
        raise EmptyOperands("need at least two ciphertexts")
    plan = baseline_binary_plan(len(cts))
    feed = iter(cts)

    def two(a: CiphertextTuple, b: CiphertextTuple) -> CiphertextTuple:
        lvl = min(a.level, b.level)
        prod = pm_2(level_align(a, lvl), level_align(b, lvl), counters)
        r = relinearize(ctx, prod, eks, relin_mode, counters)
        if r.domain == Domain.COEFFICIENT:
            return rescale_coeff_chain(r, 1, counters)
        return rescale(ctx, r, 1, counters)

    def run(p: PlanNode) -> CiphertextTuple:
        if p.is_leaf:
            group = [next(feed) for _ in range(p.group)]
            return group[0] if p.group == 1 else two(*group)
        a, b = (run(c) for c in p.children)
        return two(a, b)

    return run(plan)
