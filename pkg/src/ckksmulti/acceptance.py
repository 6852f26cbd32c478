"""Acceptance checks, one function per criterion.

Each check returns an :class:`Outcome` with a pass flag and a short
human-readable detail line.  ``run_all`` executes them in order and the
``bench`` command and the acceptance test module print the results.
"""
from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .context import Context, build_context
from .cost import mult3_cost, multi_rs_cost, plan_cost_report
from .counters import OpCounters
from .keys import CiphertextTuple, encrypt, keygen, keygen_eval, sample_uniform
from .multiply import mult3_improved, mult_binary_tree, mult_n, pm_tuple
from .ntt import Domain
from .oracle import crt_reconstruct, exact_ring_product, noise_measure, subset_sum_tuple
from .planner import (
    baseline_binary_plan,
    canonical,
    cost_of,
    depth_budget,
    optimize_partition,
    plan_from_string,
    to_string,
)
from .poly import RnsPoly
from .rescale import multi_rs, multi_rs_naive, rs_ntt


@dataclass
class Outcome:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    flagged: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" [flagged: {'; '.join(self.flagged)}]" if self.flagged else ""
        return f"{status} {self.key} {self.title}: {self.detail}{extra} ({self.seconds:.1f}s)"


# Published partition table: n -> (binary partition, units, (I)NTT expression,
#                                   optimized partition, units, (I)NTT expression)
PARTITION_TABLE = {
    3: ("(2,1)", "3+2", "3L+2L", "(1,1,1)", "0+2", "0+2L"),
    4: ("(2,2)", "6+2", "6L+2(L-1)", "(2,2)", "6+2", "6L+2(L-1)"),
    5: ("(4,1)|(2,2)", "11+2", "11L-5+2(L-2)", "(2,2,1)", "6+2", "6L+2(L-1)"),
    6: ("(4,2)|(2,2)", "14+2", "14L-8+2(L-2)", "(3,3)", "8+2", "8L+2(L-2)"),
    7: ("(4,3)|(2,2),(2,1)", "18+2", "18L-9+2(L-2)", "(4,3)|(2,2)", "15+2", "15L-5+2(L-2)"),
    8: ("(4,4)|(2,2),(2,2)", "22+2", "22L-10+2(L-2)", "(4,4)|(2,2),(2,2)", "22+2", "22L-10+2(L-2)"),
    9: ("(8,1)|(4,4)|(2,2),(2,2)", "31+2", "31L-28+2(L-3)", "(3,3,3)", "12+2", "12L+2(L-2)"),
    10: ("(8,2)|(4,4)|(2,2),(2,2)", "34+2", "34L-32+2(L-3)", "(3,3,4)|(2,2)", "19+2", "19L-5+2(L-2)"),
    11: ("(8,3)|(4,4),(2,1)|(2,2),(2,2)", "38+2", "38L-39+2(L-3)", "(4,4,3)|(2,2),(2,2)", "26+2", "26L-14+2(L-2)"),
    12: ("(8,4)|(4,4),(2,2)|(2,2),(2,2)", "42+2", "42L-44+2(L-3)", "(6,6)|(3,3),(3,3)", "30+2", "30L-24+2(L-2)"),
}

# the n = 3 binary-tree cell counts its final rescaling at level L although
# the root of a depth-2 tree sits at L-1; that single cell is reported, not failed
KNOWN_CELL_ISSUES = {(3, "baseline", "expr")}


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        out.seconds = time.perf_counter() - t0
        return out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@lru_cache(maxsize=None)
def desk_context(N: int = 1024, L: int = 8, K: int = 8) -> Context:
    return build_context(N, L, K, w_q=50, delta_log2=50, h=min(64, N // 2), seed=1)


@lru_cache(maxsize=None)
def _desk_keys(N: int, L: int, K: int, max_t: int):
    ctx = desk_context(N, L, K)
    sk, pk = keygen(ctx, seed=11)
    return sk, pk, keygen_eval(ctx, sk, max_t, seed=12)


def _random_eval_poly(ctx: Context, level: int, rng) -> RnsPoly:
    mods = ctx.q_moduli[:level]
    return RnsPoly(sample_uniform(rng, mods, ctx.N), mods, Domain.EVALUATION)


@_timed
def check_multi_rs_exact(ring_degrees=(32, 64, 1024), levels=range(3, 9), samples: int = 50, seed: int = 0) -> Outcome:
    """Combined rescaling equals mu sequential rescalings bit for bit."""
    rng = np.random.default_rng(seed)
    cases = bad = 0
    for N in ring_degrees:
        ctx = desk_context(N, max(levels), max(levels))
        for level in levels:
            for _ in range(samples):
                # one input serves every mu; the sequential chain is extended one step at a time
                p = _random_eval_poly(ctx, level, rng)
                seq = p
                for mu in range(1, level):
                    seq = rs_ntt(seq)
                    cases += 1
                    if multi_rs(ctx, p, mu) != seq:
                        bad += 1
    return Outcome("C1", "multi-rescaling exactness", bad == 0, f"{cases - bad}/{cases} bit-identical")


def _norm(s: str) -> str:
    return s.replace(" ", "")


@_timed
def check_partition_table(ns=range(3, 13)) -> Outcome:
    """Optimizer and binary baseline against the published partition table."""
    mismatches, flagged = [], []
    for n in ns:
        b_part, b_units, b_expr, p_part, p_units, p_expr = PARTITION_TABLE[n]
        base = baseline_binary_plan(n)
        plan, cost = optimize_partition(n)
        bc = cost_of(base)
        cells = [
            ("baseline", "partition", canonical(base) == canonical(plan_from_string(b_part)), to_string(base), b_part),
            ("baseline", "units", bc.units_str == b_units, bc.units_str, b_units),
            ("baseline", "expr", _norm(bc.expr_str) == _norm(b_expr), bc.expr_str, b_expr),
            ("proposed", "partition", canonical(plan) == canonical(plan_from_string(p_part)), to_string(plan), p_part),
            ("proposed", "units", cost.units_str == p_units, cost.units_str, p_units),
            ("proposed", "expr", _norm(cost.expr_str) == _norm(p_expr), cost.expr_str, p_expr),
        ]
        for column, what, ok, got, want in cells:
            if ok:
                continue
            note = f"n={n} {column} {what}: got {got}, table {want}"
            (flagged if (n, column, what) in KNOWN_CELL_ISSUES else mismatches).append(note)
    total = len(list(ns)) * 6
    detail = f"{total - len(mismatches) - len(flagged)}/{total} cells match"
    if mismatches:
        detail += "; mismatches: " + "; ".join(mismatches)
    return Outcome("C2", "partition table", not mismatches, detail, flagged=flagged)


@_timed
def check_seventeen_inputs() -> Outcome:
    """17 inputs: 79 binary-tree units against 41 optimized units."""
    plan, cost = optimize_partition(17)
    base = cost_of(baseline_binary_plan(17))
    pct = round(100 * (cost.rs_units + cost.final_units) / (base.rs_units + base.final_units))
    ok = cost.rs_units == 41 and base.rs_units == 79 and pct == 53
    detail = f"optimized {to_string(plan)} {cost.units_str}, binary {base.units_str}, ratio {pct}%"
    return Outcome("C3", "17-input plan", ok, detail)


def _mult3_formulas(L: int, K: int, N: int) -> dict:
    lg = int(math.log2(N))
    return {
        "prior": (6 * L + 2 * K - 6, 4 * L + 2 * K + 4, 4, 36 * L + 8 * K - 12, 4 * N + 38 + 40 * lg),
        "improved": (2 * L + 2 * K - 4, 4 * L + 2 * K, 4, 32 * L + 8 * K - 12, 2 * N + 34 + 20 * lg),
    }


def fresh_ciphertexts(ctx, pk, count, rng, nonzeros=2, seed0=100):
    msgs, cts = [], []
    for i in range(count):
        m = np.zeros(ctx.N, dtype=np.int64)
        idx = rng.choice(ctx.N, size=nonzeros, replace=False)
        m[idx] = rng.choice([-1, 1], size=nonzeros)
        msgs.append(m)
        cts.append(encrypt(ctx, pk, m, seed=seed0 + i))
    return msgs, cts


@_timed
def check_three_input_costs(sizes=((4, 4), (8, 8)), N_exec: int = 1024) -> Outcome:
    """Three-input multiplier counts and latency, closed form and instrumented."""
    bad = []
    for L in range(2, 25):
        for K in range(L, 25):
            for N in (1 << 10, 1 << 16):
                want = _mult3_formulas(L, K, N)
                for variant in ("prior", "improved"):
                    r = mult3_cost(L, K, N, variant)
                    got = (r.counts.ntt, r.counts.intt, r.counts.bconv, r.counts.modmul, r.latency_clks)
                    if got != want[variant]:
                        bad.append(f"{variant} L={L} K={K} N={N}: {got} vs {want[variant]}")
    rng = np.random.default_rng(5)
    runs = []
    for L, K in sizes:
        ctx = desk_context(N_exec, L, K)
        sk, pk, eks = _desk_keys(N_exec, L, K, 3)
        _, cts = fresh_ciphertexts(ctx, pk, 3, rng)
        c = OpCounters()
        mult3_improved(ctx, *cts, eks, counters=c)
        want = _mult3_formulas(L, K, N_exec)["improved"][:2]
        runs.append(f"L=K={L}: NTT {c.ntt}, INTT {c.intt}")
        if (c.ntt, c.intt) != want:
            bad.append(f"instrumented L={L} K={K}: {(c.ntt, c.intt)} vs {want}")
    detail = "closed form matches for 2<=L<=K<=24; " + ", ".join(runs)
    if bad:
        detail = f"{len(bad)} mismatches: " + "; ".join(bad[:5])
    return Outcome("C4", "three-input multiplier formulas", not bad, detail)


@_timed
def check_multi_rs_costs(max_L: int = 24, exec_levels=range(2, 9), N_exec: int = 32) -> Outcome:
    """Combined-rescaling cost rows, closed form and instrumented."""
    bad = []
    for L in range(2, max_L + 1):
        for mu in range(1, L):
            want_p = (L - mu, mu, (mu + 1) * L - mu * (mu + 3) // 2)
            want_b = (L - mu, L, mu * L - mu * (mu + 1) // 2)
            p, b = multi_rs_cost(mu, L, True), multi_rs_cost(mu, L, False)
            if (p.ntt, p.intt, p.const_mul) != want_p or (b.ntt, b.intt, b.const_mul) != want_b:
                bad.append(f"L={L} mu={mu}")
    ctx = desk_context(N_exec, max(exec_levels), max(exec_levels))
    rng = np.random.default_rng(9)
    for level in exec_levels:
        for mu in range(1, level):
            p = _random_eval_poly(ctx, level, rng)
            cp, cb = OpCounters(), OpCounters()
            multi_rs(ctx, p, mu, cp)
            multi_rs_naive(p, mu, cb)
            wp, wb = multi_rs_cost(mu, level, True), multi_rs_cost(mu, level, False)
            if (cp.ntt, cp.intt, cp.const_mul) != (wp.ntt, wp.intt, wp.const_mul) or (cb.ntt, cb.intt) != (wb.ntt, wb.intt):
                bad.append(f"instrumented level={level} mu={mu}")
    detail = "all rows match" if not bad else f"{len(bad)} mismatches: " + ", ".join(bad[:5])
    return Outcome("C5", "combined-rescaling formulas", not bad, detail)


def _expected_product(msgs, N: int):
    return exact_ring_product([list(map(int, m)) for m in msgs])


@_timed
def check_homomorphism(ns=range(3, 13), trials: int = 20, N: int = 1024, L: int = 8, seed: int = 3) -> Outcome:
    """n-input products through the optimized plans decrypt to Delta * prod(m)."""
    ctx = desk_context(N, L, L)
    sk, pk, eks = _desk_keys(N, L, L, max(ns))
    rng = np.random.default_rng(seed)
    worst, bad = 0, []
    for n in ns:
        plan, _ = optimize_partition(n)
        want_level = L - depth_budget(n)
        for trial in range(trials):
            msgs, cts = fresh_ciphertexts(ctx, pk, n, rng, seed0=1000 * n + 50 * trial)
            out = mult_n(ctx, plan, cts, eks)
            expected = [ctx.delta * v for v in _expected_product(msgs, N)]
            err = noise_measure(ctx, sk, out, expected)
            bound = out.moduli[-1].value // 4
            worst = max(worst, err)
            if out.level != want_level or err >= bound:
                bad.append(f"n={n} trial={trial} level={out.level} err=2^{math.log2(max(err, 1)):.1f}")
    detail = f"{len(list(ns)) * trials} products, worst error 2^{math.log2(max(worst, 1)):.1f} (< q_top/4 ~ 2^48)"
    if bad:
        detail += "; failures: " + "; ".join(bad[:5])
    return Outcome("C6", "end-to-end homomorphism", not bad, detail)


def _tracked_noise(ctx, sk, ct, msgs) -> int:
    prod = _expected_product(msgs, ctx.N)
    expected = [round(ct.scale * v) for v in prod]
    return noise_measure(ctx, sk, ct, expected)


def noise_pairs(n: int, trials: int, N: int = 1024, L: int = 8, seed: int = 7):
    """(optimized, binary tree) noise against the exactly tracked scale, per trial."""
    ctx = desk_context(N, L, L)
    sk, pk, eks = _desk_keys(N, L, L, 12)
    plan, _ = optimize_partition(n)
    rng = np.random.default_rng(seed + n)
    out = []
    for trial in range(trials):
        msgs, cts = fresh_ciphertexts(ctx, pk, n, rng, seed0=5000 + 50 * trial)
        a = _tracked_noise(ctx, sk, mult_n(ctx, plan, cts, eks), msgs)
        b = _tracked_noise(ctx, sk, mult_binary_tree(ctx, cts, eks), msgs)
        out.append((a, b))
    return out


@_timed
def check_noise_ordering(ns=(3, 6, 9), trials: int = 100) -> Outcome:
    """Mean noise of the optimized plan should not exceed the binary tree's."""
    parts, ok = [], True
    for n in ns:
        pairs = noise_pairs(n, trials)
        prop = statistics.fmean(a for a, _ in pairs)
        base = statistics.fmean(b for _, b in pairs)
        ratio = prop / base
        wins = sum(a <= b for a, b in pairs)
        med = statistics.median(a / b for a, b in pairs)
        ok &= ratio <= 1.0
        parts.append(
            f"n={n}: mean {prop:.0f} vs {base:.0f} (ratio {ratio:.2f}, median pair ratio {med:.2f}, "
            f"optimized quieter in {wins}/{trials})"
        )
    return Outcome("C7", "noise ordering", ok, "; ".join(parts))


@_timed
def check_memory(L: int = 24, K: int = 24, N: int = 1 << 16, w: int = 64) -> Outcome:
    """Key, input-buffer and per-transform memory at the reference parameters."""
    keys_bits = 2 * 2 * (L + K) * N * w
    buf_bits = 3 * 2 * L * N * w
    per_bits = (2 * N - 2) * w
    proposed = plan_cost_report(3, optimize_partition(3)[0], L, K, N, w)
    prior, improved = mult3_cost(L, K, N, "prior", w), mult3_cost(L, K, N, "improved", w)
    bad = []
    for name, rep in (("optimized", proposed), ("prior", prior), ("improved", improved)):
        parts = rep.memory_parts
        transforms = rep.counts.ntt + rep.counts.intt
        if parts["eval_keys"] * 8 != keys_bits or parts["inputs"] * 8 != buf_bits:
            bad.append(f"{name} key/buffer bits")
        if parts["transforms"] * 8 != transforms * per_bits:
            bad.append(f"{name} transform bits")
    detail = (
        f"keys {keys_bits} bits ({keys_bits // 8 / 2**20:.0f} MiB), buffer {buf_bits} bits "
        f"({buf_bits // 8 / 2**20:.0f} MiB), per (I)NTT {per_bits} bits; three-input totals "
        f"{prior.memory_bytes / 2**20:.0f} vs {improved.memory_bytes / 2**20:.0f} MiB"
    )
    if bad:
        detail += "; mismatches: " + ", ".join(bad)
    return Outcome("C8", "memory formulas", not bad, detail)


def _random_tuple(ctx, level, rng) -> CiphertextTuple:
    mods = ctx.q_moduli[:level]
    polys = [RnsPoly(sample_uniform(rng, mods, ctx.N), mods, Domain.COEFFICIENT).ntt() for _ in range(2)]
    return CiphertextTuple(polys, 1, Fraction(1))


@_timed
def check_oracle_equivalence(instances: int = 1000, subset_instances: int = 100, N: int = 32, level: int = 3,
                             seed: int = 13) -> Outcome:
    """Transform-domain tuple products against exact big-integer products."""
    ctx = desk_context(N, 8, 8)
    Q = math.prod(m.value for m in ctx.q_moduli[:level])
    rng = np.random.default_rng(seed)
    bad = 0
    for i in range(instances):
        n = 1 + i % 5
        ops = [_random_tuple(ctx, level, rng) for _ in range(n)]
        d = pm_tuple(ops)
        ints = [[crt_reconstruct(p.intt()) for p in ct.polys] for ct in ops]
        got = crt_reconstruct(d.polys[0].intt())
        if got != exact_ring_product([c[0] for c in ints], Q):
            bad += 1
            continue
        if i < subset_instances:
            ref = subset_sum_tuple([(c[0], c[1]) for c in ints], Q)
            if [crt_reconstruct(p.intt()) for p in d.polys] != ref:
                bad += 1
    ok = bad == 0
    detail = f"{instances} tuple products, {subset_instances} full subset-sum checks, {bad} mismatches"
    return Outcome("C9", "oracle equivalence", ok, detail)


CHECKS = [
    check_multi_rs_exact,
    check_partition_table,
    check_seventeen_inputs,
    check_three_input_costs,
    check_multi_rs_costs,
    check_homomorphism,
    check_noise_ordering,
    check_memory,
    check_oracle_equivalence,
]


def run_all(checks=CHECKS, echo=None) -> list[Outcome]:
    out = []
    for check in checks:
        res = check()
        if echo:
            echo(res.line())
        out.append(res)
    return out
