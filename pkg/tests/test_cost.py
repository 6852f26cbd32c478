import csv
import io
import json

import pytest

from ckksmulti.cost import (
    TWO_INPUT_LATENCY,
    GateModel,
    baseline_latency,
    block_cost,
    eval_key_bits,
    input_buffer_bits,
    mult3_cost,
    multi_rs_cost,
    plan_cost_report,
    proposed_latency,
)
from ckksmulti.errors import PlanArityMismatch
from ckksmulti.planner import optimize_partition, plan_from_string

N, L, K = 2**16, 24, 24
MIB = 2**20


def test_transform_blocks():
    ntt = block_cost("NTT", N, L, K)
    intt = block_cost("INTT", N, L, K)
    assert (ntt.modmul, ntt.modadd, ntt.memory_words, ntt.pipeline) == (16, 32, 131070, 32847)
    assert intt.modadd == 2 * ntt.modadd
    assert intt.modmul == ntt.modmul and intt.pipeline == ntt.pipeline


def test_bconv_block():
    b = block_cost("BConv", N, 1, 1)
    assert b.modadd == 0 and b.modmul == 4
    b = block_cost("BConv", N, 3, 2)
    assert (b.modmul, b.modadd, b.memory_words) == (6 + 12, 8, 3 + 6)


def test_gate_model():
    gm = GateModel()
    assert gm.adder(64) == 288
    assert gm.comparator(64) == gm.adder(64)
    assert gm.multiplier(2) == 9
    assert gm.modadder(8) == 2 * 36 + 36 + 8


@pytest.mark.parametrize(
    "variant,ntt,intt,modmul,latency",
    [("improved", 92, 144, 948, 131426), ("prior", 186, 148, 1044, 262822)],
)
def test_mult3_counts(variant, ntt, intt, modmul, latency):
    r = mult3_cost(L, K, N, variant)
    assert (r.counts.ntt, r.counts.intt, r.counts.modmul, r.counts.bconv) == (ntt, intt, modmul, 4)
    assert r.latency_clks == latency


def test_mult3_improved_is_cheaper():
    prior, improved = mult3_cost(L, K, N, "prior"), mult3_cost(L, K, N, "improved")
    assert improved.area_xor < prior.area_xor
    assert improved.memory_bytes < prior.memory_bytes
    assert round(prior.memory_bytes / MIB) == 502 and round(improved.memory_bytes / MIB) == 404


def test_memory_parts():
    assert eval_key_bits(L, K, N, 64) // 8 == 100_663_296 == 96 * MIB
    assert input_buffer_bits(L, N, 64) // 8 == 72 * MIB
    r = mult3_cost(L, K, N)
    assert r.memory_parts["eval_keys"] == 96 * MIB
    assert r.memory_parts["inputs"] == 72 * MIB
    assert sum(r.memory_parts.values()) == r.memory_bytes


@pytest.mark.parametrize("mu", range(1, L))
def test_multi_rs_counts(mu):
    c = multi_rs_cost(mu, L)
    assert (c.ntt, c.intt) == (L - mu, mu)
    # one INTT per dropped prime then fresh NTTs for the survivors
    direct = sum(L - j for j in range(mu)) + (L - mu)
    assert c.const_mul == direct - mu
    naive = multi_rs_cost(mu, L, proposed=False)
    assert naive.intt == L and naive.ntt == L - mu
    assert c.ntt + c.intt <= naive.ntt + naive.intt


def test_multi_rs_examples():
    c = multi_rs_cost(2, 24)
    assert (c.intt, c.const_mul) == (2, 67)
    assert multi_rs_cost(23, 24).ntt == 1
    with pytest.raises(ValueError):
        multi_rs_cost(0, 24)
    with pytest.raises(ValueError):
        multi_rs_cost(24, 24)


def test_latencies():
    assert proposed_latency(plan_from_string("(1,1,1)"), N) == 131426
    assert proposed_latency(plan_from_string("(2,2)"), N) == 197134
    assert proposed_latency(plan_from_string("(9,8)|(3,3,3),(4,4)"), N) == 262842
    assert baseline_latency(9) == 4 * TWO_INPUT_LATENCY


@pytest.mark.parametrize(
    "n,ratio",
    [(3, 0.5), (4, 0.75), (5, 0.5), (6, 0.5), (7, 2 / 3), (8, 2 / 3), (9, 0.375), (10, 0.5), (12, 0.5)],
)
def test_latency_ratio(n, ratio):
    plan, _ = optimize_partition(n)
    got = plan_cost_report(n, plan, L, K, N).latency_clks / plan_cost_report(n, None, L, K, N).latency_clks
    assert got == pytest.approx(ratio, abs=1e-3)


def test_three_input_plan_agrees_with_mult3():
    p = plan_cost_report(3, plan_from_string("(1,1,1)"), L, K, N)
    m = mult3_cost(L, K, N)
    assert p.counts.ntt + p.counts.intt == m.counts.ntt + m.counts.intt
    assert p.latency_clks == m.latency_clks


def test_report_breakdown_sums():
    plan, _ = optimize_partition(9)
    r = plan_cost_report(9, plan, L, K, N)
    assert set(r.breakdown) == {"PM+RS", "root"}
    assert sum(s.ntt for s in r.breakdown.values()) == r.counts.ntt
    assert sum(s.intt for s in r.breakdown.values()) == r.counts.intt
    assert sum(s.latency for s in r.breakdown.values()) == r.latency_clks


def test_render_formats():
    r = mult3_cost(L, K, N)
    data = json.loads(r.render("json"))
    assert data["counts"]["ntt"] == 92 and data["latency_clks"] == 131426
    rows = list(csv.reader(io.StringIO(r.render("csv"))))
    assert rows[0] == ["stage", "ntt", "intt", "bconv", "modmul", "latency"]
    assert ["total", "92", "144", "4", "948", "131426"] in rows
    table = r.render("table")
    assert "total" in table and "memory (bytes)" in table


def test_plan_arity_checked():
    with pytest.raises(PlanArityMismatch):
        plan_cost_report(5, plan_from_string("(3,3)"), L, K, N)
