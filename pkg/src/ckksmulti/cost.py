"""Architectural cost estimates: operation counts, clock-cycle latency, gate area, memory.

The estimators model a fully pipelined 2-parallel hardware design in which
every (I)NTT operation of the dataflow gets its own (I)NTT unit.  Areas are
given in XOR-gate equivalents and memory in bytes.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, field

from .counters import OpCounters
from .planner import PlanNode, depth_budget, node_levels

# clock cycles of one two-input multiplier, calibrated from a published four-input baseline
TWO_INPUT_LATENCY = 131415


class Block(str, enum.Enum):
    NTT = "NTT"
    INTT = "INTT"
    BCONV = "BConv"


class Variant(str, enum.Enum):
    PRIOR = "prior"
    IMPROVED = "improved"


@dataclass(frozen=True)
class GateModel:
    fa_xor: float = 4.5
    mux_xor: float = 1.0
    membit_xor: float = 1.0
    register_xor: float = 3.0

    def adder(self, w: int) -> float:
        return w * self.fa_xor

    def comparator(self, w: int) -> float:
        # magnitude comparison as a w-bit subtraction
        return self.adder(w)

    def mux(self, w: int) -> float:
        return w * self.mux_xor

    def multiplier(self, w: int) -> float:
        return w * (w - 1) * self.fa_xor

    def modadder(self, w: int) -> float:
        return 2 * self.adder(w) + self.comparator(w) + self.mux(w)

    def barrett_modmul(self, w: int) -> float:
        return 3 * self.multiplier(w) + 3 * self.modadder(w) + self.mux(w)

    def register(self, w: int) -> float:
        return w * self.register_xor

    def memory(self, bits: int) -> float:
        return bits * self.membit_xor


@dataclass(frozen=True)
class BlockCost:
    modmul: int
    modadd: int
    memory_words: int
    registers: int
    pipeline: int
    muxes: int = 0

    def logic_area(self, w: int, gm: GateModel = GateModel()) -> float:
        return (
            self.modmul * gm.barrett_modmul(w)
            + self.modadd * gm.modadder(w)
            + self.muxes * gm.mux(w)
            + self.registers * gm.register(w)
        )

    def memory_bits(self, w: int) -> int:
        return self.memory_words * w


def block_cost(block: Block | str, N: int, L: int, K: int, w: int = 64) -> BlockCost:
    """Resources of one 2-parallel NTT, INTT or (sc)BConv unit."""
    block = Block(block)
    logn = int(math.log2(N))
    if block == Block.NTT:
        return BlockCost(logn, 2 * logn, 2 * N - 2, 10 * logn, N // 2 - 1 + 5 * logn)
    if block == Block.INTT:
        return BlockCost(logn, 4 * logn, 2 * N - 2, 10 * logn, N // 2 - 1 + 5 * logn, muxes=2 * logn)
    return BlockCost(2 * L + 2 * L * K, 2 * K * (L - 1), L + L * K, 6 * L + K + 6 * L * K, 7)


@dataclass
class StageCost:
    ntt: int = 0
    intt: int = 0
    bconv: int = 0
    modmul: int = 0
    latency: int = 0


@dataclass
class CostReport:
    counts: OpCounters
    latency_clks: int
    area_xor: int
    memory_bytes: int
    breakdown: dict = field(default_factory=dict)
    logic_area_xor: int = 0
    memory_parts: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "counts": self.counts.as_dict(),
            "latency_clks": self.latency_clks,
            "area_xor": self.area_xor,
            "logic_area_xor": self.logic_area_xor,
            "memory_bytes": self.memory_bytes,
            "memory_parts": dict(self.memory_parts),
            "breakdown": {k: asdict(v) if isinstance(v, StageCost) else v for k, v in self.breakdown.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def _rows(self):
        rows = [("stage", "ntt", "intt", "bconv", "modmul", "latency")]
        for name, st in self.breakdown.items():
            rows.append((name, st.ntt, st.intt, st.bconv, st.modmul, st.latency))
        c = self.counts
        rows.append(("total", c.ntt, c.intt, c.bconv, c.modmul, self.latency_clks))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerows(self._rows())
        w.writerow([])
        w.writerow(["area_xor", self.area_xor])
        w.writerow(["logic_area_xor", self.logic_area_xor])
        w.writerow(["memory_bytes", self.memory_bytes])
        return buf.getvalue()

    def to_table(self) -> str:
        rows = [tuple(str(x) for x in r) for r in self._rows()]
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(cell.rjust(wd) for cell, wd in zip(r, widths)) for r in rows]
        lines.insert(1, "  ".join("-" * wd for wd in widths))
        lines.append("")
        lines.append(f"area (XOR eq.)   {self.area_xor}")
        lines.append(f"logic area       {self.logic_area_xor}")
        lines.append(f"memory (bytes)   {self.memory_bytes}")
        return "\n".join(lines)

    def render(self, fmt: str = "table") -> str:
        return {"json": self.to_json, "csv": self.to_csv, "table": self.to_table}[fmt]()


# -- memory -----------------------------------------------------------------


def eval_key_bits(L: int, K: int, N: int, w: int, keys: int = 2) -> int:
    """Each key is two polynomials over L + K residues."""
    return keys * 2 * (L + K) * N * w


def input_buffer_bits(L: int, N: int, w: int, cts: int = 3) -> int:
    return cts * 2 * L * N * w


def transform_memory_bits(N: int, w: int) -> int:
    return (2 * N - 2) * w


def _memory(ntt_units: int, keys: int, cts: int, L: int, K: int, N: int, w: int) -> dict:
    parts = {
        "eval_keys": eval_key_bits(L, K, N, w, keys) // 8,
        "inputs": input_buffer_bits(L, N, w, cts) // 8,
        "transforms": ntt_units * transform_memory_bits(N, w) // 8,
    }
    return parts


def _area(counts: OpCounters, L: int, K: int, N: int, w: int, extra_modmul: int, gm: GateModel):
    ntt = block_cost(Block.NTT, N, L, K, w)
    intt = block_cost(Block.INTT, N, L, K, w)
    bc = block_cost(Block.BCONV, N, L, K, w)
    logic = (
        counts.ntt * ntt.logic_area(w, gm)
        + counts.intt * intt.logic_area(w, gm)
        + counts.bconv * bc.logic_area(w, gm)
        + extra_modmul * gm.barrett_modmul(w)
    )
    mem_bits = counts.bconv * bc.memory_bits(w)
    return logic, mem_bits


# -- three-input multiplier -------------------------------------------------


def _mult3_stages(L: int, K: int, N: int, variant: Variant) -> dict:
    logn = int(math.log2(N))
    pm = StageCost(0, 0, 0, 16 * L, 8)
    if variant == Variant.PRIOR:
        relin = StageCost(2 * L + 2 * K, 4 * L + 2 * K, 4, 12 * L + 8 * K, 2 * N + 22 + 20 * logn)
        rs = StageCost(4 * L - 6, 4, 0, 8 * L - 12, 2 * N + 8 + 20 * logn)
    else:
        relin = StageCost(2 * K, 4 * L + 2 * K, 4, 8 * L + 8 * K, 3 * N // 2 + 18 + 15 * logn)
        rs = StageCost(2 * L - 4, 0, 0, 8 * L - 12, N // 2 + 8 + 5 * logn)
    return {"PM": pm, "Relin": relin, "RS": rs}


def mult3_cost(L: int, K: int, N: int, variant: Variant | str = Variant.IMPROVED, w: int = 64,
               gm: GateModel = GateModel()) -> CostReport:
    """Counts, latency, area and memory of a three-input ciphertext multiplier."""
    variant = Variant(variant)
    stages = _mult3_stages(L, K, N, variant)
    counts = OpCounters(
        ntt=sum(s.ntt for s in stages.values()),
        intt=sum(s.intt for s in stages.values()),
        bconv=sum(s.bconv for s in stages.values()),
        modmul=sum(s.modmul for s in stages.values()),
    )
    latency = sum(s.latency for s in stages.values())
    parts = _memory(counts.ntt + counts.intt, 2, 3, L, K, N, w)
    logic, bconv_bits = _area(counts, L, K, N, w, stages["PM"].modmul, gm)
    mem_bytes = sum(parts.values())
    area = logic + gm.memory(8 * mem_bytes + bconv_bits)
    return CostReport(counts, latency, round(area), mem_bytes, stages, round(logic), parts)


def multi_rs_cost(mu: int, L: int, proposed: bool = True) -> OpCounters:
    """(I)NTT and constant-multiplication counts of ``mu`` rescalings at level L."""
    if not 1 <= mu < L:
        raise ValueError(f"mu={mu} outside [1, {L - 1}]")
    if proposed:
        return OpCounters(ntt=L - mu, intt=mu, const_mul=(mu + 1) * L - mu * (mu + 3) // 2)
    return OpCounters(ntt=L - mu, intt=L, const_mul=mu * L - mu * (mu + 1) // 2)


# -- n-input multipliers ----------------------------------------------------


def _critical_stages(plan: PlanNode) -> int:
    """Non-root multiply-and-rescale stages on the longest root-to-leaf chain."""

    def chain(p: PlanNode) -> int:
        if p.is_leaf:
            return 1 if p.group > 1 else 0
        return 1 + max(chain(c) for c in p.children)

    return 0 if plan.is_leaf else max(chain(c) for c in plan.children)


def _latency_parts(N: int) -> tuple[int, int]:
    logn = int(math.log2(N))
    transform = N // 2 - 1 + 5 * logn
    stage = 8 + 2 * transform + 6
    root = 8 + (3 * N // 2 + 18 + 15 * logn) + (N // 2 + 8 + 5 * logn)
    return stage, root


def proposed_latency(plan: PlanNode, N: int) -> int:
    """Critical path: PM + combined rescale per stage, then PM, improved relinearization and RS*."""
    stage, root = _latency_parts(N)
    return _critical_stages(plan) * stage + root


def baseline_latency(n: int) -> int:
    return depth_budget(n) * TWO_INPUT_LATENCY


def plan_counts(plan: PlanNode, L: int, K: int) -> tuple[OpCounters, OpCounters]:
    """(I)NTT/BConv counts of the proposed dataflow at full level L: (intermediate, root)."""
    mid, top = OpCounters(), OpCounters()
    for node, level, is_root in node_levels(plan, L):
        T = node.tuple_size
        if is_root:
            keys = T - 2
            top.intt += keys * level + 2 * (K + level)
            top.ntt += keys * K + 2 * (level - node.mu)
            top.bconv += 2 * keys + 2
            top.modmul += 2 * keys * (K + level)
        else:
            mid.intt += T * node.mu
            mid.ntt += T * (level - node.mu)
            mid.const_mul += T * ((node.mu + 1) * level - node.mu * (node.mu + 3) // 2)
    return mid, top


def binary_counts(n: int, L: int, K: int) -> OpCounters:
    """Counts for n-1 two-input multipliers (classic relinearization, NTT-domain rescale) at level L."""
    per = OpCounters(ntt=K + 2 * L + 2 * (L - 1), intt=L + 2 * K + 2, bconv=3, modmul=0)
    total = OpCounters()
    for _ in range(n - 1):
        total.absorb(per)
    return total


def plan_cost_report(n: int, plan: PlanNode | None, L: int, K: int, N: int, w: int = 64,
                     gm: GateModel = GateModel()) -> CostReport:
    """Cost of an n-input multiplier; ``plan=None`` reports the binary tree of two-input multipliers."""
    from .planner import validate

    if plan is None:
        counts = binary_counts(n, L, K)
        latency = baseline_latency(n)
        parts = _memory(counts.ntt + counts.intt, n - 1, n, L, K, N, w)
        breakdown = {"binary": StageCost(counts.ntt, counts.intt, counts.bconv, counts.modmul, latency)}
    else:
        validate(plan, n, budget=max(plan.depth, depth_budget(n)))
        mid, top = plan_counts(plan, L, K)
        counts = mid + top
        stage, root = _latency_parts(N)
        latency = proposed_latency(plan, N)
        parts = _memory(counts.ntt + counts.intt, plan.n - 1, n, L, K, N, w)
        breakdown = {
            "PM+RS": StageCost(mid.ntt, mid.intt, 0, 0, latency - root),
            "root": StageCost(top.ntt, top.intt, top.bconv, top.modmul, root),
        }
    logic, bconv_bits = _area(counts, L, K, N, w, 0, gm)
    mem_bytes = sum(parts.values())
    area = logic + gm.memory(8 * mem_bytes + bconv_bits)
    return CostReport(counts, latency, round(area), mem_bytes, breakdown, round(logic), parts)
