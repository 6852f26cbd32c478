"""Partition trees for n-input ciphertext multiplication.

A tree node either groups ``g`` raw ciphertexts (a leaf) or multiplies the
outputs of its children.  Ciphertext tuples are never relinearized below the
root, so any subtree over ``n`` inputs produces an ``(n+1)``-polynomial tuple.
Every non-root node with ``m`` factors (``m = g`` for a leaf, ``m = #children``
otherwise) is followed by a combined rescaling of ``mu = m - 1`` levels; the
root relinearizes first and then rescales its two output polynomials.

Cost accounting: a combined rescaling of a ``T``-polynomial tuple sitting at
level ``l`` counts as ``T`` units and ``T * l`` (I)NTTs.  Operands are aligned
down to the level at which their parent multiplies them, so a subtree whose
depth is smaller than its siblings' also rescales at a lower level.

Plan strings use layers separated by ``|``.  The first layer lists the root's
children.  Each tuple of a later layer refines, in order, the largest
still-unrefined group created in the layer before it.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    DepthBudgetExceeded,
    ParseError,
    PlanArityMismatch,
    RefinementMismatch,
    SearchSpaceExhausted,
)

REFERENCE_L = 24


@dataclass(frozen=True, order=True)
class Linear:
    """``coef * L + const``."""

    coef: int = 0
    const: int = 0

    def __add__(self, other: "Linear") -> "Linear":
        return Linear(self.coef + other.coef, self.const + other.const)

    def scale(self, k: int) -> "Linear":
        return Linear(self.coef * k, self.const * k)

    def at(self, L: int) -> int:
        return self.coef * L + self.const

    def __str__(self) -> str:
        if self.coef == 0:
            return str(self.const)
        head = "L" if self.coef == 1 else f"{self.coef}L"
        if self.const == 0:
            return head
        return f"{head}{'+' if self.const > 0 else '-'}{abs(self.const)}"


def level_expr(k: int) -> Linear:
    """The level ``L - k``."""
    return Linear(1, -k)


@dataclass(frozen=True)
class PlanNode:
    children: tuple["PlanNode", ...] = ()
    group: int = 0

    def __post_init__(self):
        if self.children:
            if len(self.children) < 2:
                raise ParseError("an internal node needs at least two children")
        elif self.group < 1:
            raise ParseError("a leaf group holds at least one ciphertext")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def n(self) -> int:
        return self.group if self.is_leaf else sum(c.n for c in self.children)

    @property
    def fanin(self) -> int:
        """Number of factors multiplied at this node."""
        return self.group if self.is_leaf else len(self.children)

    @property
    def mu(self) -> int:
        return self.fanin - 1

    @property
    def tuple_size(self) -> int:
        return self.n + 1

    @property
    def depth(self) -> int:
        """Levels consumed below and at this node (the root's includes its final rescaling)."""
        if self.is_leaf:
            return self.group - 1
        return max(c.depth for c in self.children) + len(self.children) - 1

    @property
    def leaf_count(self) -> int:
        return self.n

    def sort_key(self):
        return (self.n, not self.is_leaf, _layers_string(self, root=False))

    def __str__(self) -> str:
        return to_string(self)


def leaf(g: int) -> PlanNode:
    return PlanNode(group=g)


def node(*children: PlanNode) -> PlanNode:
    return canonical(PlanNode(tuple(children)))


def canonical(p: PlanNode) -> PlanNode:
    """Sort siblings descending and collapse refinements into raw singletons."""
    if p.is_leaf:
        return p
    kids = [canonical(c) for c in p.children]
    if all(c.is_leaf and c.group == 1 for c in kids):
        return PlanNode(group=len(kids))
    kids.sort(key=PlanNode.sort_key, reverse=True)
    return PlanNode(tuple(kids))


def _layers(p: PlanNode) -> list[list[tuple[int, ...]]]:
    layers = []
    frontier = [p]
    while frontier:
        layer, nxt = [], []
        for g in frontier:
            if g.is_leaf:
                continue
            layer.append(tuple(c.n for c in g.children))
            nxt.extend(g.children)
        if layer:
            layers.append(layer)
        frontier = sorted(nxt, key=PlanNode.sort_key, reverse=True)
    return layers


def _layers_string(p: PlanNode, root: bool = True) -> str:
    if p.is_leaf:
        return "(" + ",".join(["1"] * p.group) + ")" if root else str(p.group)
    parts = []
    for layer in _layers(p):
        parts.append(",".join("(" + ",".join(str(x) for x in t) + ")" for t in layer))
    return "|".join(parts)


def to_string(p: PlanNode) -> str:
    """Canonical plan string; a root that multiplies raw ciphertexts reads ``(1,...,1)``."""
    return _layers_string(canonical(p), root=True)


_TUPLE = re.compile(r"\(\s*\d+\s*(?:,\s*\d+\s*)*\)")


def _parse_layer(text: str) -> list[tuple[int, ...]]:
    text = text.strip()
    tuples = []
    pos = 0
    while pos < len(text):
        m = _TUPLE.match(text, pos)
        if not m:
            raise ParseError(f"malformed layer {text!r}")
        tuples.append(tuple(int(x) for x in m.group(0)[1:-1].split(",")))
        pos = m.end()
        rest = text[pos:].lstrip()
        if rest.startswith(","):
            pos = len(text) - len(rest) + 1
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                raise ParseError(f"trailing comma in layer {text!r}")
        elif rest:
            raise ParseError(f"unexpected text {rest!r} in layer {text!r}")
        else:
            pos = len(text)
    if not tuples:
        raise ParseError("empty layer")
    return tuples


def plan_from_string(s: str) -> PlanNode:
    """Parse the layered notation, e.g. ``"(4,3)|(2,2)"`` or ``"(6,6)|(3,3),(3,3)"``."""
    if not isinstance(s, str) or not s.strip():
        raise ParseError("empty plan string")
    layers = [_parse_layer(part) for part in s.split("|")]
    first = layers[0]
    if len(first) != 1:
        raise ParseError("the first layer must be a single tuple")
    if any(x < 1 for t in (t for layer in layers for t in layer) for x in t):
        raise ParseError("group sizes must be positive")

    # mutable tree: each entry is [size, children-or-None]
    root_kids = [[x, None] for x in first[0]]
    root = [sum(first[0]), root_kids]
    previous = root_kids
    for layer in layers[1:]:
        order = sorted(range(len(previous)), key=lambda i: -previous[i][0])
        if len(layer) > len(order):
            raise RefinementMismatch("more refinements than groups in the previous layer")
        created = []
        for t, idx in zip(layer, order):
            target = previous[idx]
            if sum(t) != target[0]:
                raise RefinementMismatch(f"{t} does not refine a group of {target[0]}")
            target[1] = [[x, None] for x in t]
            created.extend(target[1])
        previous = created

    def build(entry) -> PlanNode:
        size, kids = entry
        if kids is None or len(kids) == 1:
            return PlanNode(group=size)
        return PlanNode(tuple(build(k) for k in kids))

    if len(root_kids) == 1:
        # "(n)" names a single group multiplied at the root
        only = root_kids[0]
        return canonical(build(only) if only[1] else PlanNode(group=only[0]))
    return canonical(build(root))


def depth_of(plan: PlanNode) -> int:
    return plan.depth


def depth_budget(n: int) -> int:
    return math.ceil(math.log2(n)) if n > 1 else 0


@dataclass(frozen=True)
class PlanCost:
    rs_units: int
    rs_singles: int
    intt_ntt: Linear
    final_units: int
    final_level: Linear

    @property
    def final_expr(self) -> Linear:
        return self.final_level.scale(self.final_units)

    @property
    def total(self) -> Linear:
        return self.intt_ntt + self.final_expr

    def at(self, L: int) -> int:
        return self.total.at(L)

    @property
    def units_str(self) -> str:
        return f"{self.rs_units}+{self.final_units}"

    @property
    def expr_str(self) -> str:
        lvl = self.final_level
        tail = f"{self.final_units}L" if lvl == Linear(1, 0) else f"{self.final_units}({lvl})"
        return f"{self.intt_ntt}+{tail}"

    def __str__(self) -> str:
        return f"{self.units_str} ({self.expr_str})"


def _subtree_cost(p: PlanNode, out_k: int) -> tuple[int, int, Linear]:
    """(units, singles, (I)NTTs) of a non-root subtree whose output sits at level L - out_k."""
    pm_k = out_k - p.mu  # level at which this node multiplies, as L - pm_k
    if p.is_leaf:
        if p.group == 1:
            return 0, 0, Linear()
        t = p.tuple_size
        return t, t * p.mu, level_expr(pm_k).scale(t)
    units = p.tuple_size
    singles = p.tuple_size * p.mu
    cost = level_expr(pm_k).scale(p.tuple_size)
    for c in p.children:
        u, s, e = _subtree_cost(c, pm_k)
        units, singles, cost = units + u, singles + s, cost + e
    return units, singles, cost


def root_pm_offset(plan: PlanNode) -> int:
    """``k`` such that the root multiplies at level ``L - k``."""
    return 0 if plan.is_leaf else max(c.depth for c in plan.children)


def cost_of(plan: PlanNode) -> PlanCost:
    k = root_pm_offset(plan)
    units = singles = 0
    cost = Linear()
    if not plan.is_leaf:
        for c in plan.children:
            u, s, e = _subtree_cost(c, k)
            units, singles, cost = units + u, singles + s, cost + e
    return PlanCost(units, singles, cost, 2, level_expr(k))


def node_levels(plan: PlanNode, L: int):
    """Yield ``(node, pm_level, is_root)`` for every multiplying node at concrete ``L``."""
    k = root_pm_offset(plan)

    def walk(p: PlanNode, out_level: int):
        pm = out_level + p.mu
        if p.is_leaf:
            if p.group > 1:
                yield p, pm, False
            return
        yield p, pm, False
        for c in p.children:
            yield from walk(c, pm)

    yield plan, L - k, True
    if not plan.is_leaf:
        for c in plan.children:
            yield from walk(c, L - k)


def validate(plan: PlanNode, n: int, budget: int | None = None) -> None:
    if plan.n != n:
        raise PlanArityMismatch(f"plan covers {plan.n} inputs, {n} given")
    budget = depth_budget(n) if budget is None else budget
    if plan.depth > budget:
        raise DepthBudgetExceeded(f"plan depth {plan.depth} exceeds the budget {budget}")


# -- search -----------------------------------------------------------------


def _partitions(n: int, max_part: int, parts: int):
    """Non-increasing compositions of n into exactly ``parts`` parts."""
    if parts == 1:
        if 1 <= n <= max_part:
            yield (n,)
        return
    for first in range(min(n - parts + 1, max_part), 0, -1):
        for rest in _partitions(n - first, first, parts - 1):
            yield (first,) + rest


def _rank(cost: Linear, units: int, text: str):
    return (cost.at(REFERENCE_L), units, text)


@lru_cache(maxsize=None)
def _best_exact(n: int, d: int, k: int):
    """Cheapest non-root subtree over n inputs with depth exactly d, output at level L - k.

    Returns ``(rank, tree, units, cost)`` or None.
    """
    best = None
    if d == n - 1:
        g = leaf(n)
        u, _, c = _subtree_cost(g, k)
        best = (_rank(c, u, _layers_string(g, root=False)), g, u, c)
    for m in range(2, min(n, d + 1) + 1):
        child_d = d - (m - 1)
        pm_k = k - (m - 1)
        own = level_expr(pm_k).scale(n + 1)
        for parts in _partitions(n, n - m + 1, m):
            cand = _combine_children(parts, child_d, pm_k)
            if cand is None:
                continue
            kids, units, cost = cand
            tree = canonical(PlanNode(tuple(kids)))
            units += n + 1
            cost = cost + own
            item = (_rank(cost, units, _layers_string(tree, root=False)), tree, units, cost)
            if best is None or item[0] < best[0]:
                best = item
    return best


@lru_cache(maxsize=None)
def _best_upto(n: int, d: int, k: int):
    best = None
    for e in range(0, d + 1):
        item = _best_exact(n, e, k)
        if item is not None and (best is None or item[0] < best[0]):
            best = item
    return best


def _combine_children(parts, child_d: int, k: int):
    """Best children for ``parts`` where the deepest child has depth exactly ``child_d``."""
    best = None
    seen = set()
    for i, size in enumerate(parts):
        if size in seen:
            continue
        seen.add(size)
        exact = _best_exact(size, child_d, k)
        if exact is None:
            continue
        items = [exact]
        ok = True
        for j, other in enumerate(parts):
            if j == i:
                continue
            item = _best_upto(other, child_d, k)
            if item is None:
                ok = False
                break
            items.append(item)
        if not ok:
            continue
        units = sum(it[2] for it in items)
        cost = Linear()
        for it in items:
            cost = cost + it[3]
        tree = canonical(PlanNode(tuple(it[1] for it in items)))
        rank = _rank(cost, units, _layers_string(tree, root=False))
        if best is None or rank < best[0]:
            best = (rank, [it[1] for it in items], units, cost)
    if best is None:
        return None
    return best[1], best[2], best[3]


def optimize_partition(n: int, depth_budget_: int | None = None) -> tuple[PlanNode, PlanCost]:
    """Cheapest plan for n inputs within the depth budget.

    Minimizes the (I)NTT count at L = 24, then the number of rescaling units,
    then the canonical plan string.
    """
    if not 2 <= n <= 24:
        raise SearchSpaceExhausted(f"search is bounded to 2 <= n <= 24, got {n}")
    budget = depth_budget(n) if depth_budget_ is None else depth_budget_
    candidates = []
    if n - 1 <= budget:
        candidates.append(leaf(n))
    for m in range(2, n + 1):
        for k in range(0, budget - (m - 1) + 1):
            for parts in _partitions(n, n - m + 1, m):
                cand = _combine_children(parts, k, k)
                if cand is not None:
                    candidates.append(canonical(PlanNode(tuple(cand[0]))))
    if not candidates:
        raise SearchSpaceExhausted(f"no plan for n={n} within depth {budget}")

    def key(p: PlanNode):
        c = cost_of(p)
        return (c.at(REFERENCE_L), c.rs_units, to_string(p))

    best = min(candidates, key=key)
    return best, cost_of(best)


def baseline_binary_plan(n: int) -> PlanNode:
    """Binary tree of two-input products: split off the largest power of two below n."""
    if n < 2:
        raise PlanArityMismatch("need at least two inputs")

    def build(k: int) -> PlanNode:
        if k <= 2:
            return leaf(k)
        big = 1 << ((k - 1).bit_length() - 1)
        return PlanNode((build(big), build(k - big)))

    return canonical(build(n))
