import itertools
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ckksmulti.errors import (
    DepthBudgetExceeded,
    ParseError,
    PlanArityMismatch,
    RefinementMismatch,
    SearchSpaceExhausted,
)
from ckksmulti.planner import (
    Linear,
    PlanNode,
    baseline_binary_plan,
    canonical,
    cost_of,
    depth_budget,
    depth_of,
    leaf,
    node,
    node_levels,
    optimize_partition,
    plan_from_string,
    to_string,
    validate,
)


def _int_partitions(n, max_part=None):
    max_part = n if max_part is None else max_part
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in _int_partitions(n - k, k):
            yield (k,) + rest


@lru_cache(maxsize=None)
def _all_plans(n):
    """Every plan tree over n inputs, built without the optimizer."""
    out = [leaf(n)]
    for parts in _int_partitions(n):
        if len(parts) < 2:
            continue
        for kids in itertools.product(*(_all_plans(p) for p in parts)):
            out.append(PlanNode(tuple(kids)))
    return tuple(out)


@pytest.mark.parametrize(
    "text",
    ["(1,1)", "(1,1,1)", "(2,2)", "(3,3)", "(4,3)|(2,2)", "(9,8)|(3,3,3),(4,4)", "(8,1)|(4,4)|(2,2),(2,2)"],
)
def test_round_trip(text):
    assert to_string(plan_from_string(text)) == text


def test_canonical_sorting():
    assert to_string(plan_from_string("(3,3,4)|(2,2)")) == "(4,3,3)|(2,2)"
    assert to_string(plan_from_string("(1,2)")) == "(2,1)"
    assert to_string(plan_from_string("(2)")) == "(1,1)"
    assert canonical(node(leaf(1), leaf(2))) == canonical(node(leaf(2), leaf(1)))


@pytest.mark.parametrize("text", ["", "()", "(2,", "(2,2)x", "(2,2),(1,1)", "(0,2)", "2,2", "(2,,2)"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        plan_from_string(text)


@pytest.mark.parametrize("text", ["(4,1)|(3,2)", "(2,2)|(1,1),(1,1),(1,1)", "(3,3)|(2,2),(2,1),(1,1)"])
def test_refinement_errors(text):
    with pytest.raises(RefinementMismatch):
        plan_from_string(text)


@pytest.mark.parametrize(
    "text,depth",
    [("(2,2,2)", 3), ("(5,1)|(3,2)", 4), ("(1,1,1,1)", 3), ("(2,2)", 2), ("(9,8)|(3,3,3),(4,4)", 5)],
)
def test_depth(text, depth):
    assert depth_of(plan_from_string(text)) == depth


@pytest.mark.parametrize("n,budget", [(2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (16, 4), (17, 5)])
def test_depth_budget(n, budget):
    assert depth_budget(n) == budget


@pytest.mark.parametrize(
    "text,units,expr",
    [
        ("(1,1)", "0+2", "0+2L"),
        ("(1,1,1)", "0+2", "0+2L"),
        ("(2,2)", "6+2", "6L+2(L-1)"),
        ("(3,3)", "8+2", "8L+2(L-2)"),
        ("(9,8)|(3,3,3),(4,4)", "41+2", "41L-47+2(L-4)"),
    ],
)
def test_cost_strings(text, units, expr):
    c = cost_of(plan_from_string(text))
    assert (c.units_str, c.expr_str) == (units, expr)


def test_cost_evaluates_like_its_expression():
    c = cost_of(plan_from_string("(9,8)|(3,3,3),(4,4)"))
    for L in (5, 10, 24, 40):
        assert c.at(L) == 41 * L - 47 + 2 * (L - 4)


def test_linear_formatting():
    assert str(Linear(0, 3)) == "3"
    assert str(Linear(1, 0)) == "L"
    assert str(Linear(2, -5)) == "2L-5"
    assert str(Linear(3, 4)) == "3L+4"
    assert (Linear(1, 2) + Linear(2, -1)).scale(2) == Linear(6, 2)


@pytest.mark.parametrize(
    "n,text",
    [(3, "(1,1,1)"), (4, "(2,2)"), (6, "(3,3)"), (9, "(3,3,3)"), (17, "(9,8)|(3,3,3),(4,4)")],
)
def test_optimizer_examples(n, text):
    plan, cost = optimize_partition(n)
    assert to_string(plan) == text
    assert cost == cost_of(plan)


@pytest.mark.parametrize(
    "n,text,units",
    [
        (5, "(4,1)|(2,2)", "11+2"),
        (9, "(8,1)|(4,4)|(2,2),(2,2)", "31+2"),
        (17, "(16,1)|(8,8)|(4,4),(4,4)|(2,2),(2,2),(2,2),(2,2)", "79+2"),
    ],
)
def test_baseline_examples(n, text, units):
    plan = baseline_binary_plan(n)
    assert to_string(plan) == text
    assert cost_of(plan).units_str == units
    assert depth_of(plan) == depth_budget(n)


@pytest.mark.parametrize("n", range(2, 9))
def test_optimizer_matches_exhaustive_search(n):
    budget = depth_budget(n)
    best = min(cost_of(p).at(24) for p in _all_plans(n) if p.depth <= budget)
    assert optimize_partition(n)[1].at(24) == best


@given(st.integers(2, 24))
def test_optimizer_within_budget_and_no_worse_than_baseline(n):
    plan, cost = optimize_partition(n)
    assert plan.n == n
    assert depth_of(plan) <= depth_budget(n)
    assert cost.at(24) <= cost_of(baseline_binary_plan(n)).at(24)


def test_optimizer_custom_budget():
    plan, _ = optimize_partition(6, 5)
    assert depth_of(plan) <= 5
    with pytest.raises(SearchSpaceExhausted):
        optimize_partition(8, 2)


@pytest.mark.parametrize("n", [0, 1, 25, 40])
def test_optimizer_bounds(n):
    with pytest.raises(SearchSpaceExhausted):
        optimize_partition(n)


def test_validate():
    validate(plan_from_string("(3,3)"), 6)
    with pytest.raises(PlanArityMismatch):
        validate(plan_from_string("(3,3)"), 5)
    with pytest.raises(DepthBudgetExceeded):
        validate(plan_from_string("(5,1)|(3,2)"), 6)
    validate(plan_from_string("(5,1)|(3,2)"), 6, 4)


def test_node_levels_end_at_budget():
    L = 24
    for n in range(2, 13):
        plan, _ = optimize_partition(n)
        levels = [(lv, root) for _, lv, root in node_levels(plan, L)]
        assert sum(root for _, root in levels) == 1
        # the root keeps one level for its final rescaling
        assert min(lv for lv, _ in levels) >= L - depth_budget(n) + 1
        assert max(lv for lv, _ in levels) <= L
