import math
from fractions import Fraction

import numpy as np
import pytest

from umskel import (ArgumentError, CapacityError, CoveringSubmeasure, MeasureVec,
                    SubmeasureContractError, WeightedSpace, covering_submeasure,
                    equilateral_space, path_space, submeasure_to_measure)
from umskel.metric import closed_ball
from umskel.submeasures import (check_submeasure_axioms,
                                cover_cost_branch_and_bound, quantize_cost)
from umskel.tree import TreeNode, UltrametricTree, leaf

from conftest import (random_metric, random_probability, random_submeasure_table,
                      random_ultrametric_tree)


def uniform_ws(space):
    return WeightedSpace(space, MeasureVec.uniform(space.n))


def test_empty_set_costs_nothing():
    ws = uniform_ws(path_space(4))
    assert covering_submeasure(ws, 0.5, 1.0, []) == 0.0


def test_singleton_on_uniform():
    for n in (2, 5, 9):
        ws = uniform_ws(equilateral_space(n))
        for eps in (0.25, 0.5, 0.75):
            got = covering_submeasure(ws, eps, 1.0, [0])
            assert got == pytest.approx((1.0 / n) ** (1.0 - eps), abs=1e-9)


def test_path_pair_single_ball():
    ws = uniform_ws(path_space(4))
    assert covering_submeasure(ws, 0.5, 1.0, [0, 1]) == \
        pytest.approx(math.sqrt(0.5), abs=1e-9)


def test_param_validation():
    ws = uniform_ws(path_space(3))
    for eps in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ArgumentError):
            covering_submeasure(ws, eps, 1.0, [0])
    with pytest.raises(ArgumentError):
        covering_submeasure(ws, 0.5, 0.5, [0])


def test_capacity_error_mentions_greedy():
    ws = uniform_ws(path_space(6))
    oracle = CoveringSubmeasure(ws, 0.5, 1.0, cap=4)
    with pytest.raises(CapacityError, match="greedy"):
        oracle.value(range(6))
    assert oracle.greedy_value(range(6)) >= 0.0


def test_greedy_upper_bounds_exact():
    rng = np.random.default_rng(40)
    for _ in range(10):
        n = int(rng.integers(3, 9))
        space = random_metric(rng, n)
        ws = WeightedSpace(space, MeasureVec(random_probability(rng, n)))
        oracle = CoveringSubmeasure(ws, 0.5, 1.0)
        mask = int(rng.integers(1, 1 << n))
        pts = [i for i in range(n) if (mask >> i) & 1]
        assert oracle.greedy_value(pts) >= oracle.value(pts) - 1e-12


def test_env_cap_override(monkeypatch):
    ws = uniform_ws(path_space(6))
    monkeypatch.setenv("UMSKEL_EXACT_CAP", "4")
    oracle = CoveringSubmeasure(ws, 0.5, 1.0)
    with pytest.raises(CapacityError):
        oracle.value(range(6))
    monkeypatch.setenv("UMSKEL_EXACT_CAP", "16")
    assert CoveringSubmeasure(ws, 0.5, 1.0).value(range(6)) > 0.0


def test_dp_equals_branch_and_bound():
    rng = np.random.default_rng(41)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        space = random_metric(rng, n)
        ws = WeightedSpace(space, MeasureVec(random_probability(rng, n)))
        eps = float(rng.uniform(0.2, 0.8))
        oracle = CoveringSubmeasure(ws, eps, 1.0)
        for _ in range(3):
            mask = int(rng.integers(1, 1 << n))
            pts = [i for i in range(n) if (mask >> i) & 1]
            assert oracle.value(pts) == cover_cost_branch_and_bound(ws, eps, 1.0, pts)
        assert oracle.value(range(n)) == \
            cover_cost_branch_and_bound(ws, eps, 1.0, range(n))


def test_axioms_hold_exactly():
    rng = np.random.default_rng(43)
    for _ in range(4):
        n = int(rng.integers(3, 8))
        space = random_metric(rng, n)
        ws = WeightedSpace(space, MeasureVec(random_probability(rng, n)))
        oracle = CoveringSubmeasure(ws, float(rng.uniform(0.2, 0.8)), 1.0)
        bad = check_submeasure_axioms(oracle.value, n, pairs=500, rng=rng)
        assert bad == {"empty": 0, "monotonicity": 0, "subadditivity": 0}


def test_off_grid_radii_never_beat_the_optimum():
    rng = np.random.default_rng(44)
    space = random_metric(rng, 6)
    ws = WeightedSpace(space, MeasureVec(random_probability(rng, 6)))
    oracle = CoveringSubmeasure(ws, 0.5, 1.0)
    diam = space.diameter()
    for _ in range(200):
        target = set(int(i) for i in rng.choice(6, size=3, replace=False))
        cost = 0.0
        uncovered = set(target)
        while uncovered:
            x = int(rng.integers(0, 6))
            r = float(rng.uniform(0, diam * 1.2))
            ball = closed_ball(space, x, r)
            if ball & uncovered:
                cost += quantize_cost(ws.mu.ball_mass(space, x, r) ** 0.5)
                uncovered -= ball
        assert cost >= oracle.value(target) - 1e-12


def test_whole_space_value_is_one():
    rng = np.random.default_rng(45)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        space = random_metric(rng, n)
        ws = WeightedSpace(space, MeasureVec(random_probability(rng, n)))
        eps = float(rng.uniform(0.2, 0.8))
        assert covering_submeasure(ws, eps, 1.0, range(n)) == \
            pytest.approx(1.0, abs=1e-9)


def test_ball_power_bound_instancewise():
    # covering a trace by the ball itself bounds xi(S n B) by the powered mass
    rng = np.random.default_rng(46)
    space = random_metric(rng, 7)
    ws = WeightedSpace(space, MeasureVec(random_probability(rng, 7)))
    eps, ceps = 0.5, 1.5
    oracle = CoveringSubmeasure(ws, eps, ceps)
    S = [0, 2, 3, 5, 6]
    for x in range(space.n):
        for r in sorted(set(float(v) for v in space.dist[x])):
            trace = sorted(set(S) & closed_ball(space, x, r))
            rhs = ws.mu.ball_mass(space, x, ceps * r) ** (1.0 - eps)
            assert oracle.value(trace) <= rhs + 1e-9


def test_optimal_cover_reconstruction():
    ws = uniform_ws(path_space(4))
    oracle = CoveringSubmeasure(ws, 0.5, 1.0)
    cover = oracle.optimal_cover([0, 1])
    covered = set()
    for ball in cover:
        covered |= set(ball.points())
    assert {0, 1} <= covered
    assert sum(b.cost for b in cover) == oracle.value([0, 1])


def test_mass_split_symmetric_pair():
    tree = UltrametricTree(TreeNode(diam=1.0, children=(leaf(0), leaf(1))))
    xi = {frozenset({0}): 0.3, frozenset({1}): 0.3, frozenset({0, 1}): 0.5}
    out = submeasure_to_measure(tree, lambda pts: xi[frozenset(pts)])
    assert out.leaf_weights[0] == Fraction(1, 2)
    assert out.leaf_weights[1] == Fraction(1, 2)


def test_mass_split_hand_recursion():
    cluster = TreeNode(diam=1.0, children=(leaf(0), leaf(1)))  # {a, b}
    tree = UltrametricTree(TreeNode(diam=2.0, children=(cluster, leaf(2))))
    table = {
        frozenset({0, 1, 2}): Fraction(1),
        frozenset({0, 1}): Fraction(7, 10),
        frozenset({2}): Fraction(5, 10),
        frozenset({0}): Fraction(4, 10),
        frozenset({1}): Fraction(5, 10),
    }
    out = submeasure_to_measure(tree, lambda pts: table[frozenset(pts)])
    assert out.leaf_weights[0] == Fraction(7, 27)
    assert out.leaf_weights[1] == Fraction(35, 108)
    assert out.leaf_weights[2] == Fraction(5, 12)
    for cell, val in out.cell_values.items():
        assert val <= table[cell]  # xi(root) = 1 here


def test_mass_split_preserves_additive_measures():
    rng = np.random.default_rng(47)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        tree = random_ultrametric_tree(rng, n)
        w = [Fraction(int(rng.integers(1, 64)), 256) for _ in range(n)]
        total = sum(w, Fraction(0))
        mu = [v / total for v in w]

        out = submeasure_to_measure(
            tree, lambda pts: sum((mu[p] for p in pts), Fraction(0)))
        for p in range(n):
            assert out.leaf_weights[p] == mu[p]


def test_mass_split_contract_error():
    tree = UltrametricTree(TreeNode(diam=1.0, children=(leaf(0), leaf(1))))
    xi = {frozenset({0}): 0.0, frozenset({1}): 0.0, frozenset({0, 1}): 1.0}
    with pytest.raises(SubmeasureContractError):
        submeasure_to_measure(tree, lambda pts: xi[frozenset(pts)])
    with pytest.raises(ArgumentError):
        submeasure_to_measure(tree, lambda pts: 0.0)


def test_mass_split_random_suite():
    rng = np.random.default_rng(48)
    for _ in range(40):
        n = int(rng.integers(2, 9))
        tree = random_ultrametric_tree(rng, n)
        xi = random_submeasure_table(rng, n)
        out = submeasure_to_measure(tree, xi)
        total = sum(out.leaf_weights.values(), Fraction(0))
        assert total == 1
        root_val = xi.value(range(n))
        for cell, val in out.cell_values.items():
            assert val <= xi.value(cell) / root_val
