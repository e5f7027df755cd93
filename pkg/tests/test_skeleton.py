import math

import numpy as np
import pytest

from umskel import (ArgumentError, CapacityError, MeasureVec, WeightedSpace,
                    build_skeleton, dvoretzky_check, equilateral_space,
                    multi_measure_skeleton, path_space, skeleton_search,
                    verify_growth)
from umskel.gamma_delta import star_space
from umskel.skeleton import growth_margins
from umskel.subdominant import distortion_of_subset

from conftest import random_metric, random_probability


def uniform_ws(space):
    return WeightedSpace(space, MeasureVec.uniform(space.n))


def test_search_equilateral_takes_everything():
    ws = uniform_ws(equilateral_space(4))
    S, tree = skeleton_search(ws, 0.5, 1.0, D_max=1.0)
    assert S == (0, 1, 2, 3)
    assert tree.points == S


def test_search_single_point():
    ws = uniform_ws(path_space(1))
    S, tree = skeleton_search(ws, 0.5, 1.0, D_max=1.0)
    assert S == (0,)


def test_search_path4_reaches_sqrt_n():
    ws = uniform_ws(path_space(4))
    S, _ = skeleton_search(ws, 0.5, 1.0, D_max=1.0)
    assert len(S) >= 2


def test_search_below_one_returns_none():
    ws = uniform_ws(path_space(3))
    assert skeleton_search(ws, 0.5, 1.0, D_max=0.5) is None


def test_search_capacity_and_heuristic():
    space = path_space(15)
    ws = uniform_ws(space)
    with pytest.raises(CapacityError):
        skeleton_search(ws, 0.5, 1.0, D_max=2.0, cap=12)
    found = skeleton_search(ws, 0.5, 1.0, D_max=2.0, cap=12, heuristic=True)
    assert found is not None
    S, _ = found
    assert distortion_of_subset(space, S) <= 2.0 + 1e-9


def test_verify_growth_identity_measure():
    rng = np.random.default_rng(51)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        space = random_metric(rng, n)
        mu = MeasureVec(random_probability(rng, n))
        ws = WeightedSpace(space, mu)
        # nu = mu: t^(1-eps) >= t on [0,1], so C = 1 certifies
        assert verify_growth(ws, range(n), mu, 0.5) == 1.0


def test_verify_growth_sentinel():
    space = path_space(2)
    ws = WeightedSpace(space, MeasureVec([0.99, 0.01]))
    nu = MeasureVec([0.0, 1.0])
    assert verify_growth(ws, [1], nu, 0.5) == math.inf


def test_verify_growth_support_check():
    ws = uniform_ws(path_space(3))
    with pytest.raises(ArgumentError):
        verify_growth(ws, [0], MeasureVec([0.5, 0.5, 0.0]), 0.5)


def test_build_equilateral():
    sk = build_skeleton(uniform_ws(equilateral_space(4)), 0.5)
    assert sk.S == (0, 1, 2, 3)
    assert np.allclose(sk.nu.weights, 0.25)
    assert sk.distortion == 1.0
    assert sk.C_measured == 1.0
    assert sk.xi_S == pytest.approx(1.0, abs=1e-9)
    assert not sk.xi_deficient


def test_build_two_points():
    sk = build_skeleton(uniform_ws(path_space(2)), 0.5)
    assert sk.S == (0, 1)
    assert np.allclose(sk.nu.weights, 0.5)


def test_build_star_and_rescan():
    space, _, _ = star_space(4)
    sk = build_skeleton(uniform_ws(space), 0.5)
    assert math.isfinite(sk.C_measured)
    # independent re-scan at the reported constant: zero violations
    ws = uniform_ws(space)
    rows = growth_margins(ws, sk.nu, sk.eps, sk.C_measured)
    assert all(row.margin >= -1e-12 for row in rows)


def test_skeleton_report_round_trip():
    from umskel.skeleton import SkeletonResult

    sk = build_skeleton(uniform_ws(path_space(4)), 0.5)
    again = SkeletonResult.from_jsonable(sk.to_jsonable())
    assert again.S == sk.S
    assert again.C_measured == sk.C_measured
    assert np.array_equal(again.nu.weights, sk.nu.weights)


def test_growth_reverified_on_random_instances():
    rng = np.random.default_rng(53)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        space = random_metric(rng, n)
        ws = WeightedSpace(space, MeasureVec(random_probability(rng, n)))
        sk = build_skeleton(ws, 0.5)
        assert math.isfinite(sk.C_measured)
        rows = growth_margins(ws, sk.nu, 0.5, sk.C_measured)
        assert all(row.margin >= -1e-12 for row in rows)
        assert len(sk.S) >= 1


def test_deficient_budget_is_flagged_not_fatal():
    # a forced low budget can stop the covering value short of 1; the split
    # still happens and the domination is certified against xi/xi(root)
    space = path_space(4)
    ws = WeightedSpace(space, MeasureVec([0.04, 0.46, 0.46, 0.04]))
    sk = build_skeleton(ws, 0.5, dmax_values=[1.0])
    assert sk.xi_deficient and sk.xi_S < 1.0
    assert math.isfinite(sk.C_measured)
    assert sk.nu.total() == pytest.approx(1.0, abs=1e-12)


def test_dvoretzky_trivial_and_equilateral():
    res = dvoretzky_check(path_space(1), 0.5)
    assert res.passed and len(res.S) == 1

    res = dvoretzky_check(equilateral_space(9), 0.5)
    assert res.passed and len(res.S) == 9


def test_dvoretzky_path9():
    res = dvoretzky_check(path_space(9), 0.5)
    assert res.passed
    assert len(res.S) >= 3
    assert res.distortion_budget >= 1.0


def test_multi_single_measure_matches_build():
    space = equilateral_space(4)
    mu = MeasureVec.uniform(4)
    multi = multi_measure_skeleton(space, [mu], 0.5)
    solo = build_skeleton(WeightedSpace(space, mu), 0.5)
    assert multi.S == solo.S
    assert multi.distortion == solo.distortion


def test_multi_two_uniform_measures():
    space = equilateral_space(4)
    mu = MeasureVec.uniform(4)
    multi = multi_measure_skeleton(space, [mu, mu], 0.5)
    assert multi.S == (0, 1, 2, 3)
    for part in multi.parts:
        assert np.allclose(part.nu.weights, 0.25)
    assert multi.distortion <= multi.fold_bound + 1e-9


def test_multi_point_mass_plus_uniform():
    space = path_space(4)
    point = MeasureVec.point_mass(4, at=2)
    uniform = MeasureVec.uniform(4)
    multi = multi_measure_skeleton(space, [point, uniform], 0.5)
    assert 2 in multi.S
    for part in multi.parts:
        assert math.isfinite(part.C_measured)
    assert multi.distortion <= multi.fold_bound + 1e-9
    with pytest.raises(ArgumentError):
        multi_measure_skeleton(space, [], 0.5)
