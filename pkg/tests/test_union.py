import numpy as np
import pytest

from umskel import (ArgumentError, merge_params, multi_union, path_space,
                    union_partition_step, union_ultrametric)
from umskel.metric import restrict_space, set_distance, subset_diameter
from umskel.subdominant import (distortion_of_subset, min_ultrametric_distortion,
                                tree_on_subset)
from umskel.tree import distortion_certificate, ultrametric_from_tree
from umskel.union import make_line_example

from conftest import random_metric


def tree_levels_respect_bounds(space, tree, params, tol=1e-9):
    """Post-hoc re-check of the per-level diameter and separation bounds."""

    def leafset(node):
        if node.is_leaf:
            return [node.point]
        out = []
        for c in node.children:
            out.extend(leafset(c))
        return out

    def walk(node):
        if node.is_leaf:
            return
        cells = [sorted(leafset(c)) for c in node.children]
        for pts in cells:
            assert subset_diameter(space, pts) <= \
                (1.0 - params.delta) * node.diam + tol
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                assert set_distance(space, cells[i], cells[j]) >= \
                    node.diam / params.distortion_bound - tol
        for child in node.children:
            walk(child)

    walk(tree.root)


def test_merge_params_examples():
    p = merge_params(1.0, 1.0, 0.1)
    assert p.a == pytest.approx(3 / 7, abs=1e-15)
    assert p.b == pytest.approx(1 / 7.1, abs=1e-15)
    assert p.c == pytest.approx(1 / 7, abs=1e-15)
    assert p.delta == pytest.approx(0.2 / (7 * 7.1), abs=1e-12)

    p = merge_params(3.0, 3.0, 0.5)
    assert p.a == pytest.approx(15 / 23, abs=1e-15)
    assert p.b == pytest.approx(3 / 23.5, abs=1e-15)
    assert p.c == pytest.approx(1 / 23, abs=1e-15)


def test_merge_params_identity_and_limit():
    rng = np.random.default_rng(31)
    for _ in range(50):
        d1 = 1.0 + 9.0 * rng.random()
        d2 = 1.0 + 9.0 * rng.random()
        eps = 10.0 ** rng.uniform(-9, 0)
        p = merge_params(d1, d2, eps)
        assert abs(p.a + 2 * p.b + 2 * p.c - (1 - p.delta)) <= 1e-12
        assert p.delta > 0
    tiny = merge_params(1.0, 1.0, 1e-12)
    assert tiny.a + 2 * tiny.b + 2 * tiny.c == pytest.approx(1.0, abs=1e-11)


def test_merge_params_rejects_bad_eps():
    with pytest.raises(ArgumentError):
        merge_params(1.0, 1.0, 0.0)
    with pytest.raises(ArgumentError):
        merge_params(1.0, 1.0, -0.1)
    with pytest.raises(ArgumentError):
        merge_params(0.5, 1.0, 0.1)


def test_partition_step_hand_trace():
    space = path_space(4)
    u1, u2 = (0, 1), (2, 3)
    _, rho1 = tree_on_subset(space, u1)
    _, rho2 = tree_on_subset(space, u2)
    params = merge_params(1.0, 1.0, 0.1)
    part = union_partition_step(space, u1, u2, rho1, rho2, params)
    assert part.level_diameter == 3.0
    assert [c.points for c in part.cells] == [(0, 1), (2,), (3,)]
    # d(E1, F1) = 1 > c*diam = 3/7, so no F-class is absorbed
    assert all(c.f_indices == () or c.kind == "F" for c in part.cells)


def test_partition_step_empty_side():
    space = path_space(4)
    u1 = (0, 1, 3)
    _, rho1 = tree_on_subset(space, u1)
    params = merge_params(2.0, 1.0, 0.1)
    part = union_partition_step(space, u1, (), rho1, None, params)
    # degenerate branch: threshold classes of rho1 at a*diam = 0.6*3 = 1.8;
    # rho1 = 1.5-scaled subdominant, so {0,1} stay together and 3 splits off
    assert [c.points for c in part.cells] == [(0, 1), (3,)]
    assert all(c.kind == "E" for c in part.cells)


def test_union_hand_trace_m2():
    inst = make_line_example(2, 2)
    tree, cert = union_ultrametric(inst.space, inst.u1, inst.u2,
                                   inst.rho1, inst.rho2, eps=0.1)
    assert tree.to_jsonable() == {
        "diam": 3.0,
        "children": [
            {"diam": 1.0, "children": [{"point": 0}, {"point": 1}]},
            {"point": 2},
            {"point": 3},
        ],
    }
    assert cert.upper == pytest.approx(3.0)
    assert cert.upper <= 7.1 + 1e-9


def test_union_singletons():
    space = path_space(5)
    _, t1 = tree_on_subset(space, [1])
    _, t2 = tree_on_subset(space, [4])
    tree, cert = union_ultrametric(space, [1], [4], t1, t2, eps=0.1)
    assert tree.rho(1, 4) == 3.0
    assert cert.upper == pytest.approx(1.0)


def test_sharpness_instance_m4():
    inst = make_line_example(4, 4)
    tree, cert = union_ultrametric(inst.space, inst.u1, inst.u2,
                                   inst.rho1, inst.rho2, eps=0.1)
    assert 15.0 - 1e-9 <= cert.upper <= 23.1 + 1e-9
    d1 = distortion_certificate(inst.space, inst.rho1).upper
    d2 = distortion_certificate(inst.space, inst.rho2).upper
    params = merge_params(d1, d2, 0.1)
    tree_levels_respect_bounds(inst.space, tree, params)
    # the merged tree can never beat the exact oracle on the union
    oracle = min_ultrametric_distortion(
        restrict_space(inst.space, sorted(set(inst.u1) | set(inst.u2))))[0]
    assert cert.upper >= oracle - 1e-9


def test_line_example_table():
    inst = make_line_example(2, 2)
    assert inst.bounds["K"] == 1 and inst.bounds["L"] == 0
    assert inst.u1 == (0, 1) and inst.u2 == (2, 3)
    assert inst.bounds["union_lower_bound"] == 3.0  # (D1+1)(D2+1)-1 with D=1

    inst = make_line_example(4, 4)
    assert inst.bounds["K"] == 2 and inst.bounds["union_lower_bound"] == 15.0

    inst = make_line_example(6, 3)
    assert inst.bounds["K"] == 2 and inst.bounds["L"] == 0
    assert inst.bounds["union_lower_bound"] == 17.0

    with pytest.raises(ArgumentError):
        make_line_example(1, 4)


def test_line_example_trees_are_valid_and_tight():
    for m, n in [(2, 2), (4, 4), (6, 3), (3, 5)]:
        inst = make_line_example(m, n)
        for pts, tree, bound in ((inst.u1, inst.rho1, m - 1),
                                 (inst.u2, inst.rho2, n - 1)):
            ultrametric_from_tree(tree)  # triple check
            cert = distortion_certificate(inst.space, tree)
            assert cert.lower >= 1.0 - 1e-12
            assert cert.upper <= bound + 1e-12


def test_random_instance_suite():
    rng = np.random.default_rng(37)
    for _ in range(200):
        n = int(rng.integers(2, 11))
        space = random_metric(rng, n)
        pts = list(range(n))
        rng.shuffle(pts)
        cut = int(rng.integers(1, n)) if n > 1 else 1
        u1 = sorted(pts[:cut])
        u2 = sorted(pts[cut:]) or [pts[0]]
        if rng.random() < 0.3:  # overlapping subsets are legal
            u2 = sorted(set(u2) | {u1[0]})
        d1, rho1 = tree_on_subset(space, u1)
        d2, rho2 = tree_on_subset(space, u2)
        eps = 10.0 ** rng.uniform(-6, -0.5)
        tree, cert = union_ultrametric(space, u1, u2, rho1, rho2, eps=eps)

        params = merge_params(max(1.0, d1), max(1.0, d2), eps)
        assert cert.upper <= params.distortion_bound + 1e-9
        assert cert.lower >= 1.0 - 1e-9
        tree_levels_respect_bounds(space, tree, params)
        union = sorted(set(u1) | set(u2))
        assert cert.upper >= distortion_of_subset(space, union) - 1e-9


def test_partition_provenance_unique_owner():
    # overlapping subsets: each F-class may be absorbed by at most one E-cell,
    # and shared points always follow their E-class
    rng = np.random.default_rng(39)
    for _ in range(50):
        n = int(rng.integers(3, 10))
        space = random_metric(rng, n)
        u1 = sorted(rng.choice(n, size=int(rng.integers(2, n + 1)),
                               replace=False).tolist())
        u2 = sorted(rng.choice(n, size=int(rng.integers(2, n + 1)),
                               replace=False).tolist())
        d1, rho1 = tree_on_subset(space, u1)
        d2, rho2 = tree_on_subset(space, u2)
        params = merge_params(max(1.0, d1), max(1.0, d2), 0.25)
        part = union_partition_step(space, u1, u2, rho1, rho2, params)
        absorbed = [j for c in part.cells if c.kind == "E" for j in c.f_indices]
        assert len(absorbed) == len(set(absorbed))
        for c in part.cells:
            if c.kind == "F":
                assert not set(c.points) & set(u1)


def test_union_with_one_empty_side():
    space = path_space(4)
    _, rho2 = tree_on_subset(space, [0, 2, 3])
    tree, cert = union_ultrametric(space, [], [0, 2, 3], None, rho2, eps=0.1)
    assert sorted(tree.points) == [0, 2, 3]
    assert cert.lower >= 1.0 - 1e-12


def test_multi_union_identity_and_pair():
    space = path_space(6)
    _, t1 = tree_on_subset(space, [0, 1])
    _, t2 = tree_on_subset(space, [2, 3])
    solo, cert = multi_union(space, [([0, 1], t1, 1.0)], eps=0.1)
    assert solo is t1 and cert.upper == 1.0

    pair_tree, pair_cert = multi_union(space, [([0, 1], t1, 1.0),
                                               ([2, 3], t2, 1.0)], eps=0.1)
    direct_tree, direct_cert = union_ultrametric(space, [0, 1], [2, 3],
                                                 t1, t2, eps=0.1)
    assert pair_tree.to_jsonable() == direct_tree.to_jsonable()
    assert pair_cert.upper == direct_cert.upper


def test_multi_union_three_parts_fold():
    space = path_space(6)
    parts = []
    for block in ([0, 1], [2, 3], [4, 5]):
        d, t = tree_on_subset(space, block)
        parts.append((block, t, d))
    tree, cert = multi_union(space, parts, eps=0.1)
    # fold: 7.1 after the first merge, then 7.1*1 + 2*7.1 + 2*1 + 2 + 0.1
    fold = 1 * 1 + 2 + 2 + 2 + 0.1
    fold = fold * 1.0 + 2 * fold + 2 * 1.0 + 2 + 0.1
    assert fold == pytest.approx(25.4)
    assert cert.upper <= fold + 1e-9
    assert sorted(tree.points) == [0, 1, 2, 3, 4, 5]
    assert cert.upper >= min_ultrametric_distortion(space)[0] - 1e-9

    with pytest.raises(ArgumentError):
        multi_union(space, [], eps=0.1)
