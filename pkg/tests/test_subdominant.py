import numpy as np
import pytest

from umskel import (CapacityError, FiniteMetricSpace, equilateral_space,
                    exhaustive_min_distortion, min_ultrametric_distortion,
                    path_space, subdominant_ultrametric)
from umskel.metric import line_subset_space
from umskel.subdominant import minimax_matrix_oracle
from umskel.union import make_line_example

from conftest import random_metric


def test_line_0_1_3():
    space = line_subset_space([0, 1, 3])
    tree = subdominant_ultrametric(space)
    _, u = tree.induced_matrix()
    # brute-force min over paths of the max edge gives the same values
    assert np.array_equal(u, minimax_matrix_oracle(space))
    assert u[0][1] == 1.0 and u[1][2] == 2.0 and u[0][2] == 2.0


def test_ultrametric_input_is_fixed_point():
    mat = np.array([[0, 1, 2, 2], [1, 0, 2, 2], [2, 2, 0, 1], [2, 2, 1, 0]],
                   dtype=float)
    space = FiniteMetricSpace(tuple(range(4)), mat)
    _, u = subdominant_ultrametric(space).induced_matrix()
    assert np.array_equal(u, mat)


@pytest.mark.parametrize("m", [2, 3, 5, 8])
def test_unit_path_collapses_to_one_level(m):
    _, u = subdominant_ultrametric(path_space(m)).induced_matrix()
    off = u[~np.eye(m, dtype=bool)]
    assert np.all(off == 1.0)


def test_subdominant_matches_path_enumeration():
    rng = np.random.default_rng(21)
    for _ in range(25):
        space = random_metric(rng, int(rng.integers(3, 7)))
        _, u = subdominant_ultrametric(space).induced_matrix()
        assert np.allclose(u, minimax_matrix_oracle(space), rtol=0, atol=0)


def test_subdominant_below_metric_and_scaling_brackets():
    rng = np.random.default_rng(22)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        space = random_metric(rng, n)
        dstar, tree = min_ultrametric_distortion(space)
        _, rho = tree.induced_matrix()
        d = space.dist
        iu = np.triu_indices(n, 1)
        assert np.all(rho[iu] >= d[iu] - 1e-9)
        assert np.all(rho[iu] <= dstar * d[iu] + 1e-9)


def test_known_optima():
    assert min_ultrametric_distortion(path_space(3))[0] == pytest.approx(2.0)
    assert exhaustive_min_distortion(path_space(3)) == pytest.approx(2.0)
    assert min_ultrametric_distortion(equilateral_space(3))[0] == 1.0


def test_sharpness_instance_block_distortion():
    inst = make_line_example(4, 4)
    from umskel.metric import restrict_space

    u1_space = restrict_space(inst.space, inst.u1)
    dstar, _ = min_ultrametric_distortion(u1_space)
    assert dstar == pytest.approx(3.0)


def test_exhaustive_matches_subdominant_scaling():
    rng = np.random.default_rng(23)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        space = random_metric(rng, n)
        dstar, _ = min_ultrametric_distortion(space)
        assert exhaustive_min_distortion(space) == pytest.approx(dstar, abs=1e-9)


def test_exhaustive_cap():
    with pytest.raises(CapacityError):
        exhaustive_min_distortion(path_space(6))


def test_single_point():
    space = path_space(1)
    dstar, tree = min_ultrametric_distortion(space)
    assert dstar == 1.0 and tree.points == (0,)
