import math

import numpy as np
import pytest

from gwbox.errors import EmptyInput
from gwbox.gauss import pred_to_gaussian
from gwbox.geometry import Box
from gwbox.matching import assignment_cost, brute_force_assignment, build_cost_matrix, hungarian


def test_two_by_two():
    r = hungarian([[1, 2], [2, 1]])
    assert r.pairs == ((0, 0), (1, 1))
    assert r.total_cost == 2.0


def test_identity_like():
    c = np.full((5, 5), 10.0) - 9.0 * np.eye(5)
    assert hungarian(c).pairs == tuple((i, i) for i in range(5))


def test_empty_and_invalid():
    assert hungarian(np.zeros((0, 3))).pairs == ()
    with pytest.raises(ValueError):
        hungarian([[1.0, math.nan]])
    with pytest.raises(ValueError):
        hungarian([1.0, 2.0])


def test_matches_brute_force(rng):
    for _ in range(200):
        n, m = rng.integers(1, 7, size=2)
        c = rng.normal(size=(n, m))
        h = hungarian(c)
        b = brute_force_assignment(c)
        assert h.pairs == b.pairs
        assert h.total_cost == b.total_cost
        assert len(h.pairs) == min(n, m)
        assert len({i for i, _ in h.pairs}) == len({j for _, j in h.pairs}) == len(h.pairs)


def test_ties_resolve_to_smallest_pair_list(rng):
    assert hungarian(np.zeros((3, 3))).pairs == ((0, 0), (1, 1), (2, 2))
    assert hungarian(np.ones((2, 4))).pairs == ((0, 0), (1, 1))
    assert hungarian(np.ones((4, 2))).pairs == ((0, 0), (1, 1))
    for _ in range(200):
        n, m = rng.integers(1, 7, size=2)
        c = rng.integers(0, 3, size=(n, m)).astype(float)
        assert hungarian(c).pairs == brute_force_assignment(c).pairs


def test_scale_and_shift_invariance(rng):
    for _ in range(100):
        n, m = rng.integers(1, 7, size=2)
        c = rng.normal(size=(n, m))
        base = hungarian(c).pairs
        assert hungarian(c * rng.uniform(0.01, 100)).pairs == base
        if n == m:
            assert hungarian(c + rng.uniform(-50, 50)).pairs == base


def test_cost_matrix_example():
    s = math.sqrt(0.1)
    gt = Box(0.5, 0.5, 0.4, 0.4)
    w = 0.4 * math.sqrt(0.9)
    det = Box(0.5, 0.5, w, w)
    c = build_cost_matrix([(0.8, det, pred_to_gaussian(det, (s,) * 4))], [gt])
    assert c.shape == (1, 1)
    assert c[0, 0] == pytest.approx(-math.exp(1.1 * math.log(0.8) + 4.4 * math.log(0.9)), rel=1e-12)
    assert c[0, 0] == pytest.approx(-0.492120, abs=1e-5)


def test_cost_matrix_shapes_and_zero():
    far = Box(0.1, 0.1, 0.05, 0.05)
    dets = [(0.9, b, pred_to_gaussian(b, (0.1,) * 4)) for b in (far, Box(0.5, 0.5, 0.2, 0.2), Box(0.6, 0.6, 0.1, 0.1))]
    c = build_cost_matrix(dets, [Box(0.9, 0.9, 0.05, 0.05), Box(0.5, 0.5, 0.2, 0.2)])
    assert c.shape == (3, 2)
    assert c[0, 0] == 0.0
    with pytest.raises(EmptyInput):
        build_cost_matrix([], [far])


def test_assignment_cost_order():
    c = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert assignment_cost(c, [(0, 1), (1, 0)]) == 5.0
