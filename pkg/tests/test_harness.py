import numpy as np
import pytest

from gwbox.errors import DegenerateRanks, NoneFound
from gwbox.gauss import gt_to_gaussian
from gwbox.geometry import Box, ciou, giou, iou
from gwbox.harness import (
    average_precision,
    average_precision_images,
    calibration_experiment,
    counterexample_search,
    gen_synthetic,
    gw_sq_box,
    heatmap_bins,
    nested_square_pair,
)
from gwbox.metrics import gw_sq_cov


def test_generator_determinism_and_empty():
    assert gen_synthetic(3, 20, 5, 0.1) == gen_synthetic(3, 20, 5, 0.1)
    assert gen_synthetic(3, 20, 5, 0.1) != gen_synthetic(4, 20, 5, 0.1)
    assert gen_synthetic(0, 0, 5, 0.1) == []
    with pytest.raises(ValueError):
        gen_synthetic(0, -1, 5, 0.1)


def test_generator_invariants():
    scenes = gen_synthetic(9, 1000, 10, 0.3)
    n = 0
    for s in scenes:
        assert 1 <= len(s.gts) <= 3
        for _, g in s.gts:
            assert 0.05 <= g.w <= 0.5 and 0.05 <= g.h <= 0.5
            assert g.cx - g.w / 2 >= 0 and g.cx + g.w / 2 <= 1 + 1e-15
        for d in s.dets:
            n += 1
            Box(*d.box.as_tuple())
            assert 0.0 <= d.score <= 1.0
            assert all(0.005 <= x <= 0.3 for x in d.sigma)
            assert 0 <= d.source < len(s.gts)
            assert d.class_id == s.gts[d.source][0]
    assert n == 10000


def test_zero_noise_copies_boxes():
    for s in gen_synthetic(1, 10, 5, 0.0):
        for d in s.dets:
            assert d.box == s.gts[d.source][1]
            assert d.sigma == (1e-9,) * 4


def test_calibration_reference_signs():
    stats = calibration_experiment(gen_synthetic(42, 100, 10, 0.1), 300)
    assert len(stats.uncertainty) == len(stats.combined) == len(stats.one_minus_iou) == 1000
    assert stats.spearman_uncertainty_error > 0.3
    assert stats.spearman_combined_uncertainty < -0.3


def test_calibration_degenerate_and_small():
    with pytest.raises(DegenerateRanks):
        calibration_experiment(gen_synthetic(1, 20, 5, 0.0), 300)
    with pytest.raises(DegenerateRanks):
        calibration_experiment(gen_synthetic(1, 2, 5, 0.1), 300)


def test_calibration_threads_invariant():
    scenes = gen_synthetic(5, 40, 10, 0.1)
    a = calibration_experiment(scenes, 100, threads=1)
    b = calibration_experiment(scenes, 100, threads=4)
    np.testing.assert_array_equal(a.uncertainty, b.uncertainty)
    assert a.spearman_uncertainty_error == b.spearman_uncertainty_error


def test_nested_square_family_values():
    gt = Box(0.5, 0.5, 0.4, 0.4)
    a, b = nested_square_pair(gt, 0.5)
    assert (a.w, b.w) == (0.2, 0.8)
    for f in (giou, ciou, iou):
        assert f(gt, a) == pytest.approx(0.25, abs=1e-12) and f(gt, b) == pytest.approx(0.25, abs=1e-12)
    assert gw_sq_box(gt, a, 0.0) == pytest.approx(0.0288, abs=1e-12)
    assert gw_sq_box(gt, b, 0.0) == pytest.approx(0.4608, abs=1e-12)
    assert gw_sq_box(gt, b, 0.0) - gw_sq_box(gt, a, 0.0) == pytest.approx(0.432, abs=1e-12)


def _reverify(pair, tol, gap, eps=1e-3):
    g = gt_to_gaussian(pair.gt)
    gws = [gw_sq_cov(g.cov, np.diag([p.w**2 / 4, p.h**2 / 4, eps, eps])) for p in (pair.pred_a, pair.pred_b)]
    assert abs(giou(pair.gt, pair.pred_a) - giou(pair.gt, pair.pred_b)) < tol
    assert abs(ciou(pair.gt, pair.pred_a) - ciou(pair.gt, pair.pred_b)) < tol
    assert abs(gws[0] - gws[1]) > gap


def test_counterexample_search_analytic_and_random():
    pair = counterexample_search()
    assert pair.gt == Box(0.5, 0.5, 0.4, 0.4)
    _reverify(pair, 1e-6, 0.01)
    for seed in range(5):
        pair = counterexample_search(seed, use_analytic_seed=False)
        _reverify(pair, 1e-6, 0.01)
        assert pair.giou_gap < 1e-6 and pair.ciou_gap < 1e-6 and pair.gw_gap > 0.01


def test_counterexample_none_found():
    with pytest.raises(NoneFound):
        counterexample_search(max_trials=0, use_analytic_seed=False)
    with pytest.raises(ValueError):
        counterexample_search(tol=0.0)


def test_heatmap_edges():
    g = heatmap_bins([(0.3, 0.3)], 1, 1)
    assert g.counts.tolist() == [[1]] and g.dropped == 0
    g = heatmap_bins([(0, 0), (0, 1), (1, 0), (1, 1)], 2, 2)
    assert g.counts.tolist() == [[1, 1], [1, 1]]
    g = heatmap_bins([(0.5, 0.5), (0.49, 0.2)], 2, 2)
    assert g.counts.tolist() == [[1, 0], [0, 1]]
    g = heatmap_bins([(1.5, 0.5), (-0.1, 0.5), (0.5, 0.5)], 2, 2)
    assert g.dropped == 2 and g.counts.sum() == 1
    with pytest.raises(ValueError):
        heatmap_bins([(0.5, 0.5)], 0, 1)


def test_heatmap_conservation(rng):
    pts = rng.uniform(-0.2, 1.2, size=(500, 2))
    g = heatmap_bins(pts, 7, 3)
    assert g.counts.sum() + g.dropped == 500
    assert g.x_edges.shape == (8,) and g.y_edges.shape == (4,)


def test_average_precision_examples():
    gt = Box(0.5, 0.5, 0.4, 0.4)
    hit = Box(0.5, 0.5, 0.4, 0.4 * 0.9)
    miss = Box(0.1, 0.1, 0.05, 0.05)
    low = Box(0.5, 0.5, 0.4, 0.4 * 0.3)
    assert iou(gt, hit) == pytest.approx(0.9)
    assert average_precision([(0.9, hit)], [gt]) == 1.0
    assert average_precision([(0.9, low)], [gt]) == 0.0
    assert average_precision([(0.9, hit), (0.8, miss)], [gt]) == 1.0
    assert average_precision([(0.9, miss), (0.8, hit)], [gt]) == 0.5
    assert average_precision([], [gt]) == 0.0
    with pytest.raises(ValueError):
        average_precision([(0.9, hit)], [gt], 1.0)


def test_average_precision_per_image_matching():
    gt = Box(0.5, 0.5, 0.4, 0.4)
    # a perfect box on the wrong image must not match
    dets = [("b", 0.9, gt), ("a", 0.8, gt)]
    assert average_precision_images(dets, [("a", gt)]) == 0.5
    # a duplicate counts as a false positive
    assert average_precision_images([("a", 0.9, gt), ("a", 0.8, gt)], [("a", gt), ("a", Box(0.1, 0.1, 0.1, 0.1))]) == 0.5
