"""Command-line front end: ``gwbox <subcommand> [flags]``.

Inputs are JSON Lines. Each detection has the keys image_id, class_id, score,
box and sigma; each ground truth has image_id, class_id and box. Outputs are
CSV with a header row, ``\\n`` line endings and shortest round-trip floats.
Every input record is validated before anything is written.

Exit codes: 0 success, 1 invalid input, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import GwboxError
from .gauss import gt_to_gaussian, pred_to_gaussian
from .geometry import Box, ciou, giou, iou
from .harness import (
    average_precision_images,
    calibration_experiment,
    counterexample_search,
    gen_synthetic,
    heatmap_bins,
)
from .matching import build_cost_matrix, hungarian
from .metrics import gromov_wasserstein_sq, wasserstein2_sq
from .regress import fit_box
from .risk import LossConfig
from .uncertainty import DEFAULT_K, localization_uncertainty_batch

__all__ = ["DetectionRecord", "GroundTruthRecord", "InputError", "read_detections", "read_ground_truths",
           "dump_record", "run", "main"]


class InputError(GwboxError, ValueError):
    """A malformed input record; the message names the file, line and field."""


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    class_id: int
    score: float
    box: Box
    sigma: tuple[float, float, float, float]


@dataclass(frozen=True)
class GroundTruthRecord:
    image_id: str
    class_id: int
    box: Box


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _field(obj: dict, key: str, where: str):
    if key not in obj:
        raise InputError(f"{where}: missing field '{key}'")
    return obj[key]


def _common(obj, where):
    image_id = _field(obj, "image_id", where)
    if not isinstance(image_id, str):
        raise InputError(f"{where}: field 'image_id' must be a string")
    class_id = _field(obj, "class_id", where)
    if not isinstance(class_id, int) or isinstance(class_id, bool) or class_id < 0:
        raise InputError(f"{where}: field 'class_id' must be a non-negative integer")
    box = _field(obj, "box", where)
    if not isinstance(box, list) or len(box) != 4 or not all(_is_number(v) for v in box):
        raise InputError(f"{where}: field 'box' must be a list of 4 numbers")
    try:
        b = Box(*(float(v) for v in box))
    except ValueError as e:
        raise InputError(f"{where}: field 'box': {e}") from None
    return image_id, class_id, b


def _read_jsonl(path: str):
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().split("\n")
    except OSError as e:
        raise InputError(f"{path}: cannot read: {e.strerror}") from None
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        where = f"{path}:{n}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"{where}: invalid JSON: {e.msg}") from None
        if not isinstance(obj, dict):
            raise InputError(f"{where}: record must be a JSON object")
        yield where, obj


def read_detections(path: str) -> list[DetectionRecord]:
    out = []
    for where, obj in _read_jsonl(path):
        image_id, class_id, b = _common(obj, where)
        score = _field(obj, "score", where)
        if not _is_number(score) or not 0.0 <= score <= 1.0:
            raise InputError(f"{where}: field 'score' must be a number in [0, 1]")
        sigma = _field(obj, "sigma", where)
        if not isinstance(sigma, list) or len(sigma) != 4 or not all(_is_number(v) for v in sigma):
            raise InputError(f"{where}: field 'sigma' must be a list of 4 numbers")
        if not all(0.0 < v <= 1.0 for v in sigma):
            raise InputError(f"{where}: field 'sigma' components must lie in (0, 1]")
        out.append(DetectionRecord(image_id, class_id, float(score), b, tuple(float(v) for v in sigma)))
    return out


def read_ground_truths(path: str) -> list[GroundTruthRecord]:
    return [GroundTruthRecord(*_common(obj, where)) for where, obj in _read_jsonl(path)]


def dump_record(rec) -> str:
    """One JSON line for a record; floats keep their shortest round-trip form."""
    obj = {"image_id": rec.image_id, "class_id": rec.class_id}
    if isinstance(rec, DetectionRecord):
        obj["score"] = rec.score
    obj["box"] = list(rec.box.as_tuple())
    if isinstance(rec, DetectionRecord):
        obj["sigma"] = list(rec.sigma)
    return json.dumps(obj)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _write_all(outputs: dict[str, str]) -> None:
    for path in outputs:
        parent = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(parent):
            raise InputError(f"{path}: output directory does not exist")
    for path, text in outputs.items():
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _group(records):
    groups: dict[str, list[tuple[int, object]]] = {}
    for i, r in enumerate(records):
        groups.setdefault(r.image_id, []).append((i, r))
    return groups


def _cfg(args) -> LossConfig:
    try:
        return LossConfig(args.lambda_iou, args.lambda_l1, args.lambda_gw)
    except ValueError as e:
        raise InputError(str(e)) from None


def cmd_metric(args) -> dict[str, str]:
    gts = read_ground_truths(args.gt)
    dets = read_detections(args.det)
    gt_groups = _group(gts)
    rows = []
    for image_id, items in _group(dets).items():
        for pair_index, ((_, d), (_, g)) in enumerate(zip(items, gt_groups.get(image_id, []))):
            p = pred_to_gaussian(d.box, d.sigma)
            rows.append((
                image_id, pair_index, iou(g.box, d.box), giou(g.box, d.box), ciou(g.box, d.box),
                wasserstein2_sq(g.box, d.box), gromov_wasserstein_sq(gt_to_gaussian(g.box), p),
            ))
    return {args.out: _csv_text(("image_id", "pair_index", "iou", "giou", "ciou", "w2_sq", "gw_sq"), rows)}


def cmd_match(args) -> dict[str, str]:
    gts = read_ground_truths(args.gt)
    dets = read_detections(args.det)
    gt_groups = _group(gts)
    rows = []
    for image_id, items in _group(dets).items():
        g_items = gt_groups.get(image_id, [])
        classes = sorted({r.class_id for _, r in items}) if args.per_class else [None]
        found = []
        for cls in classes:
            di = [(i, r) for i, r in items if cls is None or r.class_id == cls]
            gi = [(i, r) for i, r in g_items if cls is None or r.class_id == cls]
            if not di or not gi:
                continue
            c = build_cost_matrix(
                [(r.score, r.box, pred_to_gaussian(r.box, r.sigma)) for _, r in di], [r.box for _, r in gi]
            )
            for a, b in hungarian(c).pairs:
                found.append((di[a][0], gi[b][0], float(c[a, b])))
        for det_index, gt_index, cost in sorted(found):
            rows.append((image_id, det_index, gt_index, cost))
    return {args.out: _csv_text(("image_id", "det_index", "gt_index", "cost"), rows)}


def cmd_uncertainty(args) -> dict[str, str]:
    dets = read_detections(args.det)
    if dets:
        avg = localization_uncertainty_batch(
            [d.box.as_tuple() for d in dets], [d.sigma for d in dets], args.k, args.threads
        )
    else:
        avg = np.empty(0)
    rows = [(d.image_id, i, 1.0 - a, a) for i, (d, a) in enumerate(zip(dets, avg))]
    return {args.out: _csv_text(("image_id", "det_index", "uncertainty", "avg_top5_iou"), rows)}


def cmd_fit_demo(args) -> dict[str, str]:
    try:
        gt = Box(*args.gt_box)
    except ValueError as e:
        raise InputError(f"--gt-box: {e}") from None
    res = fit_box(gt, cfg=_cfg(args), steps=args.steps, lr=args.lr, seed=args.seed)
    rows = [(i, r.loss, r.gw, r.l1, r.iou_term, *r.var) for i, r in enumerate(res.trace.records)]
    header = ("step", "loss", "gw_sq", "l1", "iou_term", "var_cx", "var_cy", "var_w", "var_h")
    return {args.out: _csv_text(header, rows)}


def cmd_calibrate(args) -> dict[str, str]:
    scenes = gen_synthetic(args.seed, args.scenes, args.dets_per_scene, args.noise)
    stats = calibration_experiment(scenes, args.k, args.threads)
    pairs = list(zip(stats.uncertainty, stats.combined, stats.one_minus_iou))
    grid = heatmap_bins(np.column_stack([stats.combined, stats.uncertainty]), args.bins, args.bins)
    cells = []
    for i in range(grid.counts.shape[0]):
        for j in range(grid.counts.shape[1]):
            cells.append((grid.x_edges[i], grid.x_edges[i + 1], grid.y_edges[j], grid.y_edges[j + 1],
                          int(grid.counts[i, j])))
    out_dir = os.path.dirname(os.path.abspath(args.out))
    summary = [
        ("n_detections", len(pairs)),
        ("spearman_uncertainty_one_minus_iou", stats.spearman_uncertainty_error),
        ("spearman_combined_metric_uncertainty", stats.spearman_combined_uncertainty),
        ("heatmap_dropped", grid.dropped),
    ]
    return {
        args.out: _csv_text(("uncertainty", "combined_metric", "one_minus_iou"), pairs),
        os.path.join(out_dir, "heatmap.csv"): _csv_text(("x_lo", "x_hi", "y_lo", "y_hi", "count"), cells),
        os.path.join(out_dir, "stats.csv"): _csv_text(("name", "value"), summary),
    }


def cmd_counterexample(args) -> dict[str, str]:
    pair = counterexample_search(args.seed, args.tol, args.min_gap, args.max_trials,
                                 not args.no_analytic_seed, args.eps)
    rows = []
    for role, b in (("gt", pair.gt), ("pred_a", pair.pred_a), ("pred_b", pair.pred_b)):
        metrics = ("", "", "") if role == "gt" else (
            giou(pair.gt, b), ciou(pair.gt, b),
            gromov_wasserstein_sq(gt_to_gaussian(pair.gt), _eps_cov(b, args.eps)),
        )
        rows.append((role, *b.as_tuple(), *metrics))
    return {args.out: _csv_text(("role", "cx", "cy", "w", "h", "giou", "ciou", "gw_sq"), rows)}


def _eps_cov(b: Box, eps: float) -> np.ndarray:
    return np.diag([b.w * b.w / 4.0, b.h * b.h / 4.0, eps, eps])


def cmd_eval(args) -> dict[str, str]:
    gts = read_ground_truths(args.gt)
    dets = read_detections(args.det)
    classes = sorted({g.class_id for g in gts})
    rows = []
    aps = []
    for cls in classes:
        cg = [(g.image_id, g.box) for g in gts if g.class_id == cls]
        cd = [(d.image_id, d.score, d.box) for d in dets if d.class_id == cls]
        ap = average_precision_images(cd, cg, args.iou_threshold)
        aps.append(ap)
        rows.append((str(cls), len(cg), len(cd), ap))
    mean_ap = float(np.mean(aps)) if aps else 0.0
    rows.append(("mean", len(gts), len(dets), mean_ap))
    return {args.out: _csv_text(("class_id", "n_gt", "n_det", "ap"), rows)}


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--k", type=int, default=DEFAULT_K, help="interval divisions for uncertainty")
    common.add_argument("--lambda-iou", type=float, default=2.0)
    common.add_argument("--lambda-l1", type=float, default=5.0)
    common.add_argument("--lambda-gw", type=float, default=1.0)
    common.add_argument("--threads", type=_positive_int, default=1, help="parallelism cap; never changes output")

    parser = argparse.ArgumentParser(prog="gwbox", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", required=True)
        return p

    p = add("metric", cmd_metric, "overlap and distance metrics for paired gt/detection records")
    p.add_argument("--gt", required=True)
    p.add_argument("--det", required=True)

    p = add("match", cmd_match, "per-image risk-aware one-to-one matching")
    p.add_argument("--gt", required=True)
    p.add_argument("--det", required=True)
    p.add_argument("--per-class", action="store_true")

    p = add("uncertainty", cmd_uncertainty, "localization uncertainty per detection")
    p.add_argument("--det", required=True)

    p = add("fit-demo", cmd_fit_demo, "fit one box and its variances by gradient descent")
    p.add_argument("--gt-box", type=float, nargs=4, default=[0.5, 0.5, 0.4, 0.2], metavar=("CX", "CY", "W", "H"))
    p.add_argument("--steps", type=_positive_int, default=5000)
    p.add_argument("--lr", type=float, default=0.05)

    p = add("calibrate", cmd_calibrate, "uncertainty calibration on synthetic scenes")
    p.add_argument("--scenes", type=int, default=100)
    p.add_argument("--dets-per-scene", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--bins", type=_positive_int, default=10)

    p = add("counterexample", cmd_counterexample, "boxes that GIoU/CIoU tie but GW separates")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--min-gap", type=float, default=0.01)
    p.add_argument("--max-trials", type=int, default=1000)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--no-analytic-seed", action="store_true")

    p = add("eval", cmd_eval, "per-class average precision at one IoU threshold")
    p.add_argument("--gt", required=True)
    p.add_argument("--det", required=True)
    p.add_argument("--iou-threshold", type=float, default=0.5)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    try:
        _write_all(args.func(args))
    except (GwboxError, ValueError) as e:
        print(f"gwbox {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
