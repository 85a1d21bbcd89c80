"""Independent reference implementations used as test oracles.

They are deliberately naive: plain Python loops, no shared code with the
package beyond the data classes.
"""

from __future__ import annotations

import itertools
import random

from augforge.evaluation import Detection, DetectionSet, GroundTruthSet
from augforge.imaging import BBox


def naive_iou(a, b):
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    w = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    h = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = w * h
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if inter > 0 else 0.0


def naive_ap(gt: GroundTruthSet, det: DetectionSet, class_id: int, threshold: float) -> float:
    truths = []
    for image_id, boxes in gt.images.items():
        for b in boxes:
            if b.class_id == class_id:
                truths.append([image_id, b.as_tuple(), False])
    order = sorted(
        (d for d in enumerate(det.detections) if d[1].box.class_id == class_id),
        key=lambda t: (-t[1].score, t[1].image_id, t[0]),
    )
    points = []
    tp = fp = 0
    for _, d in order:
        best, pick = -1.0, None
        for t in truths:
            if t[0] != d.image_id or t[2]:
                continue
            o = naive_iou(d.box.as_tuple(), t[1])
            if o > best:
                best, pick = o, t
        if pick is not None and best >= threshold:
            pick[2] = True
            tp += 1
        else:
            fp += 1
        points.append((tp / len(truths), tp / (tp + fp)))
    if not truths:
        return 0.0
    total = 0.0
    for k in range(101):
        r = k / 100
        total += max((p for rec, p in points if rec >= r), default=0.0)
    return total / 101


def naive_map(gt: GroundTruthSet, det: DetectionSet, thresholds) -> float:
    classes = sorted({b.class_id for boxes in gt.images.values() for b in boxes})
    aps = [naive_ap(gt, det, c, t) for c in classes for t in thresholds]
    return sum(aps) / len(aps)


THRESHOLDS = [round(0.5 + 0.05 * k, 2) for k in range(10)]


def random_fixture(seed: int, n_images: int = 50, n_classes: int = 3):
    """Ground truths plus jittered, duplicated and spurious detections."""
    rnd = random.Random(seed)
    images, dets = {}, []
    for i in range(n_images):
        image_id = f"img{i:03d}"
        boxes = []
        for _ in range(rnd.randint(0, 4)):
            x0, y0 = rnd.uniform(0, 80), rnd.uniform(0, 80)
            boxes.append(BBox(x0, y0, x0 + rnd.uniform(5, 40), y0 + rnd.uniform(5, 40), rnd.randrange(n_classes)))
        images[image_id] = boxes
        for b in boxes:
            for _ in range(rnd.choice([0, 1, 1, 2])):
                j = [rnd.gauss(0, 3) for _ in range(4)]
                x0, y0 = b.x_min + j[0], b.y_min + j[1]
                x1, y1 = max(b.x_max + j[2], x0 + 1), max(b.y_max + j[3], y0 + 1)
                cls = b.class_id if rnd.random() < 0.9 else rnd.randrange(n_classes)
                dets.append(Detection(image_id, BBox(x0, y0, x1, y1, cls), rnd.random()))
        for _ in range(rnd.randint(0, 2)):
            x0, y0 = rnd.uniform(0, 90), rnd.uniform(0, 90)
            dets.append(Detection(image_id, BBox(x0, y0, x0 + 10, y0 + 10, rnd.randrange(n_classes)), rnd.random()))
    gt = GroundTruthSet(images)
    if not gt.classes:
        gt.images["img000"] = [BBox(0, 0, 10, 10, 0)]
    return gt, DetectionSet(dets)


def brute_force_first_order(levels: list[int], values: dict[tuple[int, ...], float]) -> list[float]:
    """Variance fractions of main effects for a fully enumerated grid."""
    grid = list(itertools.product(*(range(k) for k in levels)))
    mean = sum(values[g] for g in grid) / len(grid)
    total = sum((values[g] - mean) ** 2 for g in grid) / len(grid)
    out = []
    for i, k in enumerate(levels):
        marg = []
        for v in range(k):
            cell = [values[g] for g in grid if g[i] == v]
            marg.append(sum(cell) / len(cell))
        out.append(sum((m - mean) ** 2 for m in marg) / k / total if total > 0 else 0.0)
    return out
