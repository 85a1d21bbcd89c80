"""COCO-style detection metrics: IoU, 101-point interpolated AP and mAP@[.50:.95]."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .imaging import BBox

# Literal k/100 and threshold values, so boundary comparisons are exact.
IOU_THRESHOLDS: tuple[float, ...] = (0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)
RECALL_POINTS = np.array([k / 100 for k in range(101)])


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Detection:
    image_id: str
    box: BBox
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise EvaluationError(f"detection score {self.score} outside [0, 1]")


@dataclass
class GroundTruthSet:
    images: dict[str, list[BBox]]
    subsets: dict[str, str] = field(default_factory=dict)
    sizes: dict[str, tuple[int, int]] = field(default_factory=dict)

    @property
    def classes(self) -> list[int]:
        return sorted({b.class_id for boxes in self.images.values() for b in boxes})

    def restrict(self, ids: Iterable[str]) -> "GroundTruthSet":
        keep = set(ids)
        return GroundTruthSet(
            {k: v for k, v in self.images.items() if k in keep},
            {k: v for k, v in self.subsets.items() if k in keep},
            {k: v for k, v in self.sizes.items() if k in keep},
        )

    @classmethod
    def from_dict(cls, doc: Mapping) -> "GroundTruthSet":
        if not isinstance(doc, Mapping) or not isinstance(doc.get("images"), list):
            raise EvaluationError('ground truth must be an object with an "images" list')
        images: dict[str, list[BBox]] = {}
        subsets: dict[str, str] = {}
        sizes: dict[str, tuple[int, int]] = {}
        for rec in doc["images"]:
            image_id = str(rec["id"])
            if image_id in images:
                raise EvaluationError(f"duplicate image id {image_id!r} in ground truth")
            try:
                images[image_id] = [BBox.from_dict(b) for b in rec.get("boxes", [])]
            except (KeyError, ValueError) as exc:
                raise EvaluationError(f"image {image_id!r}: bad box ({exc})") from exc
            if rec.get("subset") is not None:
                subsets[image_id] = str(rec["subset"])
            if "width" in rec and "height" in rec:
                sizes[image_id] = (int(rec["width"]), int(rec["height"]))
        return cls(images, subsets, sizes)

    def to_dict(self) -> dict:
        out = []
        for image_id, boxes in self.images.items():
            rec: dict = {"id": image_id}
            if image_id in self.sizes:
                rec["width"], rec["height"] = self.sizes[image_id]
            if image_id in self.subsets:
                rec["subset"] = self.subsets[image_id]
            rec["boxes"] = [b.to_dict() for b in boxes]
            out.append(rec)
        return {"images": out}


@dataclass
class DetectionSet:
    detections: list[Detection]

    def restrict(self, ids: Iterable[str]) -> "DetectionSet":
        keep = set(ids)
        return DetectionSet([d for d in self.detections if d.image_id in keep])

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DetectionSet":
        if not isinstance(doc, Mapping) or not isinstance(doc.get("detections"), list):
            raise EvaluationError('detections must be an object with a "detections" list')
        dets = []
        for rec in doc["detections"]:
            try:
                dets.append(Detection(str(rec["image_id"]), BBox.from_dict(rec), float(rec["score"])))
            except (KeyError, ValueError) as exc:
                raise EvaluationError(f"bad detection {rec!r} ({exc})") from exc
        return cls(dets)

    def to_dict(self) -> dict:
        return {
            "detections": [
                {"image_id": d.image_id, **d.box.to_dict(), "score": d.score}
                for d in self.detections
            ]
        }


@dataclass
class MetricsReport:
    mAP: float
    mAP50: float
    mAP75: float
    mean_iou: float
    subset_mAP: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mAP": self.mAP,
            "mAP@50": self.mAP50,
            "mAP@75": self.mAP75,
            "mean_iou": self.mean_iou,
            "subset_mAP": dict(self.subset_mAP),
        }


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def _match(gt: GroundTruthSet, det: DetectionSet, class_id: int, threshold: float):
    """Greedy matching in score order; returns (tp flags, matched IoUs, n_gt)."""
    gts = {k: [b for b in v if b.class_id == class_id] for k, v in gt.images.items()}
    n_gt = sum(len(v) for v in gts.values())
    cand = [(i, d) for i, d in enumerate(det.detections) if d.box.class_id == class_id]
    cand.sort(key=lambda t: (-t[1].score, t[1].image_id, t[0]))
    used = {k: [False] * len(v) for k, v in gts.items()}
    tp = np.zeros(len(cand), dtype=bool)
    ious = []
    for n, (_, d) in enumerate(cand):
        boxes = gts.get(d.image_id, [])
        best, best_j = -1.0, -1
        for j, g in enumerate(boxes):
            if used[d.image_id][j]:
                continue
            o = iou(d.box, g)
            if o > best:
                best, best_j = o, j
        if best_j >= 0 and best >= threshold:
            used[d.image_id][best_j] = True
            tp[n] = True
            ious.append(best)
    return tp, ious, n_gt


def _interpolated_ap(tp: np.ndarray, n_gt: int) -> float:
    if n_gt == 0 or tp.size == 0:
        return 0.0
    ctp = np.cumsum(tp)
    cfp = np.cumsum(~tp)
    recall = ctp / n_gt
    precision = ctp / (ctp + cfp)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    sampled = np.where(idx < recall.size, envelope[np.minimum(idx, recall.size - 1)], 0.0)
    return float(sampled.mean())


def average_precision(gt: GroundTruthSet, det: DetectionSet, class_id: int, threshold: float) -> float:
    """101-point interpolated AP of one class at one IoU threshold."""
    if not 0.0 < threshold <= 1.0:
        raise EvaluationError(f"IoU threshold {threshold} outside (0, 1]")
    if class_id not in gt.classes:
        raise EvaluationError(f"unknown class {class_id}; ground truth has {gt.classes}")
    tp, _, n_gt = _match(gt, det, class_id, threshold)
    return _interpolated_ap(tp, n_gt)


def _map(gt: GroundTruthSet, det: DetectionSet, thresholds: Iterable[float]) -> float:
    aps = [average_precision(gt, det, c, t) for c in gt.classes for t in thresholds]
    return float(np.mean(aps)) if aps else 0.0


def evaluate(
    gt: GroundTruthSet,
    det: DetectionSet,
    subsets: Mapping[str, str] | None = None,
) -> MetricsReport:
    """mAP over classes and the ten IoU thresholds, mAP@50/75, mean matched IoU.

    ``subsets`` maps image ids to tags (defaults to the ground truth's own
    tags); each tag gets the mAP of the images carrying it.
    """
    if not gt.classes:
        raise EvaluationError("ground truth contains no boxes")
    for d in det.detections:
        if d.image_id not in gt.images:
            raise EvaluationError(f"detection references unknown image_id {d.image_id!r}")

    ious: list[float] = []
    for c in gt.classes:
        ious.extend(_match(gt, det, c, 0.5)[1])

    subsets = gt.subsets if subsets is None else subsets
    per_subset = {}
    for tag in sorted(set(subsets.values())):
        ids = [k for k, v in subsets.items() if v == tag]
        sub_gt = gt.restrict(ids)
        per_subset[tag] = _map(sub_gt, det.restrict(ids), IOU_THRESHOLDS) if sub_gt.classes else 0.0

    return MetricsReport(
        mAP=_map(gt, det, IOU_THRESHOLDS),
        mAP50=_map(gt, det, (0.5,)),
        mAP75=_map(gt, det, (0.75,)),
        mean_iou=float(np.mean(ious)) if ious else 0.0,
        subset_mAP=per_subset,
    )


def load_ground_truth(path: str | Path) -> GroundTruthSet:
    return GroundTruthSet.from_dict(_read_json(path))


def load_detections(path: str | Path) -> DetectionSet:
    return DetectionSet.from_dict(_read_json(path))


def _read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise EvaluationError(f"{path}: invalid JSON ({exc})") from exc
