"""Geometric augmentations that move pixels, masks and boxes together."""

from __future__ import annotations

import math
from typing import Any, Mapping

import numpy as np

from ..imaging import BBox, Sample, clip_box, resample
from .catalog import AugmentationKind, validate_params


def rotate_point(x: float, y: float, angle_deg: float, width: int, height: int) -> tuple[float, float]:
    """Rotate a continuous pixel coordinate about the frame centre.

    Positive angles map ``(x, y) -> (y, w - x)`` at 90 degrees on a square frame.
    """
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    cx, cy = width / 2.0, height / 2.0
    dx, dy = x - cx, y - cy
    return cx + c * dx + s * dy, cy - s * dx + c * dy


def rotate_box(box: BBox, angle_deg: float, width: int, height: int) -> BBox | None:
    """Box of the rotated ``box`` in the rotated frame; ``None`` if nothing of it stays visible.

    At multiples of 90 degrees the rotated box is axis aligned and its
    corners map exactly.  At any other angle the result is the pixel hull of
    the output pixels whose centres fall inside the rotated box, which is the
    same test the nearest-neighbour mask resampling applies.  The exact
    corner hull would overshoot the rasterised object near sharp corners and
    past the frame edge.
    """
    xs, ys = zip(*(
        rotate_point(x, y, angle_deg, width, height)
        for x in (box.x_min, box.x_max)
        for y in (box.y_min, box.y_max)
    ))
    if angle_deg % 90.0 == 0.0:
        return clip_box(BBox(min(xs), min(ys), max(xs), max(ys), box.class_id), width, height)
    c0, c1 = max(int(math.floor(min(xs))), 0), min(int(math.ceil(max(xs))), width)
    r0, r1 = max(int(math.floor(min(ys))), 0), min(int(math.ceil(max(ys))), height)
    if c0 >= c1 or r0 >= r1:
        return None
    rows, cols = np.mgrid[r0:r1, c0:c1].astype(np.float64)
    src_x, src_y = _inverse_rotate(cols + 0.5, rows + 0.5, angle_deg, width, height)
    eps = 1e-9
    inside = (src_x >= box.x_min - eps) & (src_x < box.x_max - eps)
    inside &= (src_y >= box.y_min - eps) & (src_y < box.y_max - eps)
    if not inside.any():
        return None
    rr, cc = np.nonzero(inside)
    return BBox(c0 + cc.min(), r0 + rr.min(), c0 + cc.max() + 1, r0 + rr.max() + 1, box.class_id)


def _inverse_rotate(
    x: np.ndarray, y: np.ndarray, angle_deg: float, width: int, height: int
) -> tuple[np.ndarray, np.ndarray]:
    t = math.radians(angle_deg)
    c, sn = math.cos(t), math.sin(t)
    dx, dy = x - width / 2.0, y - height / 2.0
    return width / 2.0 + c * dx - sn * dy, height / 2.0 + sn * dx + c * dy


def rotate_sample(s: Sample, angle_deg: float) -> Sample:
    if angle_deg == 0:
        return s.evolve(image=s.image.copy(), mask=None if s.mask is None else s.mask.copy())
    h, w = s.height, s.width
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    # inverse rotation of each output pixel centre, as array indices
    src_x, src_y = _inverse_rotate(xs + 0.5, ys + 0.5, angle_deg, w, h)
    src_x, src_y = src_x - 0.5, src_y - 0.5
    image = np.clip(resample(s.image, src_y, src_x, order=1), 0.0, 1.0)
    mask = None
    if s.mask is not None:
        mask = resample(s.mask.astype(np.float64), src_y, src_x, order=0) > 0.5
    boxes = [b for b in (rotate_box(b, angle_deg, w, h) for b in s.boxes) if b is not None]
    return s.evolve(image=image, mask=mask, boxes=tuple(boxes))


def apply_affine(s: Sample, params: Mapping[str, Any] | None, rng: np.random.Generator) -> Sample:
    """Rotate by an angle drawn uniformly from ``rotation_range_deg``.

    Bilinear image resampling with zero padding, nearest-neighbour mask
    resampling; boxes follow :func:`rotate_box`.
    """
    p = validate_params(AugmentationKind.AFFINE, params)
    lo, hi = p["rotation_range_deg"]
    return rotate_sample(s, float(rng.uniform(lo, hi)))


def visible_fraction(box: BBox, window: tuple[float, float, float, float]) -> float:
    x0, y0, x1, y1 = window
    iw = min(box.x_max, x1) - max(box.x_min, x0)
    ih = min(box.y_max, y1) - max(box.y_min, y0)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih / box.area


def crop_sample(s: Sample, window: tuple[float, float, float, float]) -> Sample:
    """Crop to ``window = (x0, y0, x1, y1)`` and resize back to the original frame."""
    h, w = s.height, s.width
    x0, y0, x1, y1 = window
    if (x0, y0, x1, y1) == (0, 0, w, h):
        return s.evolve(image=s.image.copy(), mask=None if s.mask is None else s.mask.copy())
    sx, sy = w / (x1 - x0), h / (y1 - y0)
    src_x = x0 + (np.arange(w) + 0.5) / sx - 0.5
    src_y = y0 + (np.arange(h) + 0.5) / sy - 0.5
    rr, cc = np.meshgrid(np.clip(src_y, 0, h - 1), np.clip(src_x, 0, w - 1), indexing="ij")
    image = np.clip(resample(s.image, rr, cc, order=1), 0.0, 1.0)
    mask = None
    if s.mask is not None:
        mask = resample(s.mask.astype(np.float64), rr, cc, order=0) > 0.5
    boxes = []
    for b in s.boxes:
        moved = BBox((b.x_min - x0) * sx, (b.y_min - y0) * sy, (b.x_max - x0) * sx,
                     (b.y_max - y0) * sy, b.class_id)
        clipped = clip_box(moved, w, h)
        if clipped is not None:
            boxes.append(clipped)
    return s.evolve(image=image, mask=mask, boxes=tuple(boxes))


def propose_crop(
    s: Sample, params: Mapping[str, Any], rng: np.random.Generator
) -> tuple[float, float, float, float] | None:
    """Draw crop windows until one keeps ``min_visible`` of every box; ``None`` if all fail."""
    w, h = s.width, s.height
    lo, hi = params["scale_range"]
    for _ in range(params["max_attempts"]):
        scale = float(rng.uniform(lo, hi))
        cw, ch = scale * w, scale * h
        x0 = float(rng.uniform(0.0, w - cw))
        y0 = float(rng.uniform(0.0, h - ch))
        window = (x0, y0, x0 + cw, y0 + ch)
        if all(visible_fraction(b, window) >= params["min_visible"] for b in s.boxes):
            return window
    return None


def apply_random_crop(s: Sample, params: Mapping[str, Any] | None, rng: np.random.Generator) -> Sample:
    p = validate_params(AugmentationKind.RANDOM_CROP, params)
    window = propose_crop(s, p, rng)
    if window is None:
        return s.evolve(image=s.image.copy(), mask=None if s.mask is None else s.mask.copy())
    return crop_sample(s, window)
