"""Raster, annotation and randomness primitives shared by the whole package.

Images are plain ``numpy`` arrays of shape ``(h, w, 3)`` with ``float64``
values in ``[0, 1]``; masks are ``bool`` arrays of shape ``(h, w)``.  Boxes
use half-open float pixel coordinates, so a box covering pixel columns
``0..9`` is ``x_min=0, x_max=10``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image as PILImage
from scipy import ndimage

RngStream = np.random.Generator

_MASK64 = (1 << 64) - 1


class DecodeError(ValueError):
    """Raised when an image file cannot be decoded into an RGB raster."""


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    class_id: int = 0

    def __post_init__(self) -> None:
        for name in ("x_min", "y_min", "x_max", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "class_id", int(self.class_id))
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self.as_tuple()}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min,
            "y_min": self.y_min,
            "x_max": self.x_max,
            "y_max": self.y_max,
            "class_id": self.class_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BBox":
        return cls(
            float(d["x_min"]),
            float(d["y_min"]),
            float(d["x_max"]),
            float(d["y_max"]),
            int(d.get("class_id", 0)),
        )


def clip_box(box: BBox, width: int, height: int) -> BBox | None:
    """Clip ``box`` to the ``[0, width] x [0, height]`` frame.

    Returns ``None`` when nothing of the box is left inside the frame.
    """
    x0 = min(max(box.x_min, 0.0), width)
    y0 = min(max(box.y_min, 0.0), height)
    x1 = min(max(box.x_max, 0.0), width)
    y1 = min(max(box.y_max, 0.0), height)
    if x0 >= x1 or y0 >= y1:
        return None
    return BBox(x0, y0, x1, y1, box.class_id)


def check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if not np.issubdtype(img.dtype, np.floating):
        raise ValueError(f"expected a floating image, got {img.dtype}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image values must be finite and within [0, 1]")
    return img


@dataclass(frozen=True)
class Sample:
    """An image with its optional foreground mask and ground-truth boxes."""

    image: np.ndarray
    mask: np.ndarray | None = None
    boxes: tuple[BBox, ...] = ()
    id: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        check_image(self.image)
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if self.mask is not None:
            if self.mask.shape != self.image.shape[:2]:
                raise ValueError(
                    f"mask shape {self.mask.shape} does not match image {self.image.shape[:2]}"
                )
            if self.mask.dtype != bool:
                object.__setattr__(self, "mask", self.mask.astype(bool))

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]

    def evolve(self, **changes) -> "Sample":
        return replace(self, **changes)


def luminance(img: np.ndarray) -> np.ndarray:
    return img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114


def _key_part(value: int | str) -> int:
    if isinstance(value, str):
        digest = hashlib.blake2b(value.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    return int(value) & _MASK64


def derive_stream(
    study_seed: int, trial_id: int, sample_id: int | str, aug_index: int
) -> RngStream:
    """Return a counter-based (Philox) generator keyed by the 4-tuple.

    String sample ids are hashed to 64 bits first.  The result depends only
    on the key, so work may be scheduled in any order or on any thread.
    """
    key = [_key_part(v) for v in (study_seed, trial_id, sample_id, aug_index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def load_image(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        with PILImage.open(path) as im:
            fmt, mode = im.format, im.mode
            if fmt != "PNG":
                raise DecodeError(f"{path}: unsupported format {fmt!r}, expected PNG")
            if mode not in ("RGB", "L"):
                raise DecodeError(
                    f"{path}: unsupported PNG mode {mode!r} (only 8-bit RGB or grayscale)"
                )
            arr = np.asarray(im, dtype=np.uint8)
    except DecodeError:
        raise
    except (OSError, ValueError) as exc:
        raise DecodeError(f"{path}: cannot decode image ({exc})") from exc
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return arr.astype(np.float64) / 255.0


def load_mask(path: str | Path) -> np.ndarray:
    """Single-channel PNG mask; any byte > 0 is foreground."""
    path = Path(path)
    try:
        with PILImage.open(path) as im:
            if im.format != "PNG":
                raise DecodeError(f"{path}: unsupported format {im.format!r}, expected PNG")
            if im.mode not in ("L", "1", "RGB"):
                raise DecodeError(f"{path}: unsupported mask mode {im.mode!r}")
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
    except DecodeError:
        raise
    except (OSError, ValueError) as exc:
        raise DecodeError(f"{path}: cannot decode mask ({exc})") from exc
    return arr > 0


def quantize(img: np.ndarray) -> np.ndarray:
    # round half away from zero; np.round would round 127.5 to even
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img: np.ndarray, path: str | Path) -> None:
    check_image(img)
    PILImage.fromarray(quantize(img), mode="RGB").save(Path(path), format="PNG")


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    PILImage.fromarray(data, mode="L").save(Path(path), format="PNG")


def resample(
    arr: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    order: int,
) -> np.ndarray:
    """Sample ``arr`` at continuous array-index coordinates with zero padding.

    ``arr`` is ``(h, w)`` or ``(h, w, c)``; ``rows``/``cols`` share the output shape.
    """
    if arr.ndim == 2:
        return ndimage.map_coordinates(arr, [rows, cols], order=order, mode="constant", cval=0)
    out = np.empty(rows.shape + (arr.shape[2],), dtype=arr.dtype)
    for c in range(arr.shape[2]):
        out[..., c] = ndimage.map_coordinates(
            arr[..., c], [rows, cols], order=order, mode="constant", cval=0
        )
    return out


def resize(img: np.ndarray, width: int, height: int, order: int = 1) -> np.ndarray:
    """Resize by sampling at pixel centres (align-corners off)."""
    h, w = img.shape[:2]
    if (w, h) == (width, height):
        return img.copy()
    rows = (np.arange(height) + 0.5) * (h / height) - 0.5
    cols = (np.arange(width) + 0.5) * (w / width) - 0.5
    rr, cc = np.meshgrid(np.clip(rows, 0, h - 1), np.clip(cols, 0, w - 1), indexing="ij")
    src = img.astype(np.float64) if img.dtype == bool else img
    out = resample(src, rr, cc, order)
    if img.dtype == bool:
        return out > 0.5
    return np.clip(out, 0.0, 1.0)


def mask_hull(mask: np.ndarray) -> tuple[int, int, int, int] | None:
    """Half-open bounding box ``(x0, y0, x1, y1)`` of the foreground pixels."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1


def boxes_from_mask(mask: np.ndarray, class_id: int = 0) -> Sequence[BBox]:
    hull = mask_hull(mask)
    return [] if hull is None else [BBox(*map(float, hull), class_id)]
