"""Image-mixing augmentations: background replacement, snow and fog."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..imaging import Sample, load_image, luminance, resize
from .catalog import AugmentationKind, ConfigError, validate_params
from .noise import plasma_fractal
from .pixel import convolve, motion_kernel

# (loc, scale, zoom, threshold, blur radius, blur sigma, blend) for full-size images.
SNOW_SEVERITY = {
    1: (0.1, 0.3, 3.0, 0.5, 10, 4.0, 0.8),
    2: (0.2, 0.3, 2.0, 0.5, 12, 4.0, 0.7),
}
# (amount, plasma decay)
FOG_SEVERITY = {1: (1.5, 2.0), 2: (2.0, 2.0)}


class BackgroundPool:
    """Indexable set of background images, either in memory or a PNG directory."""

    def __init__(self, images: Sequence[np.ndarray] | None = None, paths: Sequence[Path] = ()):
        self._images = list(images or [])
        self._paths = list(paths)
        self._load = lru_cache(maxsize=16)(load_image)

    @classmethod
    def from_dir(cls, root: str | Path) -> "BackgroundPool":
        root = Path(root)
        if not root.is_dir():
            raise ConfigError(f"background pool {root} is not a directory")
        return cls(paths=sorted(root.glob("*.png")))

    def __len__(self) -> int:
        return len(self._images) + len(self._paths)

    def __getitem__(self, i: int) -> np.ndarray:
        if i < len(self._images):
            return self._images[i]
        return self._load(self._paths[i - len(self._images)])


def apply_background(
    s: Sample,
    pool: BackgroundPool | Sequence[np.ndarray] | None,
    rng: np.random.Generator,
) -> Sample:
    """Replace pixels outside the foreground mask by a random pool image resized to the frame."""
    if s.mask is None:
        raise ConfigError("background augmentation requires a foreground mask")
    if pool is None or len(pool) == 0:
        raise ConfigError("background augmentation requires a non-empty background pool")
    bg = resize(pool[int(rng.integers(len(pool)))], s.width, s.height)
    image = np.where(s.mask[..., None], s.image, bg)
    return s.evolve(image=image)


def _zoom_center(layer: np.ndarray, factor: float) -> np.ndarray:
    h, w = layer.shape
    ch, cw = max(1, int(np.ceil(h / factor))), max(1, int(np.ceil(w / factor)))
    top, left = (h - ch) // 2, (w - cw) // 2
    crop = layer[top:top + ch, left:left + cw]
    return resize(crop, w, h)


def apply_snow(img: np.ndarray, params: Mapping[str, Any] | None, rng: np.random.Generator) -> np.ndarray:
    """Overlay a streaked snow layer and brighten the scene towards white."""
    p = validate_params(AugmentationKind.SNOW, params)
    sev = p["severities"][int(rng.integers(len(p["severities"])))]
    loc, scale, zoom, thresh, radius, sigma, blend = SNOW_SEVERITY[sev]
    h, w = img.shape[:2]
    flakes = np.clip(rng.normal(loc, scale, size=(h, w)), 0.0, 1.0)
    flakes = _zoom_center(flakes, zoom)
    flakes[flakes < thresh] = 0.0
    # streaks: line blur at a steep random angle, Gaussian-weighted along the line
    angle = float(rng.uniform(-135.0, -45.0))
    kernel = motion_kernel(2 * radius + 1, angle, sigma)
    flakes = np.clip(convolve(flakes[..., None], kernel)[..., 0], 0.0, 1.0)
    lifted = np.maximum(img, luminance(img)[..., None] * 1.5 + 0.5)
    base = blend * img + (1.0 - blend) * lifted
    layer = flakes + np.rot90(flakes, 2)
    return np.clip(base + layer[..., None], 0.0, 1.0)


def apply_fog(img: np.ndarray, params: Mapping[str, Any] | None, rng: np.random.Generator) -> np.ndarray:
    """Screen-blend a diamond-square plasma layer over the image.

    ``out = 1 - (1 - img) * (1 - a * fog)`` with opacity ``a = amount / (1 + amount)``.
    """
    p = validate_params(AugmentationKind.FOG, params)
    sev = p["severities"][int(rng.integers(len(p["severities"])))]
    amount, decay = FOG_SEVERITY[sev]
    h, w = img.shape[:2]
    size = 1 << max(1, int(np.ceil(np.log2(max(h, w)))))
    fog = plasma_fractal(size, rng, decay)[:h, :w]
    opacity = amount / (1.0 + amount)
    return np.clip(1.0 - (1.0 - img) * (1.0 - opacity * fog[..., None]), 0.0, 1.0)
