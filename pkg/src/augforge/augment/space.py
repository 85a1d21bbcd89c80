"""Orbit-specific augmentations driven by the foreground mask."""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from ..imaging import luminance, mask_hull
from .catalog import AugmentationKind, ConfigError, validate_params


def _require_foreground(mask: np.ndarray | None, name: str) -> np.ndarray:
    if mask is None or not np.any(mask):
        raise ConfigError(f"{name} needs a mask with at least one foreground pixel")
    return np.asarray(mask, dtype=bool)


def specular_center(img: np.ndarray, mask: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """Pick a bloom centre ``(row, col)`` uniformly among the brightest decile of foreground pixels."""
    rows, cols = np.nonzero(mask)
    lum = luminance(img)[rows, cols]
    cutoff = np.quantile(lum, 0.9)
    bright = np.flatnonzero(lum >= cutoff)
    pick = bright[int(rng.integers(bright.size))]
    return int(rows[pick]), int(cols[pick])


def specular_sigma(mask: np.ndarray, sigma_frac: float) -> float:
    x0, y0, x1, y1 = mask_hull(mask)
    return sigma_frac * float(np.hypot(x1 - x0, y1 - y0))


def bloom(shape: tuple[int, int], center: tuple[int, int], sigma: float, peak: float) -> np.ndarray:
    rows, cols = np.mgrid[0:shape[0], 0:shape[1]].astype(np.float64)
    d2 = (rows - center[0]) ** 2 + (cols - center[1]) ** 2
    return peak * np.exp(-d2 / (2.0 * sigma * sigma))


def apply_specular(
    img: np.ndarray,
    mask: np.ndarray,
    params: Mapping[str, Any] | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Add an isotropic white Gaussian bloom centred on a bright foreground pixel.

    The bloom width is ``sigma_frac`` times the diagonal of the foreground's
    bounding box and it extends over the whole frame, so the result is never
    darker than the input.
    """
    mask = _require_foreground(mask, "specular")
    p = validate_params(AugmentationKind.SPECULAR, params)
    center = specular_center(img, mask, rng)
    if p["peak"] == 0:
        return img.copy()
    glow = bloom(img.shape[:2], center, specular_sigma(mask, p["sigma_frac"]), p["peak"])
    return np.clip(img + glow[..., None], 0.0, 1.0)


def apply_shadow(
    img: np.ndarray,
    mask: np.ndarray,
    params: Mapping[str, Any] | None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Darken foreground pixels whose luminance is below ``threshold`` by ``factor``.

    Bright foreground and all background pixels are returned untouched.
    """
    mask = _require_foreground(mask, "shadow")
    p = validate_params(AugmentationKind.SHADOW, params)
    dark = mask & (luminance(img) < p["threshold"])
    out = img.copy()
    out[dark] = img[dark] * p["factor"]
    return out
