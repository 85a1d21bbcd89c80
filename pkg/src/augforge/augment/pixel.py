"""Photometric augmentations: color, kernel and information-deletion kinds.

Every op takes an ``(h, w, 3)`` float image and returns a new one clipped to
``[0, 1]``; the input is never modified.  Random draws come only from the
``rng`` argument.
"""

from __future__ import annotations

import math
from typing import Any, Callable, Mapping

import numpy as np
from scipy import ndimage
from skimage import color as skcolor
from skimage.segmentation import slic

from ..imaging import luminance
from .catalog import AugmentationKind, ConfigError, validate_params
from .noise import simplex_field

K = AugmentationKind

# Severity constants for full-resolution images from the common corruption benchmark.
CONTRAST_SEVERITY = {1: 0.4, 2: 0.3}
SATURATE_SEVERITY = {1: (0.3, 0.0), 2: (0.1, 0.0)}

_IDENTITY3 = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 0]], dtype=np.float64)
_LAPLACE = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)
_SMOOTH = np.array([[1, 1, 1], [1, 5, 1], [1, 1, 1]], dtype=np.float64) / 13.0


def _uniform(rng: np.random.Generator, bounds) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def _pick(rng: np.random.Generator, options) -> Any:
    return options[int(rng.integers(len(options)))]


def _clip(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def _gray3(img: np.ndarray) -> np.ndarray:
    return np.repeat(luminance(img)[..., None], 3, axis=2)


def convolve(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Channel-wise 2-D correlation with edge replication."""
    return ndimage.correlate(img, kernel[:, :, None], mode="nearest")


def edge_image(img: np.ndarray) -> np.ndarray:
    """Absolute Laplacian response, clipped; zero on constant regions."""
    return _clip(np.abs(convolve(img, _LAPLACE)))


def motion_kernel(size: int, angle_deg: float, sigma: float | None = None) -> np.ndarray:
    """Normalised line kernel through the centre of a ``size x size`` window.

    Cells are weighted by ``1 - distance`` to the line (antialiasing); with
    ``sigma`` the weight also decays as a Gaussian along the line.
    """
    r = (size - 1) / 2.0
    theta = math.radians(angle_deg)
    dx, dy = math.cos(theta), math.sin(theta)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64) - r
    along = xs * dx + ys * dy
    across = np.abs(-xs * dy + ys * dx)
    weight = np.maximum(0.0, 1.0 - across) * (np.abs(along) <= r + 0.5)
    if sigma is not None:
        weight *= np.exp(-0.5 * (along / sigma) ** 2)
    if weight.sum() <= 0:
        weight[int(r), int(r)] = 1.0
    return weight / weight.sum()


def simplex_blend(img: np.ndarray, m: np.ndarray) -> np.ndarray:
    """``m * edges + (1 - m) * img`` with a per-pixel blend mask ``m``."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 2:
        m = m[..., None]
    return _clip(m * edge_image(img) + (1.0 - m) * img)


def segment_means(img: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-pixel mean color of the pixel's segment.

    Computed as ``min + mean(x - min)`` so constant segments stay exact.
    """
    idx = np.unique(labels)
    out = np.empty_like(img)
    for c in range(3):
        ch = img[..., c]
        lo = np.asarray(ndimage.minimum(ch, labels, idx))
        lut_lo = np.zeros(labels.max() + 1)
        lut_lo[idx] = lo
        base = lut_lo[labels]
        dev = np.asarray(ndimage.mean(ch - base, labels, idx))
        lut_dev = np.zeros(labels.max() + 1)
        lut_dev[idx] = dev
        out[..., c] = base + lut_dev[labels]
    return out


def replace_segments(img: np.ndarray, labels: np.ndarray, replace: np.ndarray) -> np.ndarray:
    """Swap pixels of segments flagged in ``replace`` (indexed by label) for their mean."""
    sel = np.asarray(replace, dtype=bool)[labels]
    if not sel.any():
        return img.copy()
    return _clip(np.where(sel[..., None], segment_means(img, labels), img))


def superpixel_labels(img: np.ndarray, n_segments: int) -> np.ndarray:
    if img.shape[0] * img.shape[1] < 2:
        return np.zeros(img.shape[:2], dtype=np.int64)
    return slic(
        img, n_segments=n_segments, compactness=10.0, start_label=0,
        channel_axis=-1, enforce_connectivity=True,
    ).astype(np.int64)


# -- color ---------------------------------------------------------------------------


def _add_value(img, p, rng):
    n = 3 if p["per_channel"] else 1
    delta = rng.uniform(p["range"][0], p["range"][1], size=n)
    return _clip(img + delta)


def _invert(img, p, rng):
    if p["per_channel"]:
        flip = rng.random(3) < 0.5
        return np.where(flip, 1.0 - img, img)
    return 1.0 - img


def _multiply(img, p, rng):
    n = 3 if p["per_channel"] else 1
    factor = rng.uniform(p["range"][0], p["range"][1], size=n)
    return _clip(img * factor)


def _multiply_brightness(img, p, rng):
    # Scaling HSV value by m with clipping equals scaling RGB by min(m, 1/V).
    m = _uniform(rng, p["range"])
    v = img.max(axis=2, keepdims=True)
    with np.errstate(divide="ignore"):
        factor = np.minimum(m, np.where(v > 0, 1.0 / v, np.inf))
    return _clip(img * factor)


def _enhance_color(img, p, rng):
    f = _uniform(rng, p["range"])
    gray = _gray3(img)
    return _clip(gray + f * (img - gray))


def _grayscale(img, p, rng):
    alpha = _uniform(rng, p["range"])
    return _clip((1.0 - alpha) * img + alpha * _gray3(img))


def _contrast(img, p, rng):
    c = CONTRAST_SEVERITY[_pick(rng, p["severities"])]
    means = img.mean(axis=(0, 1), keepdims=True)
    return _clip((img - means) * c + means)


def _linear_contrast(img, p, rng):
    n = 3 if p["per_channel"] else 1
    alpha = rng.uniform(p["range"][0], p["range"][1], size=n)
    return _clip(0.5 + alpha * (img - 0.5))


def _enhance_contrast(img, p, rng):
    f = _uniform(rng, p["range"])
    mean = luminance(img).mean()
    return _clip(mean + f * (img - mean))


def _saturate(img, p, rng):
    scale, shift = SATURATE_SEVERITY[_pick(rng, p["severities"])]
    hsv = skcolor.rgb2hsv(img)
    hsv[..., 1] = np.clip(hsv[..., 1] * scale + shift, 0.0, 1.0)
    return _clip(skcolor.hsv2rgb(hsv))


def _enhance_brightness(img, p, rng):
    return _clip(img * _uniform(rng, p["range"]))


# -- kernel ---------------------------------------------------------------------------


def _gaussian_blur(img, p, rng):
    sigma = _uniform(rng, p["sigma_range"])
    if sigma <= 0:
        return img.copy()
    return _clip(ndimage.gaussian_filter(img, sigma=(sigma, sigma, 0), mode="nearest"))


def _average_blur(img, p, rng):
    k = _pick(rng, p["sizes"])
    return _clip(ndimage.uniform_filter(img, size=(k, k, 1), mode="nearest"))


def _median_blur(img, p, rng):
    k = _pick(rng, p["sizes"])
    return ndimage.median_filter(img, size=(k, k, 1), mode="nearest")


def _motion_blur(img, p, rng):
    k = _pick(rng, p["sizes"])
    angle = _uniform(rng, p["angle_range"])
    return _clip(convolve(img, motion_kernel(k, angle)))


def _emboss(img, p, rng):
    alpha = _uniform(rng, p["alpha_range"])
    s = _uniform(rng, p["strength_range"])
    kernel = np.array([[-1 - s, -s, 0], [-s, 1, s], [0, s, 1 + s]])
    return _clip(convolve(img, (1.0 - alpha) * _IDENTITY3 + alpha * kernel))


def _edge_detect(img, p, rng):
    alpha = _uniform(rng, p["alpha_range"])
    return _clip((1.0 - alpha) * img + alpha * edge_image(img))


def _enhance_sharpness(img, p, rng):
    f = _uniform(rng, p["range"])
    smooth = convolve(img, _SMOOTH)
    return _clip(smooth + f * (img - smooth))


def _additive_gaussian_noise(img, p, rng):
    sigma = _uniform(rng, p["sigma_range"])
    h, w = img.shape[:2]
    shape = (h, w, 3) if p["per_channel"] else (h, w, 1)
    return _clip(img + rng.normal(0.0, sigma, size=shape))


# -- information deletion --------------------------------------------------------------


def _super_pixels(img, p, rng):
    if p["replace_prob"] <= 0:
        return img.copy()
    labels = superpixel_labels(img, p["n_segments"])
    replace = rng.random(int(labels.max()) + 1) < p["replace_prob"]
    return replace_segments(img, labels, replace)


def _simplex_noise(img, p, rng):
    m = simplex_field(img.shape[0], img.shape[1], rng, p["octaves"], p["feature_scale"])
    return simplex_blend(img, m)


def _dropout(img, p, rng):
    frac = _uniform(rng, p["fraction_range"])
    h, w = img.shape[:2]
    shape = (h, w, 3) if p["per_channel"] else (h, w, 1)
    keep = rng.random(shape) >= frac
    return img * keep


def _coarse_dropout(img, p, rng):
    h, w = img.shape[:2]
    out = img.copy()
    lo, hi = int(p["count_range"][0]), int(p["count_range"][1])
    for _ in range(int(rng.integers(lo, hi + 1))):
        rw = max(1, int(round(rng.uniform(0.0, p["max_size_frac"]) * w)))
        rh = max(1, int(round(rng.uniform(0.0, p["max_size_frac"]) * h)))
        x0 = int(rng.integers(0, w - rw + 1))
        y0 = int(rng.integers(0, h - rh + 1))
        if p["per_channel"]:
            chans = np.flatnonzero(rng.random(3) < 0.5)
            if chans.size == 0:
                chans = np.array([int(rng.integers(3))])
        else:
            chans = np.arange(3)
        out[y0:y0 + rh, x0:x0 + rw, chans] = 0.0
    return out


PIXEL_OPS: dict[AugmentationKind, Callable[[np.ndarray, dict, np.random.Generator], np.ndarray]] = {
    K.ADD_VALUE: _add_value,
    K.INVERT: _invert,
    K.MULTIPLY: _multiply,
    K.MULTIPLY_BRIGHTNESS: _multiply_brightness,
    K.ENHANCE_COLOR: _enhance_color,
    K.GRAYSCALE: _grayscale,
    K.CONTRAST: _contrast,
    K.LINEAR_CONTRAST: _linear_contrast,
    K.ENHANCE_CONTRAST: _enhance_contrast,
    K.SATURATE: _saturate,
    K.ENHANCE_BRIGHTNESS: _enhance_brightness,
    K.GAUSSIAN_BLUR: _gaussian_blur,
    K.AVERAGE_BLUR: _average_blur,
    K.MEDIAN_BLUR: _median_blur,
    K.MOTION_BLUR: _motion_blur,
    K.EMBOSS: _emboss,
    K.EDGE_DETECT: _edge_detect,
    K.ENHANCE_SHARPNESS: _enhance_sharpness,
    K.ADDITIVE_GAUSSIAN_NOISE: _additive_gaussian_noise,
    K.SUPER_PIXELS: _super_pixels,
    K.SIMPLEX_NOISE: _simplex_noise,
    K.DROPOUT: _dropout,
    K.COARSE_DROPOUT: _coarse_dropout,
}


def apply_color_op(
    kind: AugmentationKind | str,
    img: np.ndarray,
    params: Mapping[str, Any] | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Apply one color, kernel or deletion augmentation.

    ``params`` are merged over the kind's defaults and range-checked; an
    out-of-range value raises :class:`ConfigError`.
    """
    kind = AugmentationKind(kind)
    if kind not in PIXEL_OPS:
        raise ConfigError(f"{kind.value} is not a color, kernel or deletion augmentation")
    p = validate_params(kind, params)
    return PIXEL_OPS[kind](img, p, rng)
