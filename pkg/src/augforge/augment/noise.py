"""Procedural noise fields: 2-D simplex noise and diamond-square plasma."""

from __future__ import annotations

import math

import numpy as np

_F2 = 0.5 * (math.sqrt(3.0) - 1.0)
_G2 = (3.0 - math.sqrt(3.0)) / 6.0

_GRAD = np.array(
    [[1, 1], [-1, 1], [1, -1], [-1, -1],
     [1, 0], [-1, 0], [1, 0], [-1, 0],
     [0, 1], [0, -1], [0, 1], [0, -1]],
    dtype=np.float64,
)


def simplex2(x: np.ndarray, y: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Vectorised 2-D simplex noise in roughly ``[-1, 1]``.

    ``perm`` is a permutation of ``0..255`` repeated twice (length 512).
    """
    s = (x + y) * _F2
    i = np.floor(x + s)
    j = np.floor(y + s)
    t = (i + j) * _G2
    x0 = x - (i - t)
    y0 = y - (j - t)

    upper = x0 > y0
    i1 = upper.astype(np.int64)
    j1 = 1 - i1

    x1 = x0 - i1 + _G2
    y1 = y0 - j1 + _G2
    x2 = x0 - 1.0 + 2.0 * _G2
    y2 = y0 - 1.0 + 2.0 * _G2

    ii = i.astype(np.int64) & 255
    jj = j.astype(np.int64) & 255
    g0 = perm[ii + perm[jj]] % 12
    g1 = perm[ii + i1 + perm[jj + j1]] % 12
    g2 = perm[ii + 1 + perm[jj + 1]] % 12

    total = np.zeros_like(x, dtype=np.float64)
    for gx, gy, g in ((x0, y0, g0), (x1, y1, g1), (x2, y2, g2)):
        falloff = np.maximum(0.5 - gx * gx - gy * gy, 0.0)
        total += falloff**4 * (_GRAD[g, 0] * gx + _GRAD[g, 1] * gy)
    return 70.0 * total


def simplex_field(
    height: int,
    width: int,
    rng: np.random.Generator,
    octaves: int = 2,
    feature_scale: float = 64.0,
) -> np.ndarray:
    """Fractal simplex noise mapped to ``[0, 1]``.

    ``feature_scale`` is the wavelength of the first octave in pixels; each
    further octave halves the wavelength and the amplitude.
    """
    perm = rng.permutation(256)
    perm = np.concatenate([perm, perm])
    ox, oy = rng.uniform(0.0, 256.0, size=2)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    field = np.zeros((height, width))
    amp, norm, freq = 1.0, 0.0, 1.0 / feature_scale
    for _ in range(octaves):
        field += amp * simplex2(xs * freq + ox, ys * freq + oy, perm)
        norm += amp
        amp *= 0.5
        freq *= 2.0
    return np.clip((field / norm + 1.0) * 0.5, 0.0, 1.0)


def plasma_fractal(size: int, rng: np.random.Generator, decay: float = 3.0) -> np.ndarray:
    """Diamond-square height map of side ``size`` (a power of two), scaled to ``[0, 1]``."""
    if size < 2 or size & (size - 1):
        raise ValueError(f"plasma size must be a power of two >= 2, got {size}")
    grid = np.zeros((size, size))
    step = size
    wibble = 100.0

    def jitter(arr: np.ndarray) -> np.ndarray:
        return arr / 4.0 + wibble * rng.uniform(-wibble, wibble, arr.shape)

    while step >= 2:
        half = step // 2
        # squares: centre of every step x step cell
        corners = grid[0:size:step, 0:size:step]
        acc = corners + np.roll(corners, -1, axis=0)
        acc = acc + np.roll(acc, -1, axis=1)
        grid[half:size:step, half:size:step] = jitter(acc)
        # diamonds: edge midpoints
        centres = grid[half:size:step, half:size:step]
        corners = grid[0:size:step, 0:size:step]
        left = centres + np.roll(centres, 1, axis=0)
        top = corners + np.roll(corners, -1, axis=1)
        grid[0:size:step, half:size:step] = jitter(left + top)
        left = centres + np.roll(centres, 1, axis=1)
        top = corners + np.roll(corners, -1, axis=0)
        grid[half:size:step, 0:size:step] = jitter(left + top)
        step = half
        wibble /= decay

    grid -= grid.min()
    peak = grid.max()
    return grid / peak if peak > 0 else grid
