"""Tiled overview of every catalog augmentation applied to one source sample."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from ..imaging import Sample, derive_stream, resize, save_image
from .catalog import CATALOG
from .chain import apply_kind
from .mixing import BackgroundPool
from .noise import plasma_fractal

# Tiles that could not be rendered (mask-dependent kind, no mask) show the
# unmodified source inside a red frame of this width.
MARKER_COLOR = (1.0, 0.0, 0.0)
MARKER_WIDTH = 3


def _default_pool(width: int, height: int, seed: int) -> list[np.ndarray]:
    rng = derive_stream(seed, 0, "preview-background", 0)
    size = 1 << max(1, math.ceil(math.log2(max(width, height))))
    layers = [plasma_fractal(size, rng)[:height, :width] for _ in range(3)]
    return [np.stack(layers, axis=2) * 0.6]


def _mark(tile: np.ndarray) -> np.ndarray:
    tile = tile.copy()
    m = min(MARKER_WIDTH, tile.shape[0] // 2, tile.shape[1] // 2) or 1
    for sl in (np.s_[:m, :], np.s_[-m:, :], np.s_[:, :m], np.s_[:, -m:]):
        tile[sl] = MARKER_COLOR
    return tile


def render_tiles(
    s: Sample,
    seed: int = 0,
    pool: BackgroundPool | Sequence[np.ndarray] | None = None,
) -> list[tuple[str, np.ndarray, bool]]:
    """``(label, image, degraded)`` for the source followed by each catalog kind."""
    if pool is None:
        pool = _default_pool(s.width, s.height, seed)
    has_fg = s.mask is not None and bool(s.mask.any())
    tiles = [("source", s.image, False)]
    for index, kind in enumerate(CATALOG):
        if kind.needs_mask and not has_fg:
            tiles.append((kind.value, s.image, True))
            continue
        rng = derive_stream(seed, 0, s.id, index)
        out = apply_kind(kind, s, None, rng, pool)
        tiles.append((kind.value, out.image, False))
    return tiles


def preview_grid(
    s: Sample,
    out: str | Path,
    seed: int = 0,
    pool: BackgroundPool | Sequence[np.ndarray] | None = None,
    columns: int = 8,
    tile_width: int | None = 320,
) -> list[str]:
    """Write the tiled preview PNG and return the tile labels in order."""
    tiles = render_tiles(s, seed, pool)
    tw = s.width if tile_width is None else min(tile_width, s.width)
    th = max(1, round(s.height * tw / s.width))
    rows = math.ceil(len(tiles) / columns)
    canvas = np.zeros((rows * th, columns * tw, 3))
    for i, (_, img, degraded) in enumerate(tiles):
        tile = resize(img, tw, th)
        if degraded:
            tile = _mark(tile)
        r, c = divmod(i, columns)
        canvas[r * th:(r + 1) * th, c * tw:(c + 1) * tw] = tile
    save_image(canvas, out)
    return [label for label, _, _ in tiles]

