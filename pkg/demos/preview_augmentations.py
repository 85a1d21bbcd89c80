"""
Previewing the augmentation catalog
===================================

Builds a synthetic target on a dark background, tiles every catalog
augmentation applied to it, then runs one chain with its boxes.
Output goes to ``demo_out/`` (or the directory given as first argument).
"""

import sys
from pathlib import Path

import numpy as np

from augforge.augment import ChainConfig, apply_chain, preview_grid
from augforge.imaging import BBox, Sample, mask_hull, save_image

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# a bright, slightly textured box-shaped "spacecraft" on a dark starfield
rng = np.random.default_rng(0)
h, w = 120, 192
image = rng.random((h, w, 3)) * 0.08
mask = np.zeros((h, w), dtype=bool)
mask[40:85, 60:140] = True
image[mask] = 0.45 + 0.4 * rng.random((mask.sum(), 3))
sample = Sample(image, mask, (BBox(60, 40, 140, 85),), "target")

# one tile per catalog kind; the background kind needs a pool of scenes
pool = [rng.random((h, w, 3)) * np.array([0.2, 0.4, 0.8])]
labels = preview_grid(sample, out / "preview.png", seed=7, pool=pool)
print(f"preview grid with {len(labels)} tiles -> {out / 'preview.png'}")

# a chain applies each active kind with its probability, in canonical order
cfg = ChainConfig.build(["specular", "affine", "random_crop", "additive_gaussian_noise"], probability=1.0)
augmented = apply_chain(cfg, sample, (7, 0), pool=pool)
save_image(augmented.image, out / "chain.png")

# geometric kinds carry the box along; it stays on the mask outline
print("box after chain: ", [round(v, 1) for v in augmented.boxes[0].as_tuple()])
print("mask hull:       ", mask_hull(augmented.mask))
