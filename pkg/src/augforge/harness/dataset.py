"""Dataset layout and whole-dataset augmentation.

A dataset root holds ``ground_truth.json`` (the evaluation ground-truth
format, with ``width``/``height`` per image), ``images/<id>.png`` and
optionally ``masks/<id>.png``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from PIL import Image as PILImage

from ..augment.catalog import ChainConfig
from ..augment.chain import ExternalAugmentation, apply_chain
from ..augment.mixing import BackgroundPool
from ..evaluation import EvaluationError, GroundTruthSet, load_ground_truth
from ..imaging import Sample, load_image, load_mask, save_image, save_mask


class ManifestError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        head = "; ".join(self.problems[:5])
        more = f" (+{len(self.problems) - 5} more)" if len(self.problems) > 5 else ""
        super().__init__(f"{len(self.problems)} dataset problem(s): {head}{more}")


@dataclass
class DatasetManifest:
    root: Path
    images_dir: Path
    masks_dir: Path | None
    gt_path: Path
    ground_truth: GroundTruthSet = field(repr=False)

    @property
    def subsets(self) -> dict[str, str]:
        return dict(self.ground_truth.subsets)

    @property
    def ids(self) -> list[str]:
        return list(self.ground_truth.images)

    def image_path(self, image_id: str) -> Path:
        return self.images_dir / f"{image_id}.png"

    def mask_path(self, image_id: str) -> Path | None:
        if self.masks_dir is None:
            return None
        p = self.masks_dir / f"{image_id}.png"
        return p if p.exists() else None

    def samples(self) -> Iterator[Sample]:
        for image_id, boxes in self.ground_truth.images.items():
            mp = self.mask_path(image_id)
            yield Sample(
                load_image(self.image_path(image_id)),
                None if mp is None else load_mask(mp),
                tuple(boxes),
                image_id,
            )


def load_manifest(
    root: str | Path,
    images: str = "images",
    masks: str = "masks",
    ground_truth: str = "ground_truth.json",
) -> DatasetManifest:
    """Open and validate a dataset; every problem is collected before raising."""
    root = Path(root)
    gt_path = root / ground_truth
    if not gt_path.is_file():
        raise ManifestError([f"missing ground truth file {gt_path}"])
    try:
        gt = load_ground_truth(gt_path)
    except (EvaluationError, OSError, KeyError, TypeError) as exc:
        raise ManifestError([f"{gt_path}: {exc}"]) from exc
    images_dir = root / images
    masks_dir = root / masks if (root / masks).is_dir() else None
    problems = []
    for image_id in gt.images:
        path = images_dir / f"{image_id}.png"
        if not path.is_file():
            problems.append(f"missing image {path}")
            continue
        try:
            with PILImage.open(path) as im:
                size = im.size
        except OSError as exc:
            problems.append(f"unreadable image {path} ({exc})")
            continue
        if image_id in gt.sizes and gt.sizes[image_id] != size:
            problems.append(f"{path}: size {size} does not match ground truth {gt.sizes[image_id]}")
        if masks_dir is not None and (masks_dir / f"{image_id}.png").is_file():
            with PILImage.open(masks_dir / f"{image_id}.png") as im:
                if im.size != size:
                    problems.append(f"mask for {image_id} has size {im.size}, image has {size}")
        for b in gt.images[image_id]:
            w, h = gt.sizes.get(image_id, size)
            if b.x_min < 0 or b.y_min < 0 or b.x_max > w or b.y_max > h:
                problems.append(f"{image_id}: box {b.as_tuple()} outside the {w}x{h} frame")
    if problems:
        raise ManifestError(problems)
    return DatasetManifest(root, images_dir, masks_dir, gt_path, gt)


def augment_dataset(
    manifest: DatasetManifest,
    cfg: ChainConfig,
    out: str | Path,
    seed: int,
    pool: BackgroundPool | None = None,
    external: ExternalAugmentation | None = None,
) -> GroundTruthSet:
    """Write the augmented images, masks and rewritten ground truth under ``out``.

    Sample streams are keyed by ``(seed, 0, image_id, kind index)``.
    """
    out = Path(out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    if manifest.masks_dir is not None:
        (out / "masks").mkdir(exist_ok=True)
    new_boxes = {}
    for s in manifest.samples():
        aug = apply_chain(cfg, s, (seed, 0), pool=pool, external=external)
        save_image(aug.image, out / "images" / f"{s.id}.png")
        if aug.mask is not None:
            save_mask(aug.mask, out / "masks" / f"{s.id}.png")
        new_boxes[s.id] = list(aug.boxes)
    gt = manifest.ground_truth
    rewritten = GroundTruthSet(new_boxes, dict(gt.subsets), dict(gt.sizes))
    (out / "ground_truth.json").write_text(json.dumps(rewritten.to_dict(), indent=2) + "\n", encoding="utf-8")
    return rewritten


def write_dataset(root: str | Path, samples: Sequence[Sample], subsets: dict[str, str] | None = None) -> DatasetManifest:
    """Materialise in-memory samples in the dataset layout (fixtures, demos)."""
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    if any(s.mask is not None for s in samples):
        (root / "masks").mkdir(exist_ok=True)
    for s in samples:
        save_image(s.image, root / "images" / f"{s.id}.png")
        if s.mask is not None:
            save_mask(s.mask, root / "masks" / f"{s.id}.png")
    gt = GroundTruthSet(
        {s.id: list(s.boxes) for s in samples},
        dict(subsets or {}),
        {s.id: (s.width, s.height) for s in samples},
    )
    (root / "ground_truth.json").write_text(json.dumps(gt.to_dict(), indent=2) + "\n", encoding="utf-8")
    return load_manifest(root)
