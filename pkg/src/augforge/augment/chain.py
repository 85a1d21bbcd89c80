"""Apply a full augmentation chain to a sample."""

from __future__ import annotations

import io
import subprocess
from typing import Any, Mapping, Sequence

import numpy as np
from PIL import Image as PILImage

from ..imaging import Sample, derive_stream, quantize
from .catalog import CATALOG, AugmentationKind, ChainConfig, ConfigError, validate_params
from .geometric import apply_affine, apply_random_crop
from .mixing import BackgroundPool, apply_background, apply_fog, apply_snow
from .pixel import PIXEL_OPS
from .space import apply_shadow, apply_specular

K = AugmentationKind

# Stream index used by the external hook; one past the catalog.
EXTERNAL_SLOT = len(CATALOG)


class ExternalAugmentation:
    """Run an external program as an augmentation: PNG on stdin, PNG on stdout.

    Used for learned augmentations (e.g. style transfer) that live outside
    this package.  The program receives the seed on ``argv`` via ``{seed}``
    placeholders in ``command``.
    """

    def __init__(self, command: Sequence[str], probability: float = 0.3, timeout: float = 120.0):
        if not command:
            raise ConfigError("external augmentation needs a command")
        if not 0.0 <= probability <= 1.0:
            raise ConfigError(f"external augmentation probability {probability} outside [0, 1]")
        self.command = list(command)
        self.probability = probability
        self.timeout = timeout

    def __call__(self, img: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        seed = str(int(rng.integers(0, 2**31 - 1)))
        argv = [part.replace("{seed}", seed) for part in self.command]
        buf = io.BytesIO()
        PILImage.fromarray(quantize(img), mode="RGB").save(buf, format="PNG")
        proc = subprocess.run(argv, input=buf.getvalue(), capture_output=True, timeout=self.timeout)
        if proc.returncode != 0:
            raise RuntimeError(
                f"external augmentation exited with {proc.returncode}: "
                f"{proc.stderr.decode(errors='replace').strip()[:200]}"
            )
        with PILImage.open(io.BytesIO(proc.stdout)) as im:
            out = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
        if out.shape != img.shape:
            raise RuntimeError(f"external augmentation changed image shape {img.shape} -> {out.shape}")
        return out


def _has_foreground(s: Sample) -> bool:
    return s.mask is not None and bool(s.mask.any())


def apply_kind(
    kind: AugmentationKind | str,
    s: Sample,
    params: Mapping[str, Any] | None,
    rng: np.random.Generator,
    pool: BackgroundPool | Sequence[np.ndarray] | None = None,
) -> Sample:
    """Apply a single catalog augmentation unconditionally."""
    kind = AugmentationKind(kind)
    if kind is K.SPECULAR:
        return s.evolve(image=apply_specular(s.image, s.mask, params, rng))
    if kind is K.SHADOW:
        return s.evolve(image=apply_shadow(s.image, s.mask, params, rng))
    if kind is K.BACKGROUND:
        return apply_background(s, pool, rng)
    if kind is K.SNOW:
        return s.evolve(image=apply_snow(s.image, params, rng))
    if kind is K.FOG:
        return s.evolve(image=apply_fog(s.image, params, rng))
    if kind is K.AFFINE:
        return apply_affine(s, params, rng)
    if kind is K.RANDOM_CROP:
        return apply_random_crop(s, params, rng)
    return s.evolve(image=PIXEL_OPS[kind](s.image, validate_params(kind, params), rng))


def apply_chain(
    cfg: ChainConfig,
    s: Sample,
    rng_key: tuple[int, int],
    pool: BackgroundPool | Sequence[np.ndarray] | None = None,
    external: ExternalAugmentation | None = None,
) -> Sample:
    """Run every active spec of ``cfg`` on ``s`` in canonical order.

    Each spec gets its own stream keyed by ``(study_seed, trial_id, s.id,
    index)``; its first draw decides whether the augmentation fires.  Mask
    dependent space augmentations are skipped on samples without foreground.
    """
    study_seed, trial_id = rng_key
    if cfg[K.BACKGROUND].active and cfg[K.BACKGROUND].probability > 0:
        if s.mask is None:
            raise ConfigError(f"sample {s.id!r}: background is active but the sample has no mask")
        if pool is None or len(pool) == 0:
            raise ConfigError("background is active but no background pool is configured")

    out = s
    for index, spec in enumerate(cfg.augmentations):
        if not spec.active or spec.probability <= 0.0:
            continue
        rng = derive_stream(study_seed, trial_id, s.id, index)
        if rng.random() >= spec.probability:
            continue
        if spec.kind in (K.SPECULAR, K.SHADOW) and not _has_foreground(out):
            continue
        out = apply_kind(spec.kind, out, spec.params, rng, pool)

    if external is not None and external.probability > 0:
        rng = derive_stream(study_seed, trial_id, s.id, EXTERNAL_SLOT)
        if rng.random() < external.probability:
            out = out.evolve(image=external(out.image, rng))

    if out is s:
        return s
    return out.evolve(image=np.clip(out.image, 0.0, 1.0))
