from .catalog import (
    CATALOG,
    DEFAULT_PROBABILITY,
    AugmentationKind,
    AugmentationSpec,
    ChainConfig,
    ConfigError,
    default_params,
    validate_params,
)
from .chain import ExternalAugmentation, apply_chain, apply_kind
from .geometric import apply_affine, apply_random_crop, crop_sample, rotate_sample
from .mixing import BackgroundPool, apply_background, apply_fog, apply_snow
from .pixel import apply_color_op, simplex_blend
from .preview import preview_grid
from .space import apply_shadow, apply_specular

__all__ = [
    "CATALOG",
    "DEFAULT_PROBABILITY",
    "AugmentationKind",
    "AugmentationSpec",
    "BackgroundPool",
    "ChainConfig",
    "ConfigError",
    "ExternalAugmentation",
    "apply_affine",
    "apply_background",
    "apply_chain",
    "apply_color_op",
    "apply_fog",
    "apply_kind",
    "apply_random_crop",
    "apply_shadow",
    "apply_snow",
    "apply_specular",
    "crop_sample",
    "default_params",
    "preview_grid",
    "rotate_sample",
    "simplex_blend",
    "validate_params",
]
