"""Deterministic image augmentation with TPE search, fANOVA importance and COCO-style evaluation."""

from . import augment, evaluation, harness, imaging, importance, search
from .augment import AugmentationKind, ChainConfig, ConfigError, apply_chain, preview_grid
from .evaluation import evaluate
from .imaging import BBox, Sample, derive_stream, load_image, save_image
from .importance import ForestSettings, analyze_study
from .search import SearchSettings, SearchSpace, run_study

__version__ = "0.1.0"

__all__ = [
    "AugmentationKind",
    "BBox",
    "ChainConfig",
    "ConfigError",
    "ForestSettings",
    "Sample",
    "SearchSettings",
    "SearchSpace",
    "analyze_study",
    "apply_chain",
    "augment",
    "derive_stream",
    "evaluate",
    "evaluation",
    "harness",
    "imaging",
    "importance",
    "load_image",
    "preview_grid",
    "run_study",
    "save_image",
    "search",
]
