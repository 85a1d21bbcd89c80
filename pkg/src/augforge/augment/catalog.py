"""Augmentation kinds, their default parameters and the chain configuration."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping


class ConfigError(ValueError):
    """Invalid augmentation configuration or parameters."""


class AugmentationKind(str, Enum):
    # Declaration order is the canonical chain order.
    SPECULAR = "specular"
    SHADOW = "shadow"
    ADD_VALUE = "add_value"
    INVERT = "invert"
    MULTIPLY = "multiply"
    MULTIPLY_BRIGHTNESS = "multiply_brightness"
    ENHANCE_COLOR = "enhance_color"
    GRAYSCALE = "grayscale"
    CONTRAST = "contrast"
    LINEAR_CONTRAST = "linear_contrast"
    ENHANCE_CONTRAST = "enhance_contrast"
    SATURATE = "saturate"
    ENHANCE_BRIGHTNESS = "enhance_brightness"
    BACKGROUND = "background"
    SNOW = "snow"
    FOG = "fog"
    AFFINE = "affine"
    RANDOM_CROP = "random_crop"
    GAUSSIAN_BLUR = "gaussian_blur"
    AVERAGE_BLUR = "average_blur"
    MEDIAN_BLUR = "median_blur"
    MOTION_BLUR = "motion_blur"
    EMBOSS = "emboss"
    EDGE_DETECT = "edge_detect"
    ENHANCE_SHARPNESS = "enhance_sharpness"
    ADDITIVE_GAUSSIAN_NOISE = "additive_gaussian_noise"
    SUPER_PIXELS = "super_pixels"
    SIMPLEX_NOISE = "simplex_noise"
    DROPOUT = "dropout"
    COARSE_DROPOUT = "coarse_dropout"

    @property
    def group(self) -> str:
        return _GROUPS[self]

    @property
    def geometric(self) -> bool:
        return _GROUPS[self] == "geometric"

    @property
    def needs_mask(self) -> bool:
        return self in MASK_KINDS


K = AugmentationKind

CATALOG: tuple[AugmentationKind, ...] = tuple(AugmentationKind)

_GROUPS = {
    **{k: "space" for k in (K.SPECULAR, K.SHADOW)},
    **{
        k: "color"
        for k in (
            K.ADD_VALUE, K.INVERT, K.MULTIPLY, K.MULTIPLY_BRIGHTNESS, K.ENHANCE_COLOR,
            K.GRAYSCALE, K.CONTRAST, K.LINEAR_CONTRAST, K.ENHANCE_CONTRAST, K.SATURATE,
            K.ENHANCE_BRIGHTNESS,
        )
    },
    **{k: "mixing" for k in (K.BACKGROUND, K.SNOW, K.FOG)},
    **{k: "geometric" for k in (K.AFFINE, K.RANDOM_CROP)},
    **{
        k: "kernel"
        for k in (
            K.GAUSSIAN_BLUR, K.AVERAGE_BLUR, K.MEDIAN_BLUR, K.MOTION_BLUR, K.EMBOSS,
            K.EDGE_DETECT, K.ENHANCE_SHARPNESS, K.ADDITIVE_GAUSSIAN_NOISE,
        )
    },
    **{k: "deletion" for k in (K.SUPER_PIXELS, K.SIMPLEX_NOISE, K.DROPOUT, K.COARSE_DROPOUT)},
}

MASK_KINDS = frozenset({K.SPECULAR, K.SHADOW, K.BACKGROUND})

DEFAULT_PROBABILITY = 0.3


# Parameter schema.  Each entry: name -> (default, validator kind, bounds).
#   "range":  2-list [lo, hi] with bound_lo <= lo <= hi <= bound_hi
#   "float":  scalar within bounds (inclusive)
#   "int":    integer within bounds (inclusive)
#   "choices": non-empty list drawn from the allowed set
#   "bool"
_SCHEMA: dict[AugmentationKind, dict[str, tuple[Any, str, Any]]] = {
    K.SPECULAR: {"peak": (1.0, "float", (0.0, 1.0)), "sigma_frac": (0.25, "float", (1e-6, 10.0))},
    K.SHADOW: {
        "threshold": (0.5, "float", (1e-6, 1.0 - 1e-6)),
        "factor": (0.5, "float", (1e-6, 1.0)),
    },
    K.ADD_VALUE: {"range": ([-0.2, 0.2], "range", (-1.0, 1.0)), "per_channel": (False, "bool", None)},
    K.INVERT: {"per_channel": (False, "bool", None)},
    K.MULTIPLY: {"range": ([0.7, 1.3], "range", (0.0, 4.0)), "per_channel": (False, "bool", None)},
    K.MULTIPLY_BRIGHTNESS: {"range": ([0.7, 1.3], "range", (0.0, 4.0))},
    K.ENHANCE_COLOR: {"range": ([0.5, 1.5], "range", (0.0, 3.0))},
    K.GRAYSCALE: {"range": ([0.0, 1.0], "range", (0.0, 1.0))},
    K.CONTRAST: {"severities": ([1, 2], "choices", (1, 2))},
    K.LINEAR_CONTRAST: {"range": ([0.6, 1.4], "range", (0.0, 3.0)), "per_channel": (False, "bool", None)},
    K.ENHANCE_CONTRAST: {"range": ([0.5, 1.5], "range", (0.0, 3.0))},
    K.SATURATE: {"severities": ([1, 2], "choices", (1, 2))},
    K.ENHANCE_BRIGHTNESS: {"range": ([0.5, 1.5], "range", (0.0, 3.0))},
    K.BACKGROUND: {},
    K.SNOW: {"severities": ([1, 2], "choices", (1, 2))},
    K.FOG: {"severities": ([1, 2], "choices", (1, 2))},
    K.AFFINE: {"rotation_range_deg": ([-45.0, 45.0], "range", (-180.0, 180.0))},
    K.RANDOM_CROP: {
        "min_visible": (0.5, "float", (0.0, 1.0)),
        "scale_range": ([0.5, 1.0], "range", (0.05, 1.0)),
        "max_attempts": (20, "int", (1, 1000)),
    },
    K.GAUSSIAN_BLUR: {"sigma_range": ([0.5, 2.0], "range", (0.0, 20.0))},
    K.AVERAGE_BLUR: {"sizes": ([3, 5, 7], "choices", (1, 3, 5, 7, 9, 11))},
    K.MEDIAN_BLUR: {"sizes": ([3, 5, 7], "choices", (1, 3, 5, 7, 9, 11))},
    K.MOTION_BLUR: {
        "sizes": ([3, 5, 7], "choices", (3, 5, 7, 9, 11, 13, 15)),
        "angle_range": ([0.0, 360.0], "range", (-360.0, 360.0)),
    },
    K.EMBOSS: {
        "alpha_range": ([0.0, 1.0], "range", (0.0, 1.0)),
        "strength_range": ([0.5, 1.5], "range", (0.0, 3.0)),
    },
    K.EDGE_DETECT: {"alpha_range": ([0.0, 0.75], "range", (0.0, 1.0))},
    K.ENHANCE_SHARPNESS: {"range": ([0.5, 1.5], "range", (0.0, 3.0))},
    K.ADDITIVE_GAUSSIAN_NOISE: {
        "sigma_range": ([0.01, 0.1], "range", (0.0, 1.0)),
        "per_channel": (True, "bool", None),
    },
    K.SUPER_PIXELS: {
        "n_segments": (128, "int", (1, 100_000)),
        "replace_prob": (0.5, "float", (0.0, 1.0)),
    },
    K.SIMPLEX_NOISE: {
        "octaves": (2, "int", (1, 4)),
        "feature_scale": (64.0, "float", (1.0, 4096.0)),
    },
    K.DROPOUT: {
        "fraction_range": ([0.01, 0.1], "range", (0.0, 1.0)),
        "per_channel": (False, "bool", None),
    },
    K.COARSE_DROPOUT: {
        "count_range": ([1, 5], "range", (1, 100)),
        "max_size_frac": (0.2, "float", (0.0, 1.0)),
        "per_channel": (False, "bool", None),
    },
}


def default_params(kind: AugmentationKind | str) -> dict[str, Any]:
    kind = AugmentationKind(kind)
    return {name: copy.deepcopy(entry[0]) for name, entry in _SCHEMA[kind].items()}


def _check_param(kind: AugmentationKind, name: str, value: Any, rule: str, bounds: Any) -> Any:
    where = f"{kind.value}.{name}"
    if rule == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean, got {value!r}")
        return value
    if rule == "choices":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value]
        values = list(value) if isinstance(value, (list, tuple)) else None
        if not values or any(v not in bounds for v in values):
            raise ConfigError(f"{where}: expected a non-empty subset of {list(bounds)}, got {value!r}")
        return [int(v) for v in values]
    lo, hi = bounds
    if rule == "range":
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"{where}: expected [low, high], got {value!r}")
        a, b = float(value[0]), float(value[1])
        if not (lo <= a <= b <= hi):
            raise ConfigError(f"{where}: [{a}, {b}] outside allowed [{lo}, {hi}] or reversed")
        return [a, b]
    if rule == "int":
        if isinstance(value, bool) or not float(value).is_integer():
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
    if not (lo <= value <= hi):
        raise ConfigError(f"{where}: {value} outside allowed [{lo}, {hi}]")
    return value


def validate_params(kind: AugmentationKind | str, params: Mapping[str, Any] | None) -> dict[str, Any]:
    """Merge ``params`` over the defaults of ``kind`` and range-check the result."""
    kind = AugmentationKind(kind)
    schema = _SCHEMA[kind]
    params = dict(params or {})
    unknown = set(params) - set(schema)
    if unknown:
        raise ConfigError(f"{kind.value}: unknown parameter(s) {sorted(unknown)}")
    merged = default_params(kind)
    merged.update(params)
    return {
        name: _check_param(kind, name, merged[name], rule, bounds)
        for name, (_, rule, bounds) in schema.items()
    }


@dataclass(frozen=True)
class AugmentationSpec:
    kind: AugmentationKind
    active: bool = False
    probability: float = DEFAULT_PROBABILITY
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        try:
            kind = AugmentationKind(self.kind)
        except ValueError:
            raise ConfigError(f"unknown augmentation kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if not 0.0 <= float(self.probability) <= 1.0:
            raise ConfigError(f"{kind.value}: probability {self.probability} outside [0, 1]")
        object.__setattr__(self, "probability", float(self.probability))
        object.__setattr__(self, "params", validate_params(kind, self.params))

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "active": self.active,
            "probability": self.probability,
            "params": copy.deepcopy(self.params),
        }


@dataclass(frozen=True)
class ChainConfig:
    """One spec per catalog kind, in canonical order."""

    augmentations: tuple[AugmentationSpec, ...] = ()

    def __post_init__(self) -> None:
        specs = tuple(self.augmentations)
        kinds = [s.kind for s in specs]
        if len(set(kinds)) != len(kinds):
            dupes = sorted({k.value for k in kinds if kinds.count(k) > 1})
            raise ConfigError(f"duplicate augmentation kinds: {dupes}")
        missing = [k for k in CATALOG if k not in kinds]
        by_kind = {s.kind: s for s in specs}
        for k in missing:
            by_kind[k] = AugmentationSpec(k, active=False)
        object.__setattr__(self, "augmentations", tuple(by_kind[k] for k in CATALOG))

    def __getitem__(self, kind: AugmentationKind | str) -> AugmentationSpec:
        return self.augmentations[CATALOG.index(AugmentationKind(kind))]

    @property
    def active_kinds(self) -> list[AugmentationKind]:
        return [s.kind for s in self.augmentations if s.active]

    @classmethod
    def build(
        cls,
        active: Iterable[AugmentationKind | str] = (),
        probability: float = DEFAULT_PROBABILITY,
        params: Mapping[str, Mapping[str, Any]] | None = None,
    ) -> "ChainConfig":
        active = {AugmentationKind(k) for k in active}
        params = params or {}
        return cls(
            tuple(
                AugmentationSpec(k, k in active, probability, dict(params.get(k.value, {})))
                for k in CATALOG
            )
        )

    @classmethod
    def from_assignment(
        cls, assignment: Mapping[str, str], probability: float = DEFAULT_PROBABILITY
    ) -> "ChainConfig":
        """Chain from a search assignment ``{kind: "active" | "inactive"}``."""
        for name, value in assignment.items():
            if value not in ("active", "inactive"):
                raise ConfigError(f"{name}: expected 'active' or 'inactive', got {value!r}")
        return cls.build([k for k, v in assignment.items() if v == "active"], probability)

    def to_dict(self) -> dict[str, Any]:
        return {"augmentations": [s.to_dict() for s in self.augmentations]}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ChainConfig":
        if not isinstance(doc, Mapping) or not isinstance(doc.get("augmentations"), list):
            raise ConfigError('chain config must be an object with an "augmentations" list')
        specs = []
        for entry in doc["augmentations"]:
            if not isinstance(entry, Mapping) or "kind" not in entry:
                raise ConfigError(f"malformed augmentation entry: {entry!r}")
            specs.append(
                AugmentationSpec(
                    entry["kind"],
                    bool(entry.get("active", False)),
                    entry.get("probability", DEFAULT_PROBABILITY),
                    dict(entry.get("params") or {}),
                )
            )
        return cls(tuple(specs))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ChainConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"chain config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path: str | Path) -> "ChainConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(indent=2) + "\n", encoding="utf-8")
