from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..augment.catalog import CATALOG, ConfigError

ACTIVE = "active"
INACTIVE = "inactive"
CATEGORIES = (ACTIVE, INACTIVE)


def default_gamma(n: int) -> int:
    """Size of the good set for ``n`` completed trials."""
    return min(int(math.ceil(0.1 * n)), 25)


@dataclass(frozen=True)
class SearchSpace:
    """Binary active/inactive choice per augmentation kind."""

    names: tuple[str, ...] = tuple(k.value for k in CATALOG)

    def __post_init__(self) -> None:
        names = tuple(self.names)
        if not names:
            raise ConfigError("search space is empty")
        if len(set(names)) != len(names):
            raise ConfigError("search space has duplicate parameter names")
        known = {k.value for k in CATALOG}
        unknown = [n for n in names if n not in known]
        if unknown:
            raise ConfigError(f"search space names unknown augmentations: {unknown}")
        object.__setattr__(self, "names", names)

    @property
    def categories(self) -> tuple[str, ...]:
        return CATEGORIES

    def __len__(self) -> int:
        return len(self.names)

    def validate(self, assignment: dict[str, str]) -> dict[str, str]:
        if set(assignment) != set(self.names):
            raise ConfigError("assignment does not cover the search space exactly")
        for name, value in assignment.items():
            if value not in CATEGORIES:
                raise ConfigError(f"{name}: {value!r} is not one of {CATEGORIES}")
        return {n: assignment[n] for n in self.names}

    @classmethod
    def load(cls, path: str | Path) -> "SearchSpace":
        """Read ``{"params": [name, ...]}`` (or a bare JSON list of names)."""
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        names = doc.get("params") if isinstance(doc, dict) else doc
        if not isinstance(names, list):
            raise ConfigError(f'{path}: expected {{"params": [...]}}')
        return cls(tuple(str(n) for n in names))

    @classmethod
    def of(cls, names: Iterable[str]) -> "SearchSpace":
        return cls(tuple(names))


@dataclass(frozen=True)
class SearchSettings:
    n_trials: int = 400
    n_startup_trials: int = 64
    n_candidates: int = 24
    prior_weight: float = 1.0
    study_seed: int = 0
    parallelism: int = 1
    probability: float = 0.3
    gamma: Callable[[int], int] = field(default=default_gamma, compare=False)

    def __post_init__(self) -> None:
        if not 0 < self.n_startup_trials <= self.n_trials:
            raise ConfigError(
                f"need 0 < startup trials ({self.n_startup_trials}) <= trials ({self.n_trials})"
            )
        if self.n_candidates < 1:
            raise ConfigError("n_candidates must be >= 1")
        if self.prior_weight <= 0:
            raise ConfigError("prior_weight must be positive")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if not 0.0 <= self.probability <= 1.0:
            raise ConfigError("probability must be within [0, 1]")


def count_active(params: dict[str, str], names: Sequence[str] | None = None) -> int:
    names = params.keys() if names is None else names
    return sum(params[n] == ACTIVE for n in names)
