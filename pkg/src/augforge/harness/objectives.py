"""Objective runners: external training command, closed-form surrogate, detections evaluator.

External protocol: the command receives one JSON document on stdin,
``{"trial_id": int, "seed": int, "chain": <ChainConfig JSON>}``, and must
print one JSON document ``{"objective": float, "metrics": {...}?}`` on stdout.
"""

from __future__ import annotations

import itertools
import json
import math
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..augment.catalog import CATALOG, ChainConfig, ConfigError
from ..evaluation import DetectionSet, EvaluationError, evaluate
from ..imaging import derive_stream
from ..search.study import ObjectiveFailure, ObjectiveResult


def _argv(command: str | Sequence[str]) -> list[str]:
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    if not argv:
        raise ConfigError("objective command is empty")
    return argv


def _call(argv: list[str], request: dict, timeout: float) -> dict:
    try:
        proc = subprocess.run(
            argv,
            input=json.dumps(request),
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        raise ObjectiveFailure("timeout") from None
    except OSError as exc:
        raise ObjectiveFailure(f"cannot start objective: {exc}") from exc
    if proc.returncode != 0:
        tail = proc.stderr.strip().splitlines()[-1:] or [""]
        raise ObjectiveFailure(f"exit status {proc.returncode}: {tail[0][:200]}")
    try:
        doc = json.loads(proc.stdout)
    except json.JSONDecodeError:
        raise ObjectiveFailure(f"malformed output: {proc.stdout.strip()[:200]!r}") from None
    if not isinstance(doc, dict):
        raise ObjectiveFailure(f"malformed output: expected a JSON object, got {type(doc).__name__}")
    return doc


@dataclass
class ExternalObjective:
    """Delegates each trial (e.g. detector training + evaluation) to a subprocess."""

    command: str | Sequence[str]
    timeout: float = 24 * 3600.0

    def __post_init__(self) -> None:
        self.argv = _argv(self.command)
        if self.timeout <= 0:
            raise ConfigError("objective timeout must be positive")

    def __call__(self, chain: ChainConfig, trial_id: int, seed: int) -> ObjectiveResult:
        doc = _call(self.argv, {"trial_id": trial_id, "seed": seed, "chain": chain.to_dict()}, self.timeout)
        value = doc.get("objective")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ObjectiveFailure(f"malformed output: objective is {value!r}")
        metrics = doc.get("metrics")
        return ObjectiveResult(float(value), metrics if isinstance(metrics, dict) else None)


def run_external_objective(cfg: ChainConfig, runner: ExternalObjective, trial_id: int, seed: int = 0) -> float:
    return runner(cfg, trial_id, seed).value


@dataclass
class SurrogateObjective:
    """Closed-form stand-in for detector training.

    ``value = logistic(sum_i w_i x_i + sum_(i,j) v_ij x_i x_j + eps)`` over
    the active indicators ``x``.  ``w`` ~ N(0, 1), ``len(names) // 2``
    random pairs with ``v`` ~ N(0, 1.5), all fixed by ``weights_seed``;
    ``eps`` ~ N(0, noise) is drawn from the trial's own stream.
    """

    weights_seed: int = 0
    noise: float = 0.0
    names: tuple[str, ...] = tuple(k.value for k in CATALOG)
    weights: np.ndarray = field(init=False, repr=False)
    pairs: list[tuple[int, int, float]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.noise < 0:
            raise ConfigError("surrogate noise must be >= 0")
        self.names = tuple(self.names)
        d = len(self.names)
        rng = derive_stream(self.weights_seed, 0, "surrogate/weights", 0)
        self.weights = rng.normal(0.0, 1.0, size=d)
        all_pairs = list(itertools.combinations(range(d), 2))
        n_pairs = min(len(all_pairs), max(1, d // 2)) if all_pairs else 0
        chosen = rng.choice(len(all_pairs), size=n_pairs, replace=False) if n_pairs else []
        self.pairs = [(*all_pairs[int(k)], float(rng.normal(0.0, 1.5))) for k in chosen]

    def indicators(self, chain: ChainConfig) -> np.ndarray:
        active = {k.value for k in chain.active_kinds}
        return np.array([n in active for n in self.names], dtype=np.float64)

    def value(self, x: Sequence[float], eps: float = 0.0) -> float:
        x = np.asarray(x, dtype=np.float64)
        z = float(self.weights @ x) + sum(v * x[i] * x[j] for i, j, v in self.pairs) + eps
        return 1.0 / (1.0 + math.exp(-z))

    def enumerate(self) -> list[tuple[tuple[int, ...], float]]:
        """Noise-free value of every configuration, best first."""
        table = [(bits, self.value(bits)) for bits in itertools.product((0, 1), repeat=len(self.names))]
        table.sort(key=lambda t: -t[1])
        return table

    def __call__(self, chain: ChainConfig, trial_id: int, seed: int) -> ObjectiveResult:
        eps = 0.0
        if self.noise > 0:
            eps = float(derive_stream(seed, trial_id, "surrogate/noise", 0).normal(0.0, self.noise))
        return ObjectiveResult(self.value(self.indicators(chain), eps))


def surrogate_objective(
    cfg: ChainConfig,
    weights_seed: int,
    noise: float = 0.0,
    trial_id: int = 0,
    seed: int = 0,
    names: Sequence[str] | None = None,
) -> float:
    names = tuple(k.value for k in CATALOG) if names is None else tuple(names)
    return SurrogateObjective(weights_seed, noise, names)(cfg, trial_id, seed).value


@dataclass
class DatasetEvalObjective:
    """Runs a command that prints detections JSON, then scores it against a dataset.

    The command gets the external request document plus ``"dataset"`` (the
    dataset root) on stdin and must print ``{"detections": [...]}``.  The
    trial value is the resulting mAP; the full metrics report is kept.
    """

    dataset: str | Path
    command: str | Sequence[str]
    timeout: float = 24 * 3600.0

    def __post_init__(self) -> None:
        from .dataset import load_manifest

        self.argv = _argv(self.command)
        self.manifest = load_manifest(self.dataset)
        self.ground_truth = self.manifest.ground_truth

    def __call__(self, chain: ChainConfig, trial_id: int, seed: int) -> ObjectiveResult:
        request = {
            "trial_id": trial_id,
            "seed": seed,
            "chain": chain.to_dict(),
            "dataset": str(self.manifest.root),
        }
        doc = _call(self.argv, request, self.timeout)
        try:
            report = evaluate(self.ground_truth, DetectionSet.from_dict(doc))
        except EvaluationError as exc:
            raise ObjectiveFailure(f"bad detections: {exc}") from exc
        return ObjectiveResult(report.mAP, report.to_dict())
