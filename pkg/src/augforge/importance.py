"""Functional-ANOVA importance of binary search parameters.

A random regression forest is fitted to ``(assignment, objective)`` pairs.
Every tree is a piecewise-constant function over leaf cells of the binary
input cube, so its first-order marginals under the uniform input
distribution can be summed exactly over the leaves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .imaging import derive_stream
from .search.space import ACTIVE
from .search.storage import COMPLETE, TrialRecord, replay


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class ForestSettings:
    n_trees: int = 64
    max_depth: int = 64
    n_repeats: int = 8
    min_samples_leaf: int = 2
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.max_depth < 1 or self.n_repeats < 1:
            raise AnalysisError("n_trees, max_depth and n_repeats must all be >= 1")
        if self.min_samples_leaf < 1:
            raise AnalysisError("min_samples_leaf must be >= 1")


@dataclass
class Leaf:
    value: float
    constraints: dict[int, int]  # feature index -> 0/1 on the path to this leaf


@dataclass
class Tree:
    leaves: list[Leaf]
    depth: int

    def predict(self, x: Sequence[int]) -> float:
        for leaf in self.leaves:
            if all(x[f] == v for f, v in leaf.constraints.items()):
                return leaf.value
        raise AssertionError("leaf cells do not cover the input space")

    def _weights(self) -> np.ndarray:
        return np.array([0.5 ** len(leaf.constraints) for leaf in self.leaves])

    @property
    def mean(self) -> float:
        return float(self._weights() @ np.array([leaf.value for leaf in self.leaves]))

    @property
    def variance(self) -> float:
        vals = np.array([leaf.value for leaf in self.leaves])
        return float(self._weights() @ (vals - self.mean) ** 2)

    def marginal(self, feature: int) -> np.ndarray:
        """Mean prediction with ``feature`` clamped to 0 and to 1."""
        out = np.zeros(2)
        for leaf in self.leaves:
            free = len(leaf.constraints) - (feature in leaf.constraints)
            w = 0.5 ** free
            if feature in leaf.constraints:
                out[leaf.constraints[feature]] += w * leaf.value
            else:
                out += w * leaf.value
        return out

    def first_order(self, feature: int) -> float:
        """Variance of the feature's marginal over the tree's total variance (0 if flat)."""
        total = self.variance
        if total <= 0:
            return 0.0
        m = self.marginal(feature)
        return float(min(max(np.mean((m - self.mean) ** 2) / total, 0.0), 1.0))


def subset_size(d: int) -> int:
    return int(math.ceil(math.sqrt(d)))


def _sse(n: np.ndarray, s: np.ndarray, q: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 0, q - s * s / np.maximum(n, 1), 0.0)


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_depth: int,
    min_samples_leaf: int,
) -> Tree:
    """Grow one regression tree on binary features.

    At each node the features are visited in random order; the first
    ``ceil(sqrt(d))`` that are not constant within the node are candidates
    and the one with the largest variance reduction is split on.
    """
    n_sub = subset_size(X.shape[1])
    leaves: list[Leaf] = []
    deepest = 0

    def grow(idx: np.ndarray, depth: int, constraints: dict[int, int]) -> None:
        nonlocal deepest
        yn = y[idx]
        if depth >= max_depth or idx.size < 2 * min_samples_leaf or np.ptp(yn) == 0:
            leaves.append(Leaf(float(yn.mean()), constraints))
            deepest = max(deepest, depth)
            return
        Xn = X[idx]
        n1 = Xn.sum(axis=0)
        n0 = idx.size - n1
        s_all, q_all = yn.sum(), (yn * yn).sum()
        s1, q1 = yn @ Xn, (yn * yn) @ Xn
        gain = _sse(np.float64(idx.size), s_all, q_all) - _sse(n1, s1, q1) - _sse(n0, s_all - s1, q_all - q1)
        tol = 1e-12 * max(abs(q_all), 1e-300)

        best_f, best_gain, seen = -1, tol, 0
        for f in rng.permutation(X.shape[1]):
            if n1[f] == 0 or n0[f] == 0:
                continue
            seen += 1
            if min(n1[f], n0[f]) >= min_samples_leaf and gain[f] > best_gain:
                best_f, best_gain = int(f), gain[f]
            if seen >= n_sub:
                break
        if best_f < 0:
            leaves.append(Leaf(float(yn.mean()), constraints))
            deepest = max(deepest, depth)
            return
        on = Xn[:, best_f] == 1
        grow(idx[~on], depth + 1, {**constraints, best_f: 0})
        grow(idx[on], depth + 1, {**constraints, best_f: 1})

    grow(np.arange(X.shape[0]), 0, {})
    return Tree(leaves, deepest)


@dataclass
class Forest:
    names: tuple[str, ...]
    trees: list[Tree]

    def predict(self, assignment: Mapping[str, str]) -> float:
        x = [int(assignment[n] == ACTIVE) for n in self.names]
        return float(np.mean([t.predict(x) for t in self.trees]))

    @property
    def zero_variance(self) -> bool:
        return all(t.variance <= 0 for t in self.trees)


def _encode(
    data: Iterable[tuple[Mapping[str, str], float]], names: Sequence[str] | None
) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    rows = list(data)
    if not rows:
        raise AnalysisError("no data")
    names = tuple(names) if names is not None else tuple(rows[0][0])
    X = np.array([[int(a[n] == ACTIVE) for n in names] for a, _ in rows], dtype=np.int64)
    y = np.array([float(v) for _, v in rows])
    # canonical row order makes results independent of the input order
    order = np.lexsort((y,) + tuple(X[:, j] for j in reversed(range(X.shape[1]))))
    return names, X[order], y[order]


def fit_forest(
    data: Iterable[tuple[Mapping[str, str], float]],
    settings: ForestSettings = ForestSettings(),
    seed: int | None = None,
    names: Sequence[str] | None = None,
) -> Forest:
    names, X, y = _encode(data, names)
    if X.shape[0] < 2:
        raise AnalysisError(f"need at least 2 complete trials, got {X.shape[0]}")
    if not np.any(X != X[0]):
        raise AnalysisError("all trials share the same assignment; nothing to analyse")
    rng = derive_stream(settings.seed if seed is None else seed, 0, "forest", 0)
    trees = []
    for _ in range(settings.n_trees):
        idx = rng.integers(0, X.shape[0], size=X.shape[0]) if settings.bootstrap else np.arange(X.shape[0])
        trees.append(fit_tree(X[idx], y[idx], rng, settings.max_depth, settings.min_samples_leaf))
    return Forest(names, trees)


def importance(forest: Forest, param: str) -> float:
    """Mean first-order variance fraction of ``param`` over trees with non-zero variance."""
    if param not in forest.names:
        raise AnalysisError(f"unknown parameter {param!r}")
    j = forest.names.index(param)
    fractions = [t.first_order(j) for t in forest.trees if t.variance > 0]
    return float(np.mean(fractions)) if fractions else 0.0


@dataclass
class ParamImportance:
    name: str
    mean: float
    std: float


@dataclass
class ImportanceReport:
    params: list[ParamImportance]
    zero_variance: bool
    per_repeat: list[dict[str, float]] = field(default_factory=list, repr=False)

    def top(self, k: int = 20) -> list[ParamImportance]:
        return self.params[:k]

    @property
    def truncated(self) -> bool:
        return len(self.params) > 20

    def to_dict(self, top: int | None = None) -> dict:
        params = self.params if top is None else self.params[:top]
        return {
            "params": [{"name": p.name, "mean": p.mean, "std": p.std} for p in params],
            "zero_variance": self.zero_variance,
        }

    def save(self, path: str | Path, top: int | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(top), indent=2) + "\n", encoding="utf-8")


def _trial_data(source) -> tuple[list[tuple[dict, float]], Sequence[str] | None]:
    names = None
    if isinstance(source, (str, Path)):
        if not Path(source).is_file():
            raise FileNotFoundError(f"study database not found: {source}")
        trials = replay(source)
    elif hasattr(source, "trials") and hasattr(source, "space"):
        trials, names = source.trials, source.space.names
    else:
        trials = list(source)
    if trials and isinstance(trials[0], TrialRecord):
        data = [(t.params, t.value) for t in trials if t.state == COMPLETE]
    else:
        data = [(dict(a), float(v)) for a, v in trials]
    return data, names


def analyze_study(source, settings: ForestSettings = ForestSettings()) -> ImportanceReport:
    """Importance mean and spread over ``n_repeats`` forests with derived seeds.

    ``source`` may be a :class:`~augforge.search.Study`, a study DB path, a
    list of trial records, or a list of ``(assignment, value)`` pairs.
    """
    data, names = _trial_data(source)
    if not data:
        raise AnalysisError("need at least 10 complete trials, got 0")
    names = tuple(names) if names is not None else tuple(data[0][0])
    need = max(10, 2 * len(names))
    if len(data) < need:
        raise AnalysisError(f"need at least {need} complete trials, got {len(data)}")

    per_repeat = []
    zero = True
    for r in range(settings.n_repeats):
        seed = int(derive_stream(settings.seed, r, "importance", 0).integers(0, 2**63 - 1))
        forest = fit_forest(data, settings, seed=seed, names=names)
        zero = zero and forest.zero_variance
        per_repeat.append({n: importance(forest, n) for n in names})

    table = np.array([[rep[n] for n in names] for rep in per_repeat])
    means, stds = table.mean(axis=0), table.std(axis=0)
    params = [ParamImportance(n, float(m), float(s)) for n, m, s in zip(names, means, stds)]
    params.sort(key=lambda p: (-p.mean, p.name))
    return ImportanceReport(params, zero, per_repeat)
