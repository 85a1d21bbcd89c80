"""Univariate Tree-structured Parzen Estimator over binary categorical parameters."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..imaging import derive_stream
from .space import SearchSettings, SearchSpace
from .storage import COMPLETE, TrialRecord

# Stream tags keep sampler draws apart from augmentation streams of the same trial.
_STARTUP_TAG = "sampler/startup"
_TPE_TAG = "sampler/tpe"


def categorical_estimator(
    observed: Sequence[str], categories: Sequence[str], prior_weight: float
) -> np.ndarray:
    """Category probabilities ``(count + prior) / (n + prior * K)``."""
    counts = np.array([sum(o == c for o in observed) for c in categories], dtype=np.float64)
    return (counts + prior_weight) / (len(observed) + prior_weight * len(categories))


def split_trials(
    trials: Sequence[TrialRecord], settings: SearchSettings
) -> tuple[list[TrialRecord], list[TrialRecord]]:
    """Good/bad split of completed trials, best values first, ties by lower trial id."""
    done = [t for t in trials if t.state == COMPLETE]
    done.sort(key=lambda t: (-t.value, t.trial_id))
    n_good = settings.gamma(len(done))
    return done[:n_good], done[n_good:]


def estimators(
    trials: Sequence[TrialRecord], space: SearchSpace, settings: SearchSettings, name: str
) -> tuple[np.ndarray, np.ndarray]:
    """``(l, g)`` category distributions of parameter ``name``."""
    good, bad = split_trials(trials, settings)
    cats = space.categories
    l = categorical_estimator([t.params[name] for t in good], cats, settings.prior_weight)
    g = categorical_estimator([t.params[name] for t in bad], cats, settings.prior_weight)
    return l, g


def sample_uniform(space: SearchSpace, settings: SearchSettings, trial_id: int) -> dict[str, str]:
    rng = derive_stream(settings.study_seed, trial_id, _STARTUP_TAG, 0)
    cats = space.categories
    picks = rng.integers(len(cats), size=len(space))
    return {name: cats[i] for name, i in zip(space.names, picks)}


def suggest(
    trials: Sequence[TrialRecord], space: SearchSpace, settings: SearchSettings, trial_id: int
) -> dict[str, str]:
    """Next assignment for ``trial_id`` given the trial log.

    Uniform during startup; afterwards each parameter takes the candidate
    (drawn from ``l``) with the largest ``l / g``.  Only completed trials
    inform the estimators, so running and failed trials are ignored.

    If that assignment is already in the log, the per-parameter candidates
    are zipped into ``n_candidates`` joint assignments and the one with the
    highest summed log ratio that has not been tried yet is returned.
    Without this, binary parameters lock onto one assignment forever once
    it leads the good set.
    """
    n_complete = sum(t.state == COMPLETE for t in trials)
    if n_complete < settings.n_startup_trials:
        return sample_uniform(space, settings, trial_id)

    good, bad = split_trials(trials, settings)
    cats = space.categories
    draws = np.empty((settings.n_candidates, len(space)), dtype=np.int64)
    scores = np.empty((settings.n_candidates, len(space)))
    for index, name in enumerate(space.names):
        l = categorical_estimator([t.params[name] for t in good], cats, settings.prior_weight)
        g = categorical_estimator([t.params[name] for t in bad], cats, settings.prior_weight)
        rng = derive_stream(settings.study_seed, trial_id, _TPE_TAG, index)
        draws[:, index] = rng.choice(len(cats), size=settings.n_candidates, p=l)
        scores[:, index] = np.log(l[draws[:, index]]) - np.log(g[draws[:, index]])

    # argmax returns the first maximum: ties go to the earliest candidate
    best = tuple(cats[draws[int(np.argmax(scores[:, j])), j]] for j in range(len(space)))
    tried = {tuple(t.params[n] for n in space.names) for t in trials}
    if best in tried:
        for k in np.argsort(-scores.sum(axis=1), kind="stable"):
            joint = tuple(cats[i] for i in draws[k])
            if joint not in tried:
                best = joint
                break
    return dict(zip(space.names, best))
