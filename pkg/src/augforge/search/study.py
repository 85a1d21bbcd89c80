"""Study loop: suggest a chain, run the objective, record the result."""

from __future__ import annotations

import logging
import math
import threading
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Protocol, Union

from ..augment.catalog import ChainConfig
from .space import SearchSettings, SearchSpace
from .storage import COMPLETE, FAILED, RUNNING, StateError, TrialLog, TrialRecord, now_iso
from .tpe import suggest as tpe_suggest

log = logging.getLogger(__name__)


class ObjectiveFailure(RuntimeError):
    """Raised by an objective to mark the trial failed with ``reason``."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class StudyAborted(RuntimeError):
    pass


@dataclass
class ObjectiveResult:
    value: float
    metrics: dict[str, Any] | None = None


class Objective(Protocol):
    def __call__(self, chain: ChainConfig, trial_id: int, seed: int) -> Union[float, ObjectiveResult]:
        ...


@dataclass
class Study:
    settings: SearchSettings
    space: SearchSpace
    path: Path | None = None
    _log: TrialLog = field(init=False, repr=False)
    _lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self) -> None:
        self._log = TrialLog(self.path)
        for t in self._log.trials:
            self.space.validate(t.params)

    @classmethod
    def open(cls, settings: SearchSettings, space: SearchSpace, path: str | Path | None = None) -> "Study":
        return cls(settings, space, None if path is None else Path(path))

    @property
    def trials(self) -> list[TrialRecord]:
        return list(self._log.trials)

    @property
    def completed(self) -> list[TrialRecord]:
        return [t for t in self._log.trials if t.state == COMPLETE]

    @property
    def best_trial(self) -> TrialRecord | None:
        done = self.completed
        if not done:
            return None
        return min(done, key=lambda t: (-t.value, t.trial_id))

    def suggest(self, trial_id: int | None = None) -> dict[str, str]:
        with self._lock:
            tid = len(self._log.trials) if trial_id is None else trial_id
            return tpe_suggest(self._log.trials, self.space, self.settings, tid)

    def start_trial(self) -> TrialRecord:
        """Suggest parameters for the next trial id and log it as running."""
        with self._lock:
            tid = len(self._log.trials)
            params = tpe_suggest(self._log.trials, self.space, self.settings, tid)
            rec = TrialRecord(tid, params, RUNNING)
            self._log.append(rec)
            return rec

    def record(self, trial: TrialRecord) -> None:
        """Append a finished (or new) trial record; completing twice raises ``StateError``."""
        with self._lock:
            self.space.validate(trial.params)
            self._log.append(trial)

    def finish(
        self,
        trial: TrialRecord,
        value: float | None = None,
        reason: str | None = None,
        metrics: dict[str, Any] | None = None,
    ) -> TrialRecord:
        state = COMPLETE if value is not None else FAILED
        done = replace(
            trial, state=state, value=value, finished_at=now_iso(), reason=reason, metrics=metrics
        )
        self.record(done)
        return done

    def fail_orphans(self) -> None:
        """Mark trials left running by a crashed process as failed."""
        for t in self.trials:
            if t.state == RUNNING:
                self.finish(t, reason="interrupted")

    def chain_for(self, params: dict[str, str]) -> ChainConfig:
        return ChainConfig.from_assignment(params, self.settings.probability)


def _evaluate(objective: Objective, chain: ChainConfig, trial_id: int, seed: int):
    """Run the objective; returns ``(value, reason, metrics)``."""
    try:
        result = objective(chain, trial_id, seed)
    except ObjectiveFailure as exc:
        return None, exc.reason, None
    except Exception as exc:  # objectives are user code; any error fails the trial
        return None, f"{type(exc).__name__}: {exc}", None
    metrics = None
    if isinstance(result, ObjectiveResult):
        value, metrics = result.value, result.metrics
    else:
        value = result
    try:
        value = float(value)
    except (TypeError, ValueError):
        return None, f"non-numeric objective {value!r}", metrics
    if not math.isfinite(value):
        return None, f"non-finite objective {value!r}", metrics
    return value, None, metrics


def _check_abort(study: Study) -> None:
    finished = [t for t in study.trials if t.finished]
    failed = [t for t in finished if t.state == FAILED]
    n_min = min(10, study.settings.n_trials)
    if len(finished) >= n_min and len(failed) * 2 > len(finished):
        reasons = sorted({t.reason or "?" for t in failed[-5:]})
        raise StudyAborted(
            f"{len(failed)} of {len(finished)} trials failed; recent reasons: {'; '.join(reasons)}"
        )


def run_study(
    settings: SearchSettings,
    space: SearchSpace,
    objective: Objective,
    db_path: str | Path | None = None,
    on_trial: Callable[[TrialRecord], None] | None = None,
) -> Study:
    """Run trials until ``settings.n_trials`` have finished (resuming an existing log).

    Up to ``settings.parallelism`` objective calls run concurrently.  Raises
    :class:`StudyAborted` once more than half of at least ten finished trials
    have failed.
    """
    study = Study.open(settings, space, db_path)
    study.fail_orphans()
    _check_abort(study)
    seed = settings.study_seed

    def finished_count() -> int:
        return sum(t.finished for t in study.trials)

    def complete(trial: TrialRecord, outcome) -> None:
        value, reason, metrics = outcome
        done = study.finish(trial, value, reason, metrics)
        if reason:
            log.info("trial %d failed: %s", trial.trial_id, reason)
        if on_trial is not None:
            on_trial(done)

    if settings.parallelism == 1:
        while finished_count() < settings.n_trials:
            trial = study.start_trial()
            complete(trial, _evaluate(objective, study.chain_for(trial.params), trial.trial_id, seed))
            _check_abort(study)
        return study

    in_flight: dict[Future, TrialRecord] = {}
    with ThreadPoolExecutor(max_workers=settings.parallelism) as pool:
        try:
            while finished_count() + len(in_flight) < settings.n_trials or in_flight:
                while (
                    len(in_flight) < settings.parallelism
                    and finished_count() + len(in_flight) < settings.n_trials
                ):
                    trial = study.start_trial()
                    fut = pool.submit(
                        _evaluate, objective, study.chain_for(trial.params), trial.trial_id, seed
                    )
                    in_flight[fut] = trial
                done, _ = wait(in_flight, return_when=FIRST_COMPLETED)
                for fut in sorted(done, key=lambda f: in_flight[f].trial_id):
                    complete(in_flight.pop(fut), fut.result())
                _check_abort(study)
        except StudyAborted:
            for fut, trial in in_flight.items():
                fut.cancel()
                try:
                    study.finish(trial, reason="aborted")
                except StateError:
                    pass
            raise
    return study
