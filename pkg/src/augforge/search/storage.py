"""Append-only JSON-lines trial log.

Each line is one event ``{"trial_id", "state", "params", "value"?,
"started_at", "finished_at"?, "reason"?, "metrics"?}``; the latest event for
a trial id is its current record.  A trailing line cut short by a crash is
dropped (and truncated away) when the log is reopened.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

RUNNING = "running"
COMPLETE = "complete"
FAILED = "failed"
STATES = (RUNNING, COMPLETE, FAILED)

TIMESTAMP_FIELDS = ("started_at", "finished_at")


class StateError(RuntimeError):
    """Illegal trial state transition (e.g. completing a trial twice)."""


class ReplayError(RuntimeError):
    def __init__(self, path: Path | str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


@dataclass
class TrialRecord:
    trial_id: int
    params: dict[str, str]
    state: str = RUNNING
    value: float | None = None
    started_at: str = field(default_factory=now_iso)
    finished_at: str | None = None
    reason: str | None = None
    metrics: dict[str, Any] | None = None

    def __post_init__(self) -> None:
        if self.state not in STATES:
            raise StateError(f"trial {self.trial_id}: unknown state {self.state!r}")
        if (self.state == COMPLETE) != (self.value is not None):
            raise StateError(f"trial {self.trial_id}: value must be present iff state is complete")
        if self.value is not None:
            self.value = float(self.value)

    @property
    def finished(self) -> bool:
        return self.state != RUNNING

    def to_event(self) -> dict[str, Any]:
        event: dict[str, Any] = {
            "trial_id": self.trial_id,
            "state": self.state,
            "params": dict(self.params),
        }
        if self.value is not None:
            event["value"] = self.value
        event["started_at"] = self.started_at
        if self.finished_at is not None:
            event["finished_at"] = self.finished_at
        if self.reason is not None:
            event["reason"] = self.reason
        if self.metrics is not None:
            event["metrics"] = self.metrics
        return event

    @classmethod
    def from_event(cls, event: dict[str, Any]) -> "TrialRecord":
        return cls(
            trial_id=int(event["trial_id"]),
            params=dict(event["params"]),
            state=event["state"],
            value=event.get("value"),
            started_at=event.get("started_at", ""),
            finished_at=event.get("finished_at"),
            reason=event.get("reason"),
            metrics=event.get("metrics"),
        )


def check_event(trials: list[TrialRecord], rec: TrialRecord) -> None:
    """Raise :class:`StateError` unless ``rec`` is a legal next event."""
    tid = rec.trial_id
    if tid == len(trials):
        return
    if tid < 0 or tid > len(trials):
        raise StateError(f"trial id {tid} is not the next id ({len(trials)})")
    if trials[tid].finished:
        raise StateError(f"trial {tid} is already {trials[tid].state}")
    if rec.state == RUNNING:
        raise StateError(f"trial {tid} is already running")


def apply_event(trials: list[TrialRecord], rec: TrialRecord) -> None:
    """Fold one event into the ordered trial list, enforcing the state machine."""
    check_event(trials, rec)
    if rec.trial_id == len(trials):
        trials.append(rec)
    else:
        trials[rec.trial_id] = rec


def read_events(path: str | Path, repair: bool = False) -> list[dict[str, Any]]:
    """Parse the log; a malformed *last* line is discarded (and cut off if ``repair``)."""
    return [event for _, event in _numbered_events(path, repair)]


def _numbered_events(path: str | Path, repair: bool = False) -> list[tuple[int, dict[str, Any]]]:
    path = Path(path)
    if not path.exists():
        return []
    raw = path.read_bytes()
    lines = raw.split(b"\n")
    events: list[tuple[int, dict[str, Any]]] = []
    offset = 0
    for n, line in enumerate(lines, start=1):
        is_last = n == len(lines) or (n == len(lines) - 1 and lines[-1] == b"")
        complete_line = n < len(lines)
        if line.strip() == b"":
            offset += len(line) + 1
            continue
        try:
            event = json.loads(line.decode("utf-8"))
            if not isinstance(event, dict):
                raise ValueError("event is not an object")
            if not complete_line:
                raise ValueError("line not terminated")
        except (ValueError, UnicodeDecodeError) as exc:
            if is_last:
                if repair:
                    with open(path, "r+b") as fh:
                        fh.truncate(offset)
                break
            raise ReplayError(path, n, f"corrupt record ({exc})") from exc
        events.append((n, event))
        offset += len(line) + 1
    return events


def replay(path: str | Path, repair: bool = False) -> list[TrialRecord]:
    trials: list[TrialRecord] = []
    for n, event in _numbered_events(path, repair):
        try:
            apply_event(trials, TrialRecord.from_event(event))
        except (KeyError, TypeError, ValueError, StateError) as exc:
            raise ReplayError(path, n, f"invalid event ({exc})") from exc
    return trials


def normalized_events(path: str | Path) -> list[dict[str, Any]]:
    """Events with timestamps removed, for run-to-run comparisons."""
    return [
        {k: v for k, v in e.items() if k not in TIMESTAMP_FIELDS}
        for e in read_events(path)
    ]


class TrialLog:
    """Single-writer durable log; every append is flushed and fsynced."""

    def __init__(self, path: str | Path | None):
        self.path = None if path is None else Path(path)
        self.trials: list[TrialRecord] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.trials = replay(self.path, repair=True)

    def append(self, rec: TrialRecord) -> None:
        check_event(self.trials, rec)
        if self.path is not None:
            line = json.dumps(rec.to_event(), separators=(",", ":"), allow_nan=False) + "\n"
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        apply_event(self.trials, rec)
