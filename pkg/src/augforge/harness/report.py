"""Per-study summary: active-augmentation count against objective."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

from ..search.space import count_active
from ..search.storage import COMPLETE, FAILED, RUNNING, ReplayError, replay


def report_study(db: str | Path) -> dict:
    """Summarise a study log for a count-vs-objective scatter.

    Raises :class:`~augforge.search.ReplayError` (with the line number) on a
    missing or corrupt log.
    """
    if not Path(db).is_file():
        raise ReplayError(db, 0, "study database not found")
    trials = replay(db)
    complete = [t for t in trials if t.state == COMPLETE]
    points = [
        {"trial_id": t.trial_id, "active_count": count_active(t.params), "value": t.value}
        for t in complete
    ]
    groups: dict[int, list[float]] = defaultdict(list)
    for p in points:
        groups[p["active_count"]].append(p["value"])
    by_count = [
        {"active_count": c, "n": len(v), "mean": sum(v) / len(v), "max": max(v)}
        for c, v in sorted(groups.items())
    ]
    best = None
    if complete:
        b = min(complete, key=lambda t: (-t.value, t.trial_id))
        best = {
            "trial_id": b.trial_id,
            "value": b.value,
            "active_count": count_active(b.params),
            "active": sorted(n for n, v in b.params.items() if v == "active"),
        }
    return {
        "n_trials": len(trials),
        "n_complete": len(complete),
        "n_failed": sum(t.state == FAILED for t in trials),
        "n_running": sum(t.state == RUNNING for t in trials),
        "points": points,
        "by_count": by_count,
        "best": best,
    }
