"""
Searching augmentation chains against a surrogate objective
===========================================================

Detector training is replaced by a closed-form objective with planted
pairwise interactions, so a full study runs in seconds.  TPE is compared
with uniform random sampling on the same budget.
"""

import sys
from pathlib import Path

from augforge.harness import SurrogateObjective, report_study
from augforge.search import SearchSettings, SearchSpace, run_study

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# ten binary active/inactive parameters; 1024 configurations in total
space = SearchSpace(("specular", "shadow", "add_value", "invert", "multiply",
                     "background", "affine", "random_crop", "gaussian_blur", "dropout"))
objective = SurrogateObjective(weights_seed=3, noise=0.0, names=space.names)

# the enumerated optimum is available because the objective is closed form
optimum = objective.enumerate()[0][1]
print(f"best possible value: {optimum:.4f}")

for label, startup in (("tpe", 32), ("random", 150)):
    db = out / f"study_{label}.jsonl"
    db.unlink(missing_ok=True)
    settings = SearchSettings(n_trials=150, n_startup_trials=startup, study_seed=1)
    study = run_study(settings, space, objective, db)
    best = study.best_trial
    print(f"{label:>6}: best {best.value:.4f} at trial {best.trial_id}")

# a study log is plain JSON lines; the report groups it by active count
report = report_study(out / "study_tpe.jsonl")
for row in report["by_count"]:
    print(f"  {row['active_count']:2d} active: n={row['n']:3d} mean={row['mean']:.3f} max={row['max']:.3f}")
