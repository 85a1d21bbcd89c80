"""Command line entry point.

Exit codes: 0 success, 1 validation error (bad flags, configs, inputs),
2 runtime failure.  Every failure prints one line to stderr of the form
``augforge: error[<kind>]: <message>``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .augment import BackgroundPool, ChainConfig, ConfigError, preview_grid
from .evaluation import EvaluationError, evaluate, load_detections, load_ground_truth
from .harness import (
    DatasetEvalObjective,
    ExternalObjective,
    ManifestError,
    SurrogateObjective,
    augment_dataset,
    load_manifest,
    report_study,
)
from .imaging import DecodeError, Sample, boxes_from_mask, load_image, load_mask
from .importance import AnalysisError, ForestSettings, analyze_study
from .search import ReplayError, SearchSettings, SearchSpace, StateError, StudyAborted, run_study

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2

# missing inputs are the caller's mistake, other I/O failures are runtime
VALIDATION_ERRORS = (ConfigError, EvaluationError, ManifestError, AnalysisError, DecodeError, FileNotFoundError)
RUNTIME_ERRORS = (StudyAborted, ReplayError, StateError, OSError, RuntimeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


def _default_seed() -> int:
    raw = os.environ.get("AUGFORGE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"AUGFORGE_SEED must be an integer, got {raw!r}") from None


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_augment(args) -> int:
    cfg = ChainConfig.load(args.config)
    manifest = load_manifest(args.dataset)
    pool = BackgroundPool.from_dir(args.backgrounds) if args.backgrounds else None
    gt = augment_dataset(manifest, cfg, args.out, args.seed, pool=pool)
    _emit({"images": len(gt.images), "out": str(args.out)}, None)
    return EXIT_OK


def cmd_preview(args) -> int:
    image = load_image(args.input)
    mask = load_mask(args.mask) if args.mask else None
    s = Sample(image, mask, tuple(boxes_from_mask(mask)) if mask is not None else (), Path(args.input).stem)
    pool = BackgroundPool.from_dir(args.backgrounds) if args.backgrounds else None
    labels = preview_grid(s, args.out, seed=args.seed, pool=pool)
    _emit({"tiles": labels, "out": str(args.out)}, None)
    return EXIT_OK


def cmd_search(args) -> int:
    space = SearchSpace.load(args.space) if args.space else SearchSpace()
    settings = SearchSettings(
        n_trials=args.trials,
        n_startup_trials=args.startup,
        n_candidates=args.candidates,
        study_seed=args.seed,
        parallelism=args.parallel,
        probability=args.probability,
    )
    if args.objective_cmd:
        objective = ExternalObjective(args.objective_cmd, timeout=args.timeout)
    elif args.eval_cmd:
        if not args.dataset:
            raise UsageError("--eval-cmd needs --dataset")
        objective = DatasetEvalObjective(args.dataset, args.eval_cmd, timeout=args.timeout)
    else:
        objective = SurrogateObjective(args.surrogate_seed, args.surrogate_noise, space.names)
    study = run_study(settings, space, objective, args.db)
    best = study.best_trial
    _emit(
        {
            "db": str(args.db),
            "n_trials": len(study.trials),
            "n_complete": len(study.completed),
            "best": None if best is None else {"trial_id": best.trial_id, "value": best.value, "params": best.params},
        },
        None,
    )
    return EXIT_OK


def cmd_importance(args) -> int:
    settings = ForestSettings(
        n_trees=args.trees,
        max_depth=args.max_depth,
        n_repeats=args.repeats,
        min_samples_leaf=args.min_samples_leaf,
        seed=args.seed,
    )
    report = analyze_study(Path(args.db), settings)
    _emit(report.to_dict(top=args.top), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    report = evaluate(load_ground_truth(args.gt), load_detections(args.det))
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    _emit(report_study(args.db), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    p = _Parser(prog="augforge", description="Augmentation search toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("augment", help="augment a dataset with one chain config")
    a.add_argument("--config", required=True)
    a.add_argument("--dataset", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--seed", type=int, default=seed)
    a.add_argument("--backgrounds", help="directory of background PNGs")
    a.set_defaults(func=cmd_augment)

    v = sub.add_parser("preview", help="tile every augmentation applied to one image")
    v.add_argument("--input", required=True)
    v.add_argument("--mask")
    v.add_argument("--out", required=True)
    v.add_argument("--seed", type=int, default=seed)
    v.add_argument("--backgrounds")
    v.set_defaults(func=cmd_preview)

    s = sub.add_parser("search", help="run a TPE study over active/inactive augmentations")
    s.add_argument("--space", help='JSON {"params": [...]}; default: the full catalog')
    obj = s.add_mutually_exclusive_group(required=True)
    obj.add_argument("--objective-cmd", help="external objective command")
    obj.add_argument("--surrogate", action="store_true", help="built-in closed-form objective")
    obj.add_argument("--eval-cmd", help="command printing detections JSON (needs --dataset)")
    s.add_argument("--dataset")
    s.add_argument("--surrogate-seed", type=int, default=0)
    s.add_argument("--surrogate-noise", type=float, default=0.0)
    s.add_argument("--trials", type=int, default=400)
    s.add_argument("--startup", type=int, default=64)
    s.add_argument("--candidates", type=int, default=24)
    s.add_argument("--probability", type=float, default=0.3)
    s.add_argument("--db", required=True)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--parallel", type=int, default=1)
    s.add_argument("--timeout", type=float, default=24 * 3600.0)
    s.set_defaults(func=cmd_search)

    i = sub.add_parser("importance", help="fANOVA importance of a finished study")
    i.add_argument("--db", required=True)
    i.add_argument("--trees", type=int, default=64)
    i.add_argument("--max-depth", type=int, default=64)
    i.add_argument("--repeats", type=int, default=8)
    i.add_argument("--min-samples-leaf", type=int, default=2)
    i.add_argument("--seed", type=int, default=seed)
    i.add_argument("--top", type=int, help="keep only the N most important parameters")
    i.add_argument("--out")
    i.set_defaults(func=cmd_importance)

    e = sub.add_parser("evaluate", help="mAP / IoU of detections against ground truth")
    e.add_argument("--gt", required=True)
    e.add_argument("--det", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("report", help="active-count vs objective summary of a study")
    r.add_argument("--db", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return p


def _fail(kind: str, exc: BaseException, code: int) -> int:
    message = " ".join(str(exc).split()) or type(exc).__name__
    print(f"augforge: error[{kind}]: {message}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_VALIDATION)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_VALIDATION)
    except VALIDATION_ERRORS as exc:
        return _fail("validation", exc, EXIT_VALIDATION)
    except RUNTIME_ERRORS as exc:
        return _fail("runtime", exc, EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
