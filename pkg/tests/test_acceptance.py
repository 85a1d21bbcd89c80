"""The ten acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line, repeated in
the terminal summary, and then asserts the criterion at its stated tolerance.
"""

import itertools
import json
import time

import numpy as np

from augforge.augment import CATALOG, AugmentationKind as K, ChainConfig, apply_kind
from augforge.augment.space import specular_center
from augforge.cli import main as cli
from augforge.evaluation import Detection, DetectionSet, GroundTruthSet, evaluate
from augforge.harness import SurrogateObjective, augment_dataset, write_dataset
from augforge.imaging import BBox, Sample, derive_stream, load_image, load_mask, mask_hull
from augforge.importance import ForestSettings, analyze_study
from augforge.search import ACTIVE, INACTIVE, SearchSettings, SearchSpace, Study, normalized_events, replay, run_study
from conftest import ACCEPTANCE_LINES, boxed_sample
from oracles import THRESHOLDS, naive_map, random_fixture


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_evaluator_matches_naive_oracle():
    gt, det = random_fixture(2024, n_images=50)
    start = time.perf_counter()
    rep = evaluate(gt, det)
    elapsed = time.perf_counter() - start
    ref = {
        "mAP": naive_map(gt, det, THRESHOLDS),
        "mAP50": naive_map(gt, det, [0.5]),
        "mAP75": naive_map(gt, det, [0.75]),
    }
    diff = max(abs(getattr(rep, k) - v) for k, v in ref.items())
    verdict(1, diff <= 1e-9 and elapsed < 5.0, f"max |diff| {diff:.1e}, mAP {rep.mAP:.4f}, {elapsed:.2f} s")


def test_criterion_02_iou_point_six():
    gt = GroundTruthSet({"img": [BBox(0, 0, 10, 10)]})
    det = DetectionSet([Detection("img", BBox(0, 0, 10, 6), 0.9)])
    rep = evaluate(gt, det)
    verdict(2, rep.mAP == 0.3, f"mAP {rep.mAP!r}")


def test_criterion_03_tpe_beats_random():
    names = tuple(k.value for k in CATALOG)[:10]
    space = SearchSpace(names)
    wins = 0
    start = time.perf_counter()
    for seed in range(20):
        objective = SurrogateObjective(seed, 0.0, names)
        tpe = run_study(SearchSettings(n_trials=150, n_startup_trials=32, study_seed=seed), space, objective)
        rnd = run_study(SearchSettings(n_trials=150, n_startup_trials=150, study_seed=seed), space, objective)
        wins += tpe.best_trial.value >= rnd.best_trial.value
    elapsed = time.perf_counter() - start
    verdict(3, wins >= 17 and elapsed < 60.0, f"TPE >= random in {wins}/20 seeds, {elapsed:.1f} s")


def _grid_data(f, d=6, reps=8):
    names = [f"p{i}" for i in range(d)]
    rows = []
    for bits in itertools.product((0, 1), repeat=d):
        rows.append(({n: ACTIVE if b else INACTIVE for n, b in zip(names, bits)}, f(np.array(bits))))
    return names, rows * reps


def test_criterion_04_fanova_oracle():
    coef = np.array([3.0, 2.0, 1.5, 1.0, 0.5, 0.0])
    names, data = _grid_data(lambda x: float(coef @ x))
    report = analyze_study(data, ForestSettings())
    got = {p.name: p.mean for p in report.params}
    expected = coef ** 2 / np.sum(coef ** 2)
    add_err = max(abs(got[n] - e) for n, e in zip(names, expected))
    zero = got["p5"]

    names, data = _grid_data(lambda x: float(x[2]))
    single = analyze_study(data, ForestSettings())
    single_err = max(abs(rep["p2"] - 1.0) for rep in single.per_repeat)
    ok = add_err <= 0.05 and zero < 0.02 and single_err <= 1e-9 and len(single.per_repeat) == 8
    verdict(4, ok, f"additive max err {add_err:.4f}, zero-effect {zero:.4f}, single-factor max err {single_err:.1e}")


def test_criterion_05_determinism_all_kinds():
    pool = [np.random.default_rng(7).random((36, 44, 3))]
    bad = []
    for kind in CATALOG:
        for case in range(100):
            rng = np.random.default_rng(case)
            s = boxed_sample(rng, 32, 24, f"c{case}")
            seed = int(rng.integers(2**31))
            a = apply_kind(kind, s, None, derive_stream(seed, case, s.id, 0), pool)
            b = apply_kind(kind, s, None, derive_stream(seed, case, s.id, 0), pool)
            same = (
                np.array_equal(a.image, b.image)
                and np.array_equal(a.mask, b.mask)
                and a.boxes == b.boxes
            )
            if not same or a.image.min() < 0.0 or a.image.max() > 1.0:
                bad.append((kind.value, case))
    verdict(5, not bad, f"{len(CATALOG)} kinds x 100 cases, {len(bad)} violations")


def test_criterion_06_geometric_consistency():
    worst = {}
    for kind in (K.AFFINE, K.RANDOM_CROP):
        worst[kind.value] = 0.0
        for case in range(200):
            s = boxed_sample(np.random.default_rng(10_000 + case), 64, 48)
            out = apply_kind(kind, s, None, derive_stream(case, 0, s.id, 0))
            hull = mask_hull(out.mask)
            if hull is None or not out.boxes:
                err = 0.0 if (hull is None) == (not out.boxes) else float("inf")
            else:
                err = max(abs(a - b) for a, b in zip(hull, out.boxes[0].as_tuple()))
            worst[kind.value] = max(worst[kind.value], err)
    ok = all(w <= 1.0 for w in worst.values())
    verdict(6, ok, ", ".join(f"{k} worst edge error {v:.2f} px" for k, v in worst.items()))


def test_criterion_07_space_invariants():
    spec_bad = shadow_bad = 0
    for case in range(100):
        rng = np.random.default_rng(case)
        s = boxed_sample(rng, 40, 30)
        out = apply_kind(K.SPECULAR, s, None, derive_stream(case, 0, "specular", 0))
        spec_bad += not np.all(out.image >= s.image)

        black = Sample(np.zeros_like(s.image), s.mask, s.boxes, s.id)
        out = apply_kind(K.SPECULAR, black, None, derive_stream(case, 0, "specular", 0))
        r, c = specular_center(black.image, black.mask, derive_stream(case, 0, "specular", 0))
        spec_bad += not np.all(out.image[r, c] == 1.0)

        threshold = float(rng.uniform(0.05, 0.95))
        out = apply_kind(K.SHADOW, s, {"threshold": threshold, "factor": float(rng.uniform(0.01, 1.0))}, None)
        lum = 0.299 * s.image[..., 0] + 0.587 * s.image[..., 1] + 0.114 * s.image[..., 2]
        keep = lum >= threshold
        shadow_bad += not (np.all(out.image <= s.image) and np.array_equal(out.image[keep], s.image[keep]))
    verdict(7, spec_bad == 0 and shadow_bad == 0, f"specular violations {spec_bad}, shadow violations {shadow_bad}")


def test_criterion_08_identity_chain(tmp_path):
    rng = np.random.default_rng(8)
    samples = [boxed_sample(rng, 48, 36, f"id{i}") for i in range(6)]
    manifest = write_dataset(tmp_path / "ds", samples)
    gt = augment_dataset(manifest, ChainConfig(), tmp_path / "out", seed=123)
    ok = True
    for s in manifest.samples():
        img = load_image(tmp_path / "out" / "images" / f"{s.id}.png")
        mask = load_mask(tmp_path / "out" / "masks" / f"{s.id}.png")
        ok &= np.array_equal(img, s.image) and np.array_equal(mask, s.mask) and gt.images[s.id] == list(s.boxes)
    verdict(8, bool(ok), f"{len(samples)} samples reproduced bit-exactly")


def test_criterion_09_end_to_end_determinism(tmp_path, capsys):
    args = ["search", "--surrogate", "--surrogate-seed", "4", "--trials", "80", "--startup", "20", "--seed", "9", "--parallel", "1"]
    codes = [cli(args + ["--db", str(tmp_path / f"{n}.jsonl")]) for n in ("a", "b")]
    same = normalized_events(tmp_path / "a.jsonl") == normalized_events(tmp_path / "b.jsonl")
    codes.append(cli(["report", "--db", str(tmp_path / "a.jsonl"), "--out", str(tmp_path / "r.json")]))
    rep = json.loads((tmp_path / "r.json").read_text())
    complete = [t for t in replay(tmp_path / "a.jsonl") if t.state == "complete"]
    pairs_ok = [(p["trial_id"], p["value"]) for p in rep["points"]] == [(t.trial_id, t.value) for t in complete]
    ok = codes == [0, 0, 0] and same and pairs_ok and len(rep["points"]) == len(complete) == 80
    verdict(9, ok, f"identical normalized DBs: {same}, report pairs {len(rep['points'])} for {len(complete)} complete trials")


def test_criterion_10_crash_recovery(tmp_path):
    db = tmp_path / "db.jsonl"
    names = tuple(k.value for k in CATALOG)[:8]
    space = SearchSpace(names)
    objective = SurrogateObjective(1, 0.0, names)
    run_study(SearchSettings(n_trials=20, n_startup_trials=8, study_seed=2), space, objective, db)
    raw = db.read_bytes()
    last_start = raw.rstrip(b"\n").rfind(b"\n") + 1
    db.write_bytes(raw[: last_start + (len(raw) - last_start) // 2])  # cut the last record mid-line
    kept = replay(db, repair=True)
    intact = db.read_bytes() == raw[:last_start]
    study = run_study(SearchSettings(n_trials=30, n_startup_trials=8, study_seed=2), space, objective, db)
    ids = [t.trial_id for t in study.trials]
    reopened = Study.open(study.settings, space, db)
    ok = (
        intact
        and ids == list(range(len(ids)))
        and sum(t.finished for t in study.trials) == 30
        and reopened.trials == study.trials
        and all(a.trial_id == b.trial_id for a, b in zip(kept, study.trials))
    )
    verdict(10, ok, f"partial record dropped: {intact}, resumed to {len(ids)} dense trial ids")
