"""Experiment engine: CV, grid search, track pipelines, report artifacts."""

import json

import numpy as np
import pytest

from flowguard.dataset import Dataset, content_hash, stratified_split
from flowguard.experiment import (
    DEFAULT_GRIDS,
    MODEL_SEQUENCE,
    ExperimentConfig,
    build_fold_datasets,
    expand_grid,
    grid_search,
    kfold_cv,
    run_full_experiment,
    run_track,
    report_to_json,
    write_report_files,
)
from flowguard.classifiers import make_spec
from flowguard.preprocess import LofConfig, SmoteConfig
from flowguard.synth import SynthConfig, generate

SMALL_GRIDS = {"RF": {"n_trees": (5,)}, "KNN": {"k": (3,)}}


def small_config(**overrides):
    base = dict(cv_folds=3, seed=0, models=("RF", "KNN"), grids=SMALL_GRIDS,
                lof=LofConfig(k_neighbors=5, threshold=1.5))
    base.update(overrides)
    return ExperimentConfig(**base)


def small_data(seed=0, n_benign=90, n_ddos=60):
    return generate(SynthConfig(n_benign=n_benign, n_ddos=n_ddos, n_features=5,
                                class_separation=4.0, seed=seed))


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(split_ratio=1.0)
    with pytest.raises(ValueError):
        ExperimentConfig(cv_folds=1)
    with pytest.raises(ValueError):
        ExperimentConfig(tracks=("weighted",))
    with pytest.raises(ValueError):
        ExperimentConfig(models=("LSTM",))
    with pytest.raises(ValueError):
        ExperimentConfig(models=("RF",), grids={"RF": {"n_trees": ()}})
    with pytest.raises(ValueError):
        ExperimentConfig(select_top_m=0)
    cfg = ExperimentConfig(models=["RF"], grids={"RF": {"n_trees": [5, 9]}})
    assert cfg.grids["RF"]["n_trees"] == (5, 9)


def test_default_grids_cover_every_model():
    assert set(DEFAULT_GRIDS) == set(MODEL_SEQUENCE)
    cfg = ExperimentConfig()
    for kind in MODEL_SEQUENCE:
        assert cfg.grids[kind]


def test_kfold_mean_is_arithmetic_mean():
    ds = small_data()
    split = stratified_split(ds, 0.8, seed=0)
    cv = kfold_cv(make_spec("KNN", k=3), split.train, folds=3, seed=0)
    assert len(cv.folds) == 3
    vals = [f.validation_accuracy for f in cv.folds]
    assert cv.mean_accuracy == sum(vals) / 3
    for f in cv.folds:
        assert 0.0 <= f.validation_accuracy <= 1.0
        assert 0.0 <= f.train_accuracy <= 1.0


def test_kfold_is_deterministic():
    ds = small_data()
    split = stratified_split(ds, 0.8, seed=0)
    a = kfold_cv(make_spec("RF", n_trees=5), split.train, folds=3, seed=1)
    b = kfold_cv(make_spec("RF", n_trees=5), split.train, folds=3, seed=1)
    assert a == b


def test_expand_grid_orders_first_listed_outermost():
    combos = expand_grid({"a": (1, 2), "b": (10, 20)})
    assert combos == [{"a": 1, "b": 10}, {"a": 1, "b": 20},
                      {"a": 2, "b": 10}, {"a": 2, "b": 20}]


def test_grid_search_tie_keeps_first_listed():
    # both k values reach identical CV accuracy on cleanly separable data
    ds = small_data(n_benign=75, n_ddos=75)
    split = stratified_split(ds, 0.8, seed=0)
    out = grid_search("KNN", {"k": (5, 3)}, split.train, folds=3, seed=0)
    accs = [p.mean_cv_accuracy for p in out.trace]
    assert accs[0] == accs[1] == 1.0
    assert out.best_spec.hyperparameters["k"] == 5


def test_grid_search_skips_failing_combinations():
    ds = small_data(n_benign=40, n_ddos=40)
    split = stratified_split(ds, 0.8, seed=0)
    out = grid_search("KNN", {"k": (5000, 3)}, split.train, folds=3, seed=0)
    assert out.trace[0].error is not None
    assert out.trace[0].mean_cv_accuracy is None
    assert out.best_spec.hyperparameters["k"] == 3
    with pytest.raises(ValueError, match="every grid combination failed"):
        grid_search("KNN", {"k": (5000, 9000)}, split.train, folds=3, seed=0)


def test_fold_preprocessing_refits_inside_each_fold():
    ds = small_data()
    split = stratified_split(ds, 0.8, seed=0)
    folds = build_fold_datasets(split.train, 3, seed=0,
                                smote_cfg=SmoteConfig(seed=0),
                                lof_cfg=LofConfig(k_neighbors=5, threshold=1.5))
    assert len(folds) == 3
    for proc_tr, proc_va in folds:
        # the fold's scaler came from its own training part
        assert np.all(np.abs(np.mean(proc_tr.X, axis=0)) < 1e-9)
        # minority was oversampled toward parity inside the fold
        counts = np.bincount(proc_tr.y, minlength=2)
        assert abs(counts[0] - counts[1]) <= 3
        # validation part is scaled only, never resampled
        assert proc_va.n_rows < split.train.n_rows


def test_run_track_leaves_test_partition_untouched():
    ds = small_data()
    split = stratified_split(ds, 0.8, seed=0)
    before = content_hash(split.test)
    cfg = small_config()
    imbal = run_track("imbalanced", split, cfg)
    bal = run_track("balanced", split, cfg)
    assert content_hash(split.test) == before
    assert imbal.smote_added == 0
    assert bal.smote_added > 0
    assert "smote" in bal.pipeline and "smote" not in imbal.pipeline
    assert bal.train_rows >= imbal.train_rows


def test_report_names_and_confusion_consistency():
    ds = small_data()
    report = run_full_experiment(small_config(), ds)
    assert tuple(t.track for t in report.tracks) == ("imbalanced", "balanced")
    for track in report.tracks:
        assert tuple(m.name for m in track.models) == ("rf", "knn")
        for m in track.models:
            cm = m.test.confusion
            # headline accuracy must be recomputable from the stored matrix
            assert m.test.accuracy == (cm.tp + cm.tn) / cm.total
            assert cm.total == report.split_info["test_rows"]
            assert 0.0 <= m.mean_cv_accuracy <= 1.0


def test_report_rerun_is_byte_identical():
    ds = small_data()
    a = report_to_json(run_full_experiment(small_config(), ds))
    b = report_to_json(run_full_experiment(small_config(), ds))
    assert a == b


def test_seed_changes_split_hash():
    ds = small_data()
    r0 = run_full_experiment(small_config(seed=0), ds)
    r1 = run_full_experiment(small_config(seed=1), ds)
    assert r0.split_info["train_hash"] != r1.split_info["train_hash"]
    assert r0.dataset_info["content_hash"] == r1.dataset_info["content_hash"]


def test_report_json_structure():
    ds = small_data()
    report = run_full_experiment(small_config(), ds)
    doc = json.loads(report_to_json(report))
    assert doc["dataset"]["labels"]["total"] == 150
    assert doc["split"]["train_rows"] + doc["split"]["test_rows"] == 150
    assert [t["track"] for t in doc["tracks"]] == ["imbalanced", "balanced"]
    model = doc["tracks"][0]["models"][0]
    for key in ("name", "kind", "hyperparameters", "training_accuracy",
                "mean_cv_accuracy", "folds", "test", "grid"):
        assert key in model
    assert doc["generated_at"] is None  # no wall clock unless pinned


def test_write_report_files(tmp_path):
    ds = small_data()
    report = run_full_experiment(small_config(), ds)
    written = write_report_files(report, tmp_path)
    # report.json plus roc/validation/confusion files per model-track pair
    assert len(written) == 1 + 3 * 2 * 2
    assert (tmp_path / "report.json").exists()
    for model in ("rf", "knn"):
        for track in ("imbalanced", "balanced"):
            assert (tmp_path / f"roc_{model}_{track}.csv").exists()
            curve = (tmp_path / f"validation_curve_{model}_{track}.csv").read_text()
            lines = curve.strip().split("\n")
            assert lines[0] == "fold,train_accuracy,validation_accuracy"
            assert len(lines) == 4  # header + one row per fold
            conf = (tmp_path / f"confusion_{model}_{track}.csv").read_text()
            assert conf.startswith(",predicted_benign,predicted_ddos")
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["config"]["cv_folds"] == 3


def test_feature_selection_keeps_informative_columns():
    rng = np.random.default_rng(42)
    n = 160
    y = np.array([0, 1] * (n // 2))
    X = rng.standard_normal((n, 6))
    X[:, 1] += y * 5.0
    X[:, 4] += y * 5.0
    ds = Dataset(feature_names=tuple(f"f{i}" for i in range(6)), X=X, y=y)
    cfg = small_config(select_top_m=2, models=("KNN",),
                       grids={"KNN": {"k": (3,)}})
    report = run_full_experiment(cfg, ds)
    for track in report.tracks:
        assert set(track.selected_features) == {"f1", "f4"}
        assert "select" in track.pipeline
