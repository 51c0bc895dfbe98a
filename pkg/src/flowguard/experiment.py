"""Dual-track experiment orchestration.

One experiment = one stratified train/test split shared by every track. The
imbalanced track trains on the data as it comes; the balanced track first
SMOTE-oversamples the training partition. Both tracks then LOF-clean the
training rows and standardize with a train-fitted scaler (test data only
ever sees the scaler). Every enabled model is grid-searched by stratified
k-fold CV with preprocessing refit inside each fold, retrained on the full
processed training partition, and evaluated once on the processed test
partition.

Seed derivations (everything flows from cfg.seed unless noted):
  split                     cfg.seed
  CV fold models            spec.seed + fold_index
  final per-track models    cfg.seed
  SMOTE, full train         cfg.smote.seed
  SMOTE, inside fold f      cfg.smote.seed + f + 1
  feature-ranking forest    cfg.seed (full train), cfg.seed + f + 1 (fold f)
GBT consumes no randomness; SVC's internal Platt folds derive from the model
seed (see classifiers.svc).
"""

from __future__ import annotations

import itertools
import json
import logging
import os
from copy import deepcopy
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import classifiers as clf
from .dataset import (Dataset, SplitPair, content_hash, label_distribution,
                      stratified_fold_indices, stratified_split)
from .metrics import MetricsReport, RocCurve, evaluate_predictions
from .preprocess import (LofConfig, Scaler, SmoteConfig, apply_scaler,
                         fit_scaler, remove_outliers, smote_oversample)

logger = logging.getLogger(__name__)

TRACKS = ("imbalanced", "balanced")

# Report order matches the result-table convention: RF, SVC, KNN, MLP, XGB.
MODEL_SEQUENCE = ("RF", "SVC", "KNN", "MLP", "GBT")
DISPLAY_NAMES = {"RF": "rf", "SVC": "svc", "KNN": "knn", "MLP": "mlp", "GBT": "xgb"}

DEFAULT_GRIDS = {
    "RF": {"n_trees": (50, 100)},
    "GBT": {"rounds": (50, 100), "learning_rate": (0.1, 0.3)},
    "KNN": {"k": (3, 5, 7)},
    "MLP": {"learning_rate": (0.01, 0.001)},
    "SVC": {"reg_lambda": (1e-3, 1e-4)},
}

_RANKING_TREES = 25  # forest size used only for impurity-based feature ranking


@dataclass(frozen=True)
class ExperimentConfig:
    split_ratio: float = 0.8
    cv_folds: int = 5
    seed: int = 0
    tracks: tuple = TRACKS
    models: tuple = MODEL_SEQUENCE
    grids: dict = field(default_factory=lambda: deepcopy(DEFAULT_GRIDS))
    smote: SmoteConfig = SmoteConfig()
    lof: LofConfig = LofConfig()
    select_top_m: int | None = None

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must lie in (0, 1)")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")
        object.__setattr__(self, "tracks", tuple(self.tracks))
        object.__setattr__(self, "models", tuple(self.models))
        for track in self.tracks:
            if track not in TRACKS:
                raise ValueError(f"unknown track {track!r}; expected subset of {TRACKS}")
        if not self.tracks:
            raise ValueError("at least one track must be enabled")
        if not self.models:
            raise ValueError("at least one model must be enabled")
        for kind in self.models:
            if kind not in MODEL_SEQUENCE:
                raise ValueError(f"unknown model kind {kind!r}")
        grids = {}
        for kind in self.models:
            grid = self.grids.get(kind, DEFAULT_GRIDS[kind])
            grids[kind] = {p: tuple(vals) for p, vals in grid.items()}
            for p, vals in grids[kind].items():
                if not vals:
                    raise ValueError(f"grid for {kind}.{p} is empty")
        object.__setattr__(self, "grids", grids)
        if self.select_top_m is not None and self.select_top_m < 1:
            raise ValueError("select_top_m must be None or >= 1")


@dataclass(frozen=True)
class FoldResult:
    fold: int
    train_accuracy: float
    validation_accuracy: float


@dataclass(frozen=True)
class GridPoint:
    params: dict
    mean_cv_accuracy: float | None
    error: str | None = None


@dataclass(frozen=True)
class CvResult:
    mean_accuracy: float
    folds: tuple


@dataclass(frozen=True)
class GridSearchOutcome:
    best_spec: clf.ModelSpec
    mean_cv_accuracy: float
    folds: tuple
    trace: tuple


@dataclass(frozen=True)
class ModelResult:
    name: str
    kind: str
    hyperparameters: dict
    training_accuracy: float
    mean_cv_accuracy: float
    folds: tuple
    test: MetricsReport
    roc: RocCurve
    grid_trace: tuple


@dataclass(frozen=True)
class TrackReport:
    track: str
    pipeline: tuple
    smote_added: int
    lof_removed: int
    train_rows: int
    constant_features: tuple
    selected_features: tuple | None
    models: tuple


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    dataset_info: dict
    split_info: dict
    tracks: tuple
    generated_at: str | None


@dataclass(frozen=True)
class PipelineState:
    scaler: Scaler
    selected: tuple | None  # column indices kept by feature selection
    smote_added: int
    lof_removed: int


def _select_columns(ds: Dataset, indices) -> Dataset:
    idx = list(indices)
    names = tuple(ds.feature_names[i] for i in idx)
    return Dataset(feature_names=names, X=ds.X[:, idx], y=ds.y,
                   provenance=ds.provenance, category_maps={})


def _rank_features(train: Dataset, top_m: int, seed: int):
    """Top-m column indices by random-forest mean impurity decrease."""
    spec = clf.make_spec("RF", seed=seed, n_trees=_RANKING_TREES)
    model = clf.train(spec, train)
    importance = model.feature_importance
    order = np.argsort(-importance, kind="stable")  # ties: lower index first
    keep = np.sort(order[:top_m])
    return tuple(int(i) for i in keep)


def fit_track_pipeline(train: Dataset, smote_cfg, lof_cfg, select_top_m=None,
                       select_seed=0):
    """Fit SMOTE -> LOF -> scaler (-> feature selection) on training data.

    Any stage configured as None is skipped. Returns the processed training
    partition and the state needed to transform evaluation data.
    """
    processed = train
    smote_added = 0
    if smote_cfg is not None:
        before = processed.n_rows
        processed = smote_oversample(processed, smote_cfg)
        smote_added = processed.n_rows - before
    lof_removed = 0
    if lof_cfg is not None:
        removal = remove_outliers(processed, lof_cfg)
        processed = removal.dataset
        lof_removed = removal.removed_count
    scaler = fit_scaler(processed)
    processed = apply_scaler(scaler, processed)
    selected = None
    if select_top_m is not None and select_top_m < processed.n_features:
        selected = _rank_features(processed, select_top_m, select_seed)
        processed = _select_columns(processed, selected)
    state = PipelineState(scaler=scaler, selected=selected,
                          smote_added=smote_added, lof_removed=lof_removed)
    return processed, state


def transform_with_pipeline(state: PipelineState, ds: Dataset) -> Dataset:
    """Scaler (and column selection) only; rows and labels pass through."""
    out = apply_scaler(state.scaler, ds)
    if state.selected is not None:
        out = _select_columns(out, state.selected)
    return out


def _accuracy(pred, ds: Dataset) -> float:
    return float(np.mean(pred.labels == ds.y))


def build_fold_datasets(train: Dataset, n_folds: int, seed: int,
                        smote_cfg=None, lof_cfg=None, select_top_m=None):
    """Stratified CV folds with preprocessing fitted inside each fold."""
    fold_val_indices = stratified_fold_indices(train.y, n_folds, seed)
    folds = []
    for f, val_idx in enumerate(fold_val_indices):
        mask = np.ones(train.n_rows, dtype=bool)
        mask[val_idx] = False
        raw_tr = train.take(np.flatnonzero(mask))
        raw_va = train.take(val_idx)
        fold_smote = None
        if smote_cfg is not None:
            fold_smote = SmoteConfig(k_neighbors=smote_cfg.k_neighbors,
                                     target_ratio=smote_cfg.target_ratio,
                                     seed=smote_cfg.seed + f + 1)
        proc_tr, state = fit_track_pipeline(raw_tr, fold_smote, lof_cfg,
                                            select_top_m, select_seed=seed + f + 1)
        proc_va = transform_with_pipeline(state, raw_va)
        folds.append((proc_tr, proc_va))
    return folds


def kfold_cv(spec, train: Dataset | None = None, folds: int = 5, seed: int = 0,
             *, fold_datasets=None, smote_cfg=None, lof_cfg=None) -> CvResult:
    """Stratified k-fold cross-validation accuracy for one model spec.

    The fold-f model trains under seed spec.seed + f on the fold's processed
    training part and is scored on the held-out part. When prebuilt
    ``fold_datasets`` are not supplied they are constructed from ``train``
    with per-fold preprocessing (scaler always; SMOTE/LOF when configured).
    """
    if fold_datasets is None:
        if train is None:
            raise ValueError("kfold_cv needs either train data or fold_datasets")
        fold_datasets = build_fold_datasets(train, folds, seed,
                                            smote_cfg=smote_cfg, lof_cfg=lof_cfg)
    results = []
    for f, (proc_tr, proc_va) in enumerate(fold_datasets):
        model = clf.train(spec.with_seed(spec.seed + f), proc_tr)
        train_acc = _accuracy(clf.predict(model, proc_tr), proc_tr)
        val_acc = _accuracy(clf.predict(model, proc_va), proc_va)
        results.append(FoldResult(fold=f, train_accuracy=train_acc,
                                  validation_accuracy=val_acc))
    mean = sum(r.validation_accuracy for r in results) / len(results)
    return CvResult(mean_accuracy=mean, folds=tuple(results))


def expand_grid(grid: dict):
    """Cartesian product of grid values, in first-listed order."""
    keys = list(grid.keys())
    combos = []
    for values in itertools.product(*(grid[k] for k in keys)):
        combos.append(dict(zip(keys, values)))
    return combos


def grid_search(kind: str, grid: dict, train: Dataset | None = None,
                folds: int = 5, seed: int = 0, *, fold_datasets=None,
                smote_cfg=None, lof_cfg=None) -> GridSearchOutcome:
    """Exhaustive grid evaluation by CV accuracy.

    Highest mean validation accuracy wins; exact ties keep the combination
    listed first. Combinations that fail to train are skipped with a logged
    warning; if every combination fails, the search raises.
    """
    if fold_datasets is None:
        if train is None:
            raise ValueError("grid_search needs either train data or fold_datasets")
        fold_datasets = build_fold_datasets(train, folds, seed,
                                            smote_cfg=smote_cfg, lof_cfg=lof_cfg)
    best = None
    trace = []
    for params in expand_grid(grid):
        spec = clf.ModelSpec(kind=kind, hyperparameters=params, seed=seed)
        try:
            cv = kfold_cv(spec, fold_datasets=fold_datasets)
        except Exception as exc:
            logger.warning("grid combination %s %s failed: %s", kind, params, exc)
            trace.append(GridPoint(params=dict(params), mean_cv_accuracy=None,
                                   error=str(exc)))
            continue
        trace.append(GridPoint(params=dict(params),
                               mean_cv_accuracy=cv.mean_accuracy))
        if best is None or cv.mean_accuracy > best[1].mean_accuracy:
            best = (spec, cv)
    if best is None:
        raise ValueError(f"every grid combination failed for {kind}")
    spec, cv = best
    return GridSearchOutcome(best_spec=spec, mean_cv_accuracy=cv.mean_accuracy,
                             folds=cv.folds, trace=tuple(trace))


def run_track(track: str, split: SplitPair, cfg: ExperimentConfig) -> TrackReport:
    """Run every enabled model on one preprocessing track."""
    if track not in TRACKS:
        raise ValueError(f"unknown track {track!r}")
    smote_cfg = cfg.smote if track == "balanced" else None
    stages = (["smote"] if smote_cfg else []) + ["lof", "scale"]
    if cfg.select_top_m is not None:
        stages.append("select")

    proc_train, state = fit_track_pipeline(split.train, smote_cfg, cfg.lof,
                                           cfg.select_top_m, select_seed=cfg.seed)
    proc_test = transform_with_pipeline(state, split.test)
    if proc_test.n_rows != split.test.n_rows or not np.array_equal(proc_test.y,
                                                                   split.test.y):
        raise AssertionError("test partition must pass through unmodified")

    fold_datasets = build_fold_datasets(split.train, cfg.cv_folds, cfg.seed,
                                        smote_cfg=smote_cfg, lof_cfg=cfg.lof,
                                        select_top_m=cfg.select_top_m)
    models = []
    for kind in cfg.models:
        outcome = grid_search(kind, cfg.grids[kind], fold_datasets=fold_datasets,
                              seed=cfg.seed)
        final_spec = outcome.best_spec.with_seed(cfg.seed)
        model = clf.train(final_spec, proc_train)
        training_accuracy = _accuracy(clf.predict(model, proc_train), proc_train)
        test_pred = clf.predict(model, proc_test)
        test_report, roc = evaluate_predictions(proc_test.y, test_pred.labels,
                                                test_pred.probabilities)
        models.append(ModelResult(
            name=DISPLAY_NAMES[kind], kind=kind,
            hyperparameters=dict(final_spec.hyperparameters),
            training_accuracy=training_accuracy,
            mean_cv_accuracy=outcome.mean_cv_accuracy,
            folds=outcome.folds, test=test_report, roc=roc,
            grid_trace=outcome.trace))

    scaler = state.scaler
    constant = tuple(split.train.feature_names[i]
                     for i in np.flatnonzero(scaler.constant_mask))
    selected = None
    if state.selected is not None:
        selected = tuple(split.train.feature_names[i] for i in state.selected)
    return TrackReport(track=track, pipeline=tuple(stages),
                       smote_added=state.smote_added,
                       lof_removed=state.lof_removed,
                       train_rows=proc_train.n_rows,
                       constant_features=constant, selected_features=selected,
                       models=tuple(models))


def run_full_experiment(cfg: ExperimentConfig, ds: Dataset) -> ExperimentReport:
    """Split once under cfg.seed, then run every enabled track on that split."""
    if not ds.is_numeric:
        raise ValueError("run_full_experiment requires an encoded numeric dataset")
    dist = label_distribution(ds)
    split = stratified_split(ds, cfg.split_ratio, cfg.seed)
    train_dist = label_distribution(split.train)
    test_dist = label_distribution(split.test)
    split_info = {
        "ratio": cfg.split_ratio,
        "seed": cfg.seed,
        "train_rows": split.train.n_rows,
        "test_rows": split.test.n_rows,
        "train_labels": {"benign": train_dist.benign_count,
                         "ddos": train_dist.ddos_count},
        "test_labels": {"benign": test_dist.benign_count,
                        "ddos": test_dist.ddos_count},
        "train_hash": content_hash(split.train),
        "test_hash": content_hash(split.test),
    }
    dataset_info = {
        "provenance": ds.provenance,
        "rows": ds.n_rows,
        "features": ds.n_features,
        "labels": {"benign": dist.benign_count, "ddos": dist.ddos_count,
                   "total": dist.total},
        "content_hash": content_hash(ds),
    }
    tracks = tuple(run_track(track, split, cfg) for track in cfg.tracks)
    return ExperimentReport(config=cfg, dataset_info=dataset_info,
                            split_info=split_info, tracks=tracks,
                            generated_at=_generation_timestamp())


def _generation_timestamp():
    # Wall-clock stamps would break byte-identical reruns, so the timestamp
    # is only emitted when SOURCE_DATE_EPOCH pins it (reproducible-builds
    # convention).
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    return datetime.fromtimestamp(int(epoch), timezone.utc).isoformat()


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "split_ratio": cfg.split_ratio,
        "cv_folds": cfg.cv_folds,
        "seed": cfg.seed,
        "tracks": list(cfg.tracks),
        "models": [DISPLAY_NAMES[k] for k in cfg.models],
        "grids": {DISPLAY_NAMES[k]: {p: list(v) for p, v in grid.items()}
                  for k, grid in cfg.grids.items()},
        "smote": {"k_neighbors": cfg.smote.k_neighbors,
                  "target_ratio": cfg.smote.target_ratio, "seed": cfg.smote.seed},
        "lof": {"k_neighbors": cfg.lof.k_neighbors, "threshold": cfg.lof.threshold},
        "select_top_m": cfg.select_top_m,
    }


def _model_to_dict(m: ModelResult) -> dict:
    hp = {k: (list(v) if isinstance(v, tuple) else v)
          for k, v in m.hyperparameters.items()}
    return {
        "name": m.name,
        "kind": m.kind,
        "hyperparameters": hp,
        "training_accuracy": m.training_accuracy,
        "mean_cv_accuracy": m.mean_cv_accuracy,
        "folds": [{"fold": fr.fold, "train_accuracy": fr.train_accuracy,
                   "validation_accuracy": fr.validation_accuracy}
                  for fr in m.folds],
        "grid": [{"params": gp.params, "mean_cv_accuracy": gp.mean_cv_accuracy,
                  "error": gp.error} for gp in m.grid_trace],
        "test": m.test.to_dict(),
    }


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "format": "flowguard-report",
        "version": 1,
        "generated_at": report.generated_at,
        "config": config_to_dict(report.config),
        "dataset": dict(report.dataset_info),
        "split": dict(report.split_info),
        "tracks": [{
            "track": t.track,
            "pipeline": list(t.pipeline),
            "preprocessing": {
                "smote_added": t.smote_added,
                "lof_removed": t.lof_removed,
                "train_rows_after": t.train_rows,
                "constant_features": list(t.constant_features),
                "selected_features": (None if t.selected_features is None
                                      else list(t.selected_features)),
            },
            "models": [_model_to_dict(m) for m in t.models],
        } for t in report.tracks],
    }


def report_to_json(report: ExperimentReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def write_report_files(report: ExperimentReport, out_dir) -> list:
    """Write report.json plus per model-track plot data CSVs.

    Emits roc_<model>_<track>.csv (fpr,tpr), validation_curve_<model>_<track>.csv
    (fold, train and validation accuracy), and confusion_<model>_<track>.csv.
    Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out / "report.json"
    report_path.write_text(report_to_json(report), encoding="utf-8")
    written.append(report_path)

    for track in report.tracks:
        for m in track.models:
            tag = f"{m.name}_{track.track}"
            roc_path = out / f"roc_{tag}.csv"
            m.roc.to_csv(roc_path)
            written.append(roc_path)

            vc_path = out / f"validation_curve_{tag}.csv"
            lines = ["fold,train_accuracy,validation_accuracy"]
            for fr in m.folds:
                lines.append(f"{fr.fold},{fr.train_accuracy!r},{fr.validation_accuracy!r}")
            vc_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            written.append(vc_path)

            cm = m.test.confusion
            cm_path = out / f"confusion_{tag}.csv"
            cm_path.write_text(
                ",predicted_benign,predicted_ddos\n"
                f"actual_benign,{cm.tn},{cm.fp}\n"
                f"actual_ddos,{cm.fn},{cm.tp}\n", encoding="utf-8")
            written.append(cm_path)
    return written
