"""Command-line interface.

Subcommands: run (full dual-track experiment), inspect (dataset summary),
synth (emit a synthetic CSV), evaluate (score a saved model on a CSV).
Errors exit nonzero with a stage-tagged message on stderr. Every number the
summary prints is also present (at full precision) in the serialized report.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classifiers as clf
from .dataset import (DEFAULT_LABEL_COLUMN, Dataset, apply_category_maps,
                      encode_categoricals, impute_missing, label_distribution,
                      load_csv)
from .experiment import (DISPLAY_NAMES, ExperimentConfig, report_to_dict,
                         run_full_experiment, write_report_files)
from .metrics import evaluate_predictions
from .preprocess import (LofConfig, SmoteConfig, apply_scaler, scaler_from_dict,
                         scaler_to_dict)
from .synth import SynthConfig, generate, write_csv


class StageError(Exception):
    """Carries the pipeline stage where a failure happened."""

    def __init__(self, stage, message):
        super().__init__(message)
        self.stage = stage


def _fail(stage, exc):
    raise StageError(stage, str(exc)) from exc


# Config-file keys (flat JSON) mirroring the scalar ExperimentConfig fields.
_CONFIG_KEYS = {
    "split_ratio": float,
    "cv_folds": int,
    "seed": int,
    "tracks": str,           # comma-separated
    "smote_k_neighbors": int,
    "smote_target_ratio": float,
    "smote_seed": int,
    "lof_k_neighbors": int,
    "lof_threshold": float,
    "select_top_m": int,
}


def _parse_synth_spec(text):
    """Parse "sep=6,n=2000,noise=0.01" style synthetic-data specs."""
    values = {"n_benign": 1000, "n_ddos": 1000, "features": 22, "sep": 1.0,
              "noise": 0.0, "seed": 0}
    if text.strip():
        for part in text.split(","):
            if "=" not in part:
                raise ValueError(f"bad synth spec fragment {part!r}; expected key=value")
            key, _, raw = part.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key == "n":
                values["n_benign"] = values["n_ddos"] = int(raw)
            elif key in ("n_benign", "n_ddos", "features", "seed"):
                values[key] = int(raw)
            elif key in ("sep", "noise"):
                values[key] = float(raw)
            else:
                raise ValueError(f"unknown synth spec key {key!r}")
    return SynthConfig(n_benign=values["n_benign"], n_ddos=values["n_ddos"],
                       n_features=values["features"],
                       class_separation=values["sep"],
                       noise_fraction=values["noise"], seed=values["seed"])


def _load_config_file(path):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail("config", exc)
    if not isinstance(raw, dict):
        _fail("config", ValueError("config file must hold a flat JSON object"))
    out = {}
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            _fail("config", ValueError(f"unknown config key {key!r}"))
        if value is not None:
            try:
                out[key] = _CONFIG_KEYS[key](value)
            except (TypeError, ValueError) as exc:
                _fail("config", ValueError(f"bad value for {key!r}: {exc}"))
    return out


def _build_experiment_config(args):
    settings = _load_config_file(args.config) if args.config else {}
    # Flags override file values.
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.folds is not None:
        settings["cv_folds"] = args.folds
    if args.ratio is not None:
        settings["split_ratio"] = args.ratio
    if args.tracks is not None:
        settings["tracks"] = args.tracks
    try:
        tracks = tuple(t.strip() for t in settings.get("tracks",
                       "imbalanced,balanced").split(",") if t.strip())
        smote = SmoteConfig(k_neighbors=settings.get("smote_k_neighbors", 5),
                            target_ratio=settings.get("smote_target_ratio", 1.0),
                            seed=settings.get("smote_seed", 0))
        lof = LofConfig(k_neighbors=settings.get("lof_k_neighbors", 20),
                        threshold=settings.get("lof_threshold", 1.5))
        return ExperimentConfig(split_ratio=settings.get("split_ratio", 0.8),
                                cv_folds=settings.get("cv_folds", 5),
                                seed=settings.get("seed", 0), tracks=tracks,
                                smote=smote, lof=lof,
                                select_top_m=settings.get("select_top_m"))
    except ValueError as exc:
        _fail("config", exc)


def _load_dataset(args):
    if (args.data is None) == (args.synth is None):
        _fail("load", ValueError("exactly one of --data or --synth is required"))
    if args.synth is not None:
        try:
            return generate(_parse_synth_spec(args.synth))
        except ValueError as exc:
            _fail("load", exc)
    try:
        ds = load_csv(args.data, label_column=args.label_column)
    except ValueError as exc:
        _fail("load", exc)
    try:
        return encode_categoricals(impute_missing(ds))
    except ValueError as exc:
        _fail("clean", exc)


def _print_summary(report):
    doc = report_to_dict(report)
    print(f"dataset: {doc['dataset']['provenance']} "
          f"({doc['dataset']['rows']} rows, {doc['dataset']['features']} features, "
          f"{doc['dataset']['labels']['benign']} benign / "
          f"{doc['dataset']['labels']['ddos']} ddos)")
    print(f"split: {doc['split']['train_rows']} train / {doc['split']['test_rows']} "
          f"test (ratio {doc['split']['ratio']}, seed {doc['split']['seed']})")
    header = (f"{'track':<12} {'model':<6} {'train_acc':>10} {'cv_acc':>10} "
              f"{'test_acc':>10} {'auc':>8} {'kappa':>8} {'mcc':>8} {'brier':>8}")
    print(header)
    for track in doc["tracks"]:
        for m in track["models"]:
            t = m["test"]
            print(f"{track['track']:<12} {m['name']:<6} "
                  f"{m['training_accuracy']:>10.4f} {m['mean_cv_accuracy']:>10.4f} "
                  f"{t['accuracy']:>10.4f} {t['auc']:>8.4f} {t['kappa']:>8.4f} "
                  f"{t['mcc']:>8.4f} {t['brier']:>8.4f}")


def _cmd_run(args):
    ds = _load_dataset(args)
    cfg = _build_experiment_config(args)
    try:
        report = run_full_experiment(cfg, ds)
    except ValueError as exc:
        _fail("experiment", exc)
    out_dir = Path(args.out)
    try:
        write_report_files(report, out_dir)
    except OSError as exc:
        _fail("write", exc)
    if args.save_models:
        _save_track_models(report, ds, cfg, out_dir)
    _print_summary(report)
    print(f"report written to {out_dir / 'report.json'}")
    return 0


def _save_track_models(report, ds, cfg, out_dir):
    # Retrain the chosen configuration per model-track and bundle the
    # pipeline so `evaluate` can reproduce preprocessing. Training is
    # deterministic, so these match the reported models exactly.
    from .dataset import stratified_split
    from .experiment import fit_track_pipeline

    split = stratified_split(ds, cfg.split_ratio, cfg.seed)
    for track_report in report.tracks:
        smote_cfg = cfg.smote if track_report.track == "balanced" else None
        proc_train, state = fit_track_pipeline(split.train, smote_cfg, cfg.lof,
                                               cfg.select_top_m, select_seed=cfg.seed)
        pipeline = {
            "scaler": scaler_to_dict(state.scaler),
            "category_maps": {k: list(v) for k, v in ds.category_maps.items()},
            "label_column": getattr(cfg, "label_column", DEFAULT_LABEL_COLUMN),
            "feature_names": list(split.train.feature_names),
            "selected": None if state.selected is None else list(state.selected),
        }
        for m in track_report.models:
            spec = clf.ModelSpec(kind=m.kind, hyperparameters=m.hyperparameters,
                                 seed=cfg.seed)
            model = clf.train(spec, proc_train)
            path = out_dir / f"model_{m.name}_{track_report.track}.json"
            clf.save_model(model, path, pipeline=pipeline)


def _cmd_inspect(args):
    try:
        ds = load_csv(args.data, label_column=args.label_column)
    except ValueError as exc:
        _fail("load", exc)
    dist = label_distribution(ds)
    print(f"path: {args.data}")
    print(f"rows: {ds.n_rows}")
    print(f"features: {ds.n_features}")
    print(f"labels: {dist.benign_count} benign / {dist.ddos_count} ddos")
    for j, name in enumerate(ds.feature_names):
        if ds.is_numeric:
            kind, missing = "numeric", int(sum(1 for v in ds.X[:, j] if v != v))
        else:
            col = list(ds.X[:, j])
            is_cat = any(isinstance(v, str) for v in col)
            kind = "categorical" if is_cat else "numeric"
            missing = sum(1 for v in col
                          if v is None or (isinstance(v, float) and v != v))
        suffix = f" ({missing} missing)" if missing else ""
        print(f"  {name}: {kind}{suffix}")
    return 0


def _cmd_synth(args):
    try:
        cfg = SynthConfig(n_benign=args.n_benign, n_ddos=args.n_ddos,
                          n_features=args.features, class_separation=args.sep,
                          noise_fraction=args.noise, seed=args.seed)
        ds = write_csv(cfg, args.out)
    except (ValueError, OSError) as exc:
        _fail("synth", exc)
    dist = label_distribution(ds)
    print(f"wrote {ds.n_rows} rows ({dist.benign_count} benign / "
          f"{dist.ddos_count} ddos, {ds.n_features} features) to {args.out}")
    return 0


def _cmd_evaluate(args):
    try:
        model, pipeline = clf.load_model(args.model)
    except (OSError, ValueError, KeyError) as exc:
        _fail("model", exc)
    if pipeline is None:
        _fail("model", ValueError(
            "model file carries no preprocessing bundle; save models via "
            "`flowguard run --save-models`"))
    label_column = args.label_column or pipeline.get("label_column",
                                                     DEFAULT_LABEL_COLUMN)
    try:
        ds = load_csv(args.data, label_column=label_column)
        ds = impute_missing(ds)
        ds = apply_category_maps(ds, {k: tuple(v) for k, v in
                                      pipeline.get("category_maps", {}).items()})
    except ValueError as exc:
        _fail("load", exc)
    try:
        ds = apply_scaler(scaler_from_dict(pipeline["scaler"]), ds)
        if pipeline.get("selected") is not None:
            keep = list(pipeline["selected"])
            ds = Dataset(feature_names=tuple(ds.feature_names[i] for i in keep),
                         X=ds.X[:, keep], y=ds.y, provenance=ds.provenance)
        pred = clf.predict(model, ds)
        report, _ = evaluate_predictions(ds.y, pred.labels, pred.probabilities)
    except ValueError as exc:
        _fail("evaluate", exc)
    print(f"model: {args.model} (kind {model.kind})")
    print(f"rows: {ds.n_rows}")
    for key, value in report.to_dict().items():
        if key in ("confusion", "degenerate"):
            continue
        print(f"{key}: {value:.6f}")
    cm = report.confusion
    print(f"confusion: tp={cm.tp} tn={cm.tn} fp={cm.fp} fn={cm.fn}")
    if args.out:
        lines = ["row,label,probability"]
        for i in range(ds.n_rows):
            lines.append(f"{i},{int(pred.labels[i])},{float(pred.probabilities[i])!r}")
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"predictions written to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flowguard",
        description="DDoS flow classification experiments (imbalanced vs "
                    "SMOTE-balanced training).")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the dual-track experiment")
    run.add_argument("--data", help="labeled CSV dataset")
    run.add_argument("--synth", metavar="SPEC",
                     help='synthetic data spec, e.g. "sep=6,n=2000,seed=0"')
    run.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN)
    run.add_argument("--tracks", help="comma list: imbalanced,balanced")
    run.add_argument("--seed", type=int)
    run.add_argument("--folds", type=int, help="cross-validation folds")
    run.add_argument("--ratio", type=float, help="train split ratio")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--config", help="flat JSON config file (flags override)")
    run.add_argument("--save-models", action="store_true",
                     help="also write model_<name>_<track>.json bundles")
    run.set_defaults(func=_cmd_run)

    inspect = sub.add_parser("inspect", help="summarize a dataset CSV")
    inspect.add_argument("data", help="CSV path")
    inspect.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN)
    inspect.set_defaults(func=_cmd_inspect)

    synth = sub.add_parser("synth", help="write a synthetic dataset CSV")
    synth.add_argument("--n-benign", type=int, default=1000)
    synth.add_argument("--n-ddos", type=int, default=1000)
    synth.add_argument("--features", type=int, default=22)
    synth.add_argument("--sep", type=float, default=1.0,
                       help="class separation in feature units")
    synth.add_argument("--noise", type=float, default=0.0,
                       help="fraction of labels flipped")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="CSV path to write")
    synth.set_defaults(func=_cmd_synth)

    evaluate = sub.add_parser("evaluate", help="score a saved model on a CSV")
    evaluate.add_argument("--model", required=True, help="model JSON file")
    evaluate.add_argument("--data", required=True, help="labeled CSV")
    evaluate.add_argument("--label-column")
    evaluate.add_argument("--out", help="optional predictions CSV")
    evaluate.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error[{exc.stage}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
