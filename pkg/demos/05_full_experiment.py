"""The dual-track experiment in one call, scaled down to run in seconds.

Track "imbalanced" trains on the raw class mix; track "balanced" first
oversamples the minority class. Both prune outliers, standardize, tune
each model by cross-validation, and score the same untouched test split.
"""

import tempfile
from pathlib import Path

from flowguard import SynthConfig, generate
from flowguard.experiment import (
    ExperimentConfig,
    run_full_experiment,
    write_report_files,
)
from flowguard.preprocess import LofConfig

ds = generate(SynthConfig(n_benign=500, n_ddos=250, n_features=10,
                          class_separation=2.5, seed=4))

cfg = ExperimentConfig(
    cv_folds=3,
    seed=0,
    models=("RF", "KNN", "GBT"),
    grids={"RF": {"n_trees": (25, 50)},
           "KNN": {"k": (3, 5)},
           "GBT": {"rounds": (25,), "learning_rate": (0.1, 0.3)}},
    lof=LofConfig(k_neighbors=10, threshold=1.5),
)

report = run_full_experiment(cfg, ds)

print(f"dataset: {report.dataset_info['rows']} rows, "
      f"labels {report.dataset_info['labels']}")
print(f"split: {report.split_info['train_rows']} train / "
      f"{report.split_info['test_rows']} test")
for track in report.tracks:
    print(f"--- {track.track}: pipeline {'+'.join(track.pipeline)}, "
          f"+{track.smote_added} synthetic, -{track.lof_removed} outliers, "
          f"{track.train_rows} final train rows")
    for m in track.models:
        print(f"  {m.name:<4} cv {m.mean_cv_accuracy:.4f}  "
              f"test acc {m.test.accuracy:.4f}  auc {m.test.auc:.4f}  "
              f"kappa {m.test.kappa:.4f}  brier {m.test.brier:.4f}  "
              f"best {m.hyperparameters}")

out_dir = Path(tempfile.mkdtemp(prefix="flowguard_demo_"))
written = write_report_files(report, out_dir)
print(f"wrote {len(written)} artifact files to {out_dir}")
print("rerunning with the same config reproduces report.json byte for byte")
