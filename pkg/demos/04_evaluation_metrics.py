"""Scoring a detector: confusion counts, rank metrics, calibration."""

import numpy as np

from flowguard import SynthConfig, generate, stratified_split
from flowguard.classifiers import make_spec, predict, train
from flowguard.metrics import (
    ConfusionMatrix,
    agreement_metrics,
    core_metrics,
    evaluate_predictions,
)
from flowguard.preprocess import apply_scaler, fit_scaler

# hand-sized example first: 1 caught attack, 2 clean passes, 1 miss
cm = ConfusionMatrix(tp=1, tn=2, fp=0, fn=1)
m = core_metrics(cm)
print(f"toy case: acc {m.accuracy} precision {m.precision} "
      f"recall {m.recall} f1 {m.f1:.4f}")

# kappa ignores accuracy that chance alone would deliver
a = agreement_metrics(ConfusionMatrix(tp=1, tn=1, fp=1, fn=1))
print(f"coin-flip agreement: kappa {a.kappa} mcc {a.mcc}")

ds = generate(SynthConfig(n_benign=600, n_ddos=400, n_features=8,
                          class_separation=2.0, seed=3))
split = stratified_split(ds, 0.8, seed=3)
scaler = fit_scaler(split.train)
model = train(make_spec("GBT", seed=0), apply_scaler(scaler, split.train))
test = apply_scaler(scaler, split.test)
out = predict(model, test)

report, curve = evaluate_predictions(test.y, out.labels, out.probabilities)
d = report.to_dict()
for key in ("accuracy", "precision", "recall", "f1", "auc", "kappa", "mcc",
            "brier"):
    print(f"{key:>9}: {d[key]:.4f}")
cmd = d["confusion"]
print(f"confusion: tp={cmd['tp']} tn={cmd['tn']} fp={cmd['fp']} fn={cmd['fn']}")

# the roc curve walks from (0,0) to (1,1); its area is the auc
print(f"roc has {len(curve.fpr)} points, "
      f"starts ({curve.fpr[0]}, {curve.tpr[0]}), "
      f"ends ({curve.fpr[-1]}, {curve.tpr[-1]}), area {curve.auc:.4f}")
mid = len(curve.fpr) // 2
print(f"mid-curve operating point: fpr {curve.fpr[mid]:.3f} "
      f"tpr {curve.tpr[mid]:.3f} @ threshold {curve.thresholds[mid]:.3f}")

# headline accuracy is always recomputable from the stored matrix
total = cmd["tp"] + cmd["tn"] + cmd["fp"] + cmd["fn"]
print(f"accuracy check: {(cmd['tp'] + cmd['tn']) / total == d['accuracy']}")
