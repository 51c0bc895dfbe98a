"""Versioned JSON persistence for trained models.

The file is self-describing: format tag, version, model kind, seed,
hyperparameters, feature arity, learned state, and an optional pipeline
bundle (scaler, category maps, ...) so a saved model can reproduce its
train-time preprocessing at evaluation time. JSON's repr-based float
round-trip is exact, so save -> load -> predict is bit-identical.
"""

from __future__ import annotations

import json

from .base import ModelSpec

FORMAT_TAG = "flowguard-model"
FORMAT_VERSION = 1


def _registry():
    from .boosting import GradientBoostedTreesModel
    from .forest import RandomForestModel
    from .knn import KnnModel
    from .mlp import MlpModel
    from .svc import LinearSvcModel
    return {"RF": RandomForestModel, "GBT": GradientBoostedTreesModel,
            "KNN": KnnModel, "MLP": MlpModel, "SVC": LinearSvcModel}


def save_model(model, path, pipeline: dict | None = None) -> None:
    hp = {}
    for key, value in model.spec.hyperparameters.items():
        hp[key] = list(value) if isinstance(value, tuple) else value
    doc = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "kind": model.spec.kind,
        "seed": model.spec.seed,
        "hyperparameters": hp,
        "feature_arity": model.feature_arity,
        "state": model.to_state(),
    }
    if pipeline is not None:
        doc["pipeline"] = pipeline
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    """Returns (model, pipeline_dict_or_None)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_TAG:
        raise ValueError(f"{path!r} is not a {FORMAT_TAG} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model file version {doc.get('version')!r}")
    kind = doc["kind"]
    registry = _registry()
    if kind not in registry:
        raise ValueError(f"unknown model kind {kind!r} in {path!r}")
    spec = ModelSpec(kind=kind, hyperparameters=doc["hyperparameters"],
                     seed=doc["seed"])
    model = registry[kind].from_state(spec, doc["feature_arity"], doc["state"])
    return model, doc.get("pipeline")
