"""Random forest: bagged Gini CART trees with per-node feature sampling."""

from __future__ import annotations

import math

import numpy as np

from .base import TrainedModel
from .tree import TreeNodes, build_gini_tree, tree_apply


class RandomForestModel(TrainedModel):
    """Majority vote over n_trees; probability = fraction of trees voting 1.

    Tree t draws its bootstrap sample and per-node feature candidates from a
    dedicated generator seeded spec.seed + t, so trees are independent of
    training order and the whole fit is reproducible.
    """

    def __init__(self, spec, feature_arity, trees, importance):
        super().__init__(spec, feature_arity)
        self.trees = trees
        self.feature_importance = importance

    @classmethod
    def fit(cls, spec, X, y):
        hp = spec.hyperparameters
        n, d = X.shape
        n_candidates = max(1, int(math.sqrt(d)))
        importance = np.zeros(d, dtype=np.float64)
        trees = []
        for t in range(hp["n_trees"]):
            rng = np.random.default_rng(spec.seed + t)
            if hp["bootstrap"]:
                sample = rng.integers(0, n, size=n)
            else:
                sample = np.arange(n)
            trees.append(build_gini_tree(X[sample], y[sample],
                                         max_depth=hp["max_depth"],
                                         min_samples_split=hp["min_samples_split"],
                                         n_candidate_features=n_candidates,
                                         rng=rng, importance=importance))
        importance /= hp["n_trees"]
        return cls(spec, d, trees, importance)

    def predict_proba(self, X):
        X = self._check_arity(X)
        votes = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            votes += tree_apply(tree, X) >= 0.5
        return votes / len(self.trees)

    def to_state(self):
        return {"trees": [t.to_state() for t in self.trees],
                "feature_importance": self.feature_importance.tolist()}

    @classmethod
    def from_state(cls, spec, feature_arity, state):
        trees = [TreeNodes.from_state(s) for s in state["trees"]]
        importance = np.array(state["feature_importance"], dtype=np.float64)
        return cls(spec, feature_arity, trees, importance)
