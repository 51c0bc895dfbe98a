"""Gradient-boosted trees on logistic loss with Newton leaf weights."""

from __future__ import annotations

import numpy as np

from .base import TrainedModel, mean_log_loss, sigmoid
from .tree import TreeNodes, build_newton_tree, tree_apply


class GradientBoostedTreesModel(TrainedModel):
    """Additive depth-limited trees; probability = sigmoid of the raw score.

    Each round fits a tree to the logistic-loss gradients g = p - y and
    hessians h = p(1 - p); leaf weights are the damped Newton step
    -G / (H + lambda) scaled by the learning rate. Split search is
    exhaustive, so training consumes no randomness. ``loss_curve`` holds the
    mean training loss before boosting and after every round.
    """

    def __init__(self, spec, feature_arity, trees, loss_curve):
        super().__init__(spec, feature_arity)
        self.trees = trees
        self.loss_curve = list(loss_curve)

    @classmethod
    def fit(cls, spec, X, y):
        hp = spec.hyperparameters
        eta = hp["learning_rate"]
        lam = hp["reg_lambda"]
        yf = y.astype(np.float64)
        scores = np.zeros(X.shape[0], dtype=np.float64)
        loss_curve = [mean_log_loss(scores, yf)]
        trees = []
        for _ in range(hp["rounds"]):
            p = sigmoid(scores)
            g = p - yf
            h = p * (1.0 - p)
            tree = build_newton_tree(X, g, h, max_depth=hp["depth"], reg_lambda=lam)
            trees.append(tree)
            scores += eta * tree_apply(tree, X)
            loss_curve.append(mean_log_loss(scores, yf))
        return cls(spec, X.shape[1], trees, loss_curve)

    def decision_scores(self, X):
        X = self._check_arity(X)
        eta = self.spec.hyperparameters["learning_rate"]
        scores = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            scores += eta * tree_apply(tree, X)
        return scores

    def predict_proba(self, X):
        return sigmoid(self.decision_scores(X))

    def to_state(self):
        return {"trees": [t.to_state() for t in self.trees],
                "loss_curve": list(self.loss_curve)}

    @classmethod
    def from_state(cls, spec, feature_arity, state):
        trees = [TreeNodes.from_state(s) for s in state["trees"]]
        return cls(spec, feature_arity, trees, state["loss_curve"])
