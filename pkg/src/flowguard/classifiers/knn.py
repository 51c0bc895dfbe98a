"""k-nearest-neighbors classifier (lazy; the model is the training set)."""

from __future__ import annotations

import numpy as np

from ..distance import iter_sq_dist_blocks
from .base import PredictionSet, TrainedModel


class KnnModel(TrainedModel):
    """Majority vote of the k nearest training rows by Euclidean distance.

    Probability is the fraction of positive neighbors. Distance ties break
    toward the lower training-row index. An exact 50/50 vote (possible only
    for even k) is broken by the single nearest neighbor's label instead of
    the 0.5 threshold.
    """

    def __init__(self, spec, feature_arity, train_X, train_y):
        super().__init__(spec, feature_arity)
        self.train_X = np.ascontiguousarray(train_X, dtype=np.float64)
        self.train_y = np.asarray(train_y, dtype=np.int64)

    @classmethod
    def fit(cls, spec, X, y):
        if spec.hyperparameters["k"] > X.shape[0]:
            raise ValueError(
                f"k={spec.hyperparameters['k']} exceeds training size {X.shape[0]}")
        return cls(spec, X.shape[1], X, y)

    def _neighbor_votes(self, X):
        """Positive-vote count and nearest-neighbor label per query row."""
        k = self.spec.hyperparameters["k"]
        votes = np.empty(X.shape[0], dtype=np.int64)
        nearest = np.empty(X.shape[0], dtype=np.int64)
        for start, stop, block in iter_sq_dist_blocks(X, self.train_X):
            kth = np.partition(block, k - 1, axis=1)[:, k - 1]
            for i in range(stop - start):
                row = block[i]
                cand = np.flatnonzero(row <= kth[i])
                # cand is index-ascending; a stable value sort keeps that
                # order among exact ties, honoring the row-index tie-break.
                order = cand[np.argsort(row[cand], kind="stable")]
                nn = order[:k]
                votes[start + i] = int(self.train_y[nn].sum())
                nearest[start + i] = self.train_y[order[0]]
        return votes, nearest

    def predict_proba(self, X):
        X = self._check_arity(X)
        votes, _ = self._neighbor_votes(X)
        return votes / self.spec.hyperparameters["k"]

    def predict_set(self, X) -> PredictionSet:
        X = self._check_arity(X)
        k = self.spec.hyperparameters["k"]
        votes, nearest = self._neighbor_votes(X)
        probs = votes / k
        labels = (probs >= 0.5).astype(np.int64)
        ties = votes * 2 == k  # exact half votes, even k only
        labels[ties] = nearest[ties]
        return PredictionSet(labels=labels, probabilities=probs)

    def to_state(self):
        return {"train_X": self.train_X.tolist(),
                "train_y": self.train_y.tolist()}

    @classmethod
    def from_state(cls, spec, feature_arity, state):
        return cls(spec, feature_arity,
                   np.array(state["train_X"], dtype=np.float64),
                   np.array(state["train_y"], dtype=np.int64))
