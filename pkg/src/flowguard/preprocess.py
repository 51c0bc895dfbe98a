"""Training-partition preprocessing: standardization, SMOTE, LOF cleaning.

Pipeline order when everything is enabled: SMOTE the training partition,
remove its outliers by local outlier factor, then fit the scaler on what
remains. Test data only ever sees the fitted scaler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .distance import iter_sq_dist_blocks, sq_dists

# Substitute reachability density for duplicate-heavy neighborhoods whose
# mean reachability distance is exactly zero.
LOF_DENSITY_EPS = 1e-10


@dataclass(frozen=True)
class Scaler:
    """Per-feature standardization parameters fitted on training data."""

    mean: np.ndarray
    scale: np.ndarray
    constant_mask: np.ndarray

    def __post_init__(self):
        for name in ("mean", "scale", "constant_mask"):
            arr = np.array(getattr(self, name),
                           dtype=bool if name == "constant_mask" else np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_features(self):
        return len(self.mean)


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not self.target_ratio > 0:
            raise ValueError("target_ratio must be positive")


@dataclass(frozen=True)
class LofConfig:
    k_neighbors: int = 20
    threshold: float = 1.5

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not self.threshold > 1.0:
            raise ValueError("threshold must exceed 1.0 (LOF of uniform data)")


@dataclass(frozen=True)
class OutlierRemoval:
    dataset: Dataset
    removed_count: int
    scores: np.ndarray


def _require_numeric(ds: Dataset, op: str) -> None:
    if not ds.is_numeric:
        raise ValueError(f"{op} requires a numeric (encoded) dataset")


def fit_scaler(train: Dataset) -> Scaler:
    """Per-feature mean and population (1/n) standard deviation.

    Columns whose values are all identical get scale 1 and are flagged in
    constant_mask so standardization maps them to exactly zero.
    """
    _require_numeric(train, "fit_scaler")
    if train.n_rows == 0:
        raise ValueError("cannot fit a scaler on an empty dataset")
    X = train.X
    mean = X.mean(axis=0)
    # Exact all-equal test, not std == 0: float means leave ~1e-17 residual
    # std on genuinely constant columns.
    constant = np.all(X == X[0], axis=0)
    scale = np.sqrt(X.var(axis=0))
    scale = np.where(constant, 1.0, scale)
    return Scaler(mean=mean, scale=scale, constant_mask=constant)


def apply_scaler(scaler: Scaler, ds: Dataset) -> Dataset:
    """(x - mean) / scale per feature; labels pass through untouched."""
    _require_numeric(ds, "apply_scaler")
    if ds.n_features != scaler.n_features:
        raise ValueError(
            f"scaler fitted on {scaler.n_features} features, dataset has {ds.n_features}")
    X = (ds.X - scaler.mean) / scaler.scale
    return ds.replace(X=X)


def scaler_to_dict(scaler: Scaler) -> dict:
    return {
        "mean": scaler.mean.tolist(),
        "scale": scaler.scale.tolist(),
        "constant_mask": [bool(b) for b in scaler.constant_mask],
    }


def scaler_from_dict(data: dict) -> Scaler:
    return Scaler(mean=np.array(data["mean"], dtype=np.float64),
                  scale=np.array(data["scale"], dtype=np.float64),
                  constant_mask=np.array(data["constant_mask"], dtype=bool))


def _minority_label(counts) -> int:
    # Equal counts: call class 1 the minority; with target_ratio <= 1 this
    # path synthesizes nothing anyway.
    return 1 if counts[1] <= counts[0] else 0


def smote_oversample(train: Dataset, cfg: SmoteConfig) -> Dataset:
    """Append interpolated minority samples until the class ratio hits target.

    Each synthetic row is x_i + u * (x_nn - x_i) with u ~ Uniform(0,1), where
    x_nn is one of the k nearest minority neighbors of minority row x_i
    (Euclidean; distance ties break toward the lower row index). Parents are
    visited round-robin. The original rows are preserved as an exact prefix.
    Never run this on a test partition.
    """
    _require_numeric(train, "smote_oversample")
    counts = {0: int(np.sum(train.y == 0)), 1: int(np.sum(train.y == 1))}
    if counts[0] == 0 or counts[1] == 0:
        raise ValueError("SMOTE needs both classes present")
    minority = _minority_label(counts)
    n_min, n_maj = counts[minority], counts[1 - minority]
    needed = int(round(cfg.target_ratio * n_maj)) - n_min
    if needed <= 0:
        return train.replace()
    if cfg.k_neighbors >= n_min:
        raise ValueError(
            f"k_neighbors={cfg.k_neighbors} must be < minority class size {n_min}")

    min_idx = np.flatnonzero(train.y == minority)
    Xm = np.ascontiguousarray(train.X[min_idx])
    k = cfg.k_neighbors
    # k nearest minority neighbors per minority row, self excluded. Stable
    # argsort on squared distances keeps index order among exact ties.
    neighbors = np.empty((n_min, k), dtype=np.int64)
    for start, stop, block in iter_sq_dist_blocks(Xm, Xm):
        block[np.arange(stop - start), np.arange(start, stop)] = np.inf
        order = np.argsort(block, axis=1, kind="stable")
        neighbors[start:stop] = order[:, :k]

    rng = np.random.default_rng(cfg.seed)
    synth = np.empty((needed, train.n_features), dtype=np.float64)
    for j in range(needed):
        i = j % n_min
        pick = int(rng.integers(k))
        u = rng.random()
        parent = Xm[i]
        synth[j] = parent + u * (Xm[neighbors[i, pick]] - parent)

    X = np.vstack([train.X, synth])
    y = np.concatenate([train.y, np.full(needed, minority, dtype=np.int64)])
    return train.replace(X=X, y=y)


def lof_scores(ds: Dataset, k_neighbors: int) -> np.ndarray:
    """Classic local outlier factor for every row.

    k-distance(p) is the distance to p's k-th nearest other row; the
    neighborhood is every other row within that distance (ties included, so
    it can exceed k). reach-dist(p, o) = max(k-distance(o), d(p, o)); local
    reachability density is the inverse mean reach distance, substituting
    1/LOF_DENSITY_EPS when that mean is exactly zero (duplicate-heavy data);
    the score is the mean ratio of neighbor densities to own density.
    Scores near 1 mean inlier.
    """
    _require_numeric(ds, "lof_scores")
    n = ds.n_rows
    if not 0 < k_neighbors < n:
        raise ValueError(f"k_neighbors must lie in [1, {n - 1}], got {k_neighbors}")
    X = np.ascontiguousarray(ds.X)
    k = k_neighbors

    # Pass 1: squared k-distance per row (self excluded via +inf).
    kd2 = np.empty(n, dtype=np.float64)
    for start, stop, block in iter_sq_dist_blocks(X, X):
        block[np.arange(stop - start), np.arange(start, stop)] = np.inf
        kd2[start:stop] = np.partition(block, k - 1, axis=1)[:, k - 1]

    # Pass 2: local reachability density.
    lrd = np.empty(n, dtype=np.float64)
    for start, stop, block in iter_sq_dist_blocks(X, X):
        rows = np.arange(stop - start)
        block[rows, np.arange(start, stop)] = np.inf
        member = block <= kd2[start:stop, None]
        reach = np.sqrt(np.maximum(block, kd2[None, :]))  # inf at self; never summed
        total = np.sum(reach, axis=1, where=member)
        count = member.sum(axis=1)
        mean_reach = total / count
        with np.errstate(divide="ignore"):
            lrd[start:stop] = np.where(mean_reach == 0.0, 1.0 / LOF_DENSITY_EPS,
                                       1.0 / mean_reach)

    # Pass 3: mean neighbor-density ratio.
    scores = np.empty(n, dtype=np.float64)
    for start, stop, block in iter_sq_dist_blocks(X, X):
        rows = np.arange(stop - start)
        block[rows, np.arange(start, stop)] = np.inf
        member = block <= kd2[start:stop, None]
        neighbor_lrd = member @ lrd
        scores[start:stop] = neighbor_lrd / member.sum(axis=1) / lrd[start:stop]
    return scores


def remove_outliers(train: Dataset, cfg: LofConfig) -> OutlierRemoval:
    """Drop training rows whose LOF score exceeds the threshold.

    Training data only. Raises if removal would empty either class.
    """
    scores = lof_scores(train, cfg.k_neighbors)
    keep = scores <= cfg.threshold
    for cls in (0, 1):
        cls_mask = train.y == cls
        if cls_mask.any() and not (keep & cls_mask).any():
            raise ValueError(
                f"outlier removal would delete every class-{cls} training record")
    kept = train.take(np.flatnonzero(keep))
    return OutlierRemoval(dataset=kept, removed_count=int(np.sum(~keep)), scores=scores)
