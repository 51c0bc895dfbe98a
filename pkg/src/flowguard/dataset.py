"""Loading, cleaning, encoding, and splitting of labeled flow-record datasets.

The on-disk format is plain UTF-8 CSV with a mandatory header row. One column
(default ``label``) holds the class: 0 = benign, 1 = DDoS. Every other column
is a feature, typed numeric when all of its values parse as numbers and
categorical otherwise.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

# Cell values treated as missing, compared case-insensitively after stripping.
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "?"})

DEFAULT_LABEL_COLUMN = "label"


class LoadError(ValueError):
    """Raised when a CSV file cannot be interpreted as a flow dataset."""


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus binary labels.

    ``X`` is float64 once fully numeric; while raw categorical tokens are
    still present it is an object array mixing floats, strings, and gaps
    (``nan`` for numeric cells, ``None`` for categorical ones).
    """

    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    provenance: str = ""
    category_maps: dict = field(default_factory=dict)

    def __post_init__(self):
        names = tuple(str(n) for n in self.feature_names)
        X = np.array(self.X, copy=True)
        if X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        y = np.array(self.y, dtype=np.int64, copy=True)
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise ValueError("y must be 1-dimensional with one label per row")
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length must match X columns")
        if len(y) and not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 (benign) or 1 (ddos)")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "category_maps",
                           {k: tuple(v) for k, v in self.category_maps.items()})

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def is_numeric(self):
        return self.X.dtype.kind == "f"

    def replace(self, **changes) -> "Dataset":
        base = {
            "feature_names": self.feature_names,
            "X": self.X,
            "y": self.y,
            "provenance": self.provenance,
            "category_maps": self.category_maps,
        }
        base.update(changes)
        return Dataset(**base)

    def take(self, indices) -> "Dataset":
        """Row subset in the given index order."""
        idx = np.asarray(indices, dtype=np.int64)
        return self.replace(X=self.X[idx], y=self.y[idx])


@dataclass(frozen=True)
class LabelDistribution:
    benign_count: int
    ddos_count: int

    @property
    def total(self):
        return self.benign_count + self.ddos_count


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    ratio: float
    seed: int


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def load_csv(path, label_column: str = DEFAULT_LABEL_COLUMN) -> Dataset:
    """Read a header-mandatory UTF-8 CSV into a Dataset.

    Columns are typed numeric when every non-missing value parses as a finite
    number, categorical otherwise. Label values must be 0 or 1; violations
    raise LoadError naming the offending data row (1-based, excluding the
    header).
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise LoadError(f"cannot open dataset file {path!r}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path!r} is empty; a header row is mandatory") from None
        dupes = [name for name, cnt in Counter(header).items() if cnt > 1]
        if dupes:
            raise LoadError(f"duplicate column name(s) in header: {sorted(dupes)}")
        if label_column not in header:
            raise LoadError(f"label column {label_column!r} not found in header {header}")
        label_idx = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)

        rows = []
        labels = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise LoadError(
                    f"row {row_no}: expected {len(header)} fields, got {len(row)}")
            cell = row[label_idx]
            try:
                val = float(cell)
            except ValueError:
                raise LoadError(f"row {row_no}: label {cell!r} is not a number") from None
            if val not in (0.0, 1.0):
                raise LoadError(f"row {row_no}: label {cell!r} outside {{0, 1}}")
            labels.append(int(val))
            rows.append([c for i, c in enumerate(row) if i != label_idx])

    n, d = len(rows), len(feature_names)
    # Type each column: numeric iff all non-missing cells parse as finite floats.
    numeric_cols = []
    parsed = [[None] * d for _ in range(n)]
    for j in range(d):
        numeric = True
        for i in range(n):
            cell = rows[i][j]
            if _is_missing(cell):
                continue
            try:
                v = float(cell)
            except ValueError:
                numeric = False
                break
            if not math.isfinite(v):
                continue  # treated as a gap, filled by imputation
            parsed[i][j] = v
        numeric_cols.append(numeric)

    all_numeric = all(numeric_cols)
    X = np.empty((n, d), dtype=np.float64 if all_numeric else object)
    for j in range(d):
        if numeric_cols[j]:
            for i in range(n):
                v = parsed[i][j]
                X[i, j] = np.nan if v is None else v
        else:
            for i in range(n):
                cell = rows[i][j]
                X[i, j] = None if _is_missing(cell) else cell

    return Dataset(feature_names=feature_names, X=X, y=np.array(labels, dtype=np.int64),
                   provenance=str(path))


def _column_is_categorical(col) -> bool:
    return any(isinstance(v, str) for v in col)


def impute_missing(ds: Dataset) -> Dataset:
    """Fill gaps: numeric columns by their median, categorical by their mode.

    Mode ties break lexicographically smallest. A column with every value
    missing cannot be imputed and raises ValueError naming it. Idempotent.
    """
    if ds.is_numeric:
        X = np.array(ds.X, dtype=np.float64)
        for j in range(ds.n_features):
            col = X[:, j]
            gaps = np.isnan(col)
            if not gaps.any():
                continue
            if gaps.all():
                raise ValueError(f"column {ds.feature_names[j]!r} is entirely missing")
            col[gaps] = float(np.median(col[~gaps]))
        return ds.replace(X=X)

    X = np.array(ds.X, dtype=object)
    for j in range(ds.n_features):
        col = list(X[:, j])
        present = [v for v in col
                   if v is not None and not (isinstance(v, float) and math.isnan(v))]
        if not present:
            raise ValueError(f"column {ds.feature_names[j]!r} is entirely missing")
        if _column_is_categorical(present):
            counts = Counter(present)
            top = max(counts.values())
            fill = min(tok for tok, c in counts.items() if c == top)
        else:
            fill = float(np.median(np.array(present, dtype=np.float64)))
        for i, v in enumerate(col):
            if v is None or (isinstance(v, float) and math.isnan(v)):
                X[i, j] = fill
    return ds.replace(X=X)


def encode_categoricals(ds: Dataset) -> Dataset:
    """Map each categorical column to integer codes by first appearance.

    Codes run 0, 1, 2, ... in order of first occurrence. The per-column
    token order is recorded in the returned dataset's ``category_maps`` for
    reuse on later data (see apply_category_maps). All-numeric input is
    returned unchanged. Requires missing values to be imputed first.
    """
    if ds.is_numeric:
        if np.isnan(ds.X).any():
            raise ValueError("impute missing values before encoding")
        return ds

    maps = dict(ds.category_maps)
    X = np.empty(ds.X.shape, dtype=np.float64)
    for j in range(ds.n_features):
        col = list(ds.X[:, j])
        for v in col:
            if v is None or (isinstance(v, float) and math.isnan(v)):
                raise ValueError("impute missing values before encoding")
        if _column_is_categorical(col):
            order = []
            codes = {}
            for v in col:
                tok = str(v)
                if tok not in codes:
                    codes[tok] = len(order)
                    order.append(tok)
            maps[ds.feature_names[j]] = tuple(order)
            X[:, j] = [codes[str(v)] for v in col]
        else:
            X[:, j] = [float(v) for v in col]
    return ds.replace(X=X, category_maps=maps)


def apply_category_maps(ds: Dataset, maps: dict) -> Dataset:
    """Encode categorical columns using previously recorded token orders.

    Tokens unseen at fit time get code = count of known categories for that
    column. Columns not named in ``maps`` must already be numeric.
    """
    if ds.is_numeric:
        return ds
    X = np.empty(ds.X.shape, dtype=np.float64)
    for j, name in enumerate(ds.feature_names):
        col = list(ds.X[:, j])
        if name in maps:
            known = {tok: code for code, tok in enumerate(maps[name])}
            unseen = len(known)
            X[:, j] = [known.get(str(v), unseen) for v in col]
        else:
            if _column_is_categorical(col):
                raise ValueError(f"no category map for categorical column {name!r}")
            X[:, j] = [float(v) for v in col]
    return ds.replace(X=X, category_maps=dict(maps))


def save_category_maps(maps: dict, path) -> None:
    """Persist column -> token-order mappings as a JSON sidecar."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: list(v) for k, v in maps.items()}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_category_maps(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return {k: tuple(v) for k, v in raw.items()}


def label_distribution(ds: Dataset) -> LabelDistribution:
    return LabelDistribution(benign_count=int(np.sum(ds.y == 0)),
                             ddos_count=int(np.sum(ds.y == 1)))


def stratified_split(ds: Dataset, ratio: float, seed: int) -> SplitPair:
    """Class-stratified train/test split.

    Each class contributes floor(ratio * class_count) rows to train, chosen
    uniformly under the seed; the remainder forms the test partition. Row
    order within each partition follows the original dataset order.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    train_idx = []
    test_idx = []
    for cls in (0, 1):
        cls_idx = np.flatnonzero(ds.y == cls)
        if len(cls_idx) < 2:
            raise ValueError(
                f"class {cls} has {len(cls_idx)} record(s); need at least 2 to split")
        perm = rng.permutation(cls_idx)
        n_train = int(math.floor(ratio * len(cls_idx)))
        train_idx.append(perm[:n_train])
        test_idx.append(perm[n_train:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return SplitPair(train=ds.take(train_idx), test=ds.take(test_idx),
                     ratio=ratio, seed=seed)


def stratified_fold_indices(y, n_folds: int, seed: int):
    """Validation-index arrays for stratified k-fold CV.

    Each class's indices are permuted under the seed and dealt into folds as
    evenly as possible. Every class must have at least n_folds records so no
    fold lacks a class.
    """
    y = np.asarray(y)
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    per_fold = [[] for _ in range(n_folds)]
    for cls in (0, 1):
        cls_idx = np.flatnonzero(y == cls)
        if len(cls_idx) < n_folds:
            raise ValueError(
                f"class {cls} has {len(cls_idx)} record(s), fewer than {n_folds} folds")
        perm = rng.permutation(cls_idx)
        for f, chunk in enumerate(np.array_split(perm, n_folds)):
            per_fold[f].append(chunk)
    return [np.sort(np.concatenate(chunks)) for chunks in per_fold]


def dataset_to_csv(ds: Dataset, path, label_column: str = DEFAULT_LABEL_COLUMN) -> None:
    """Write a Dataset back out in the standard CSV format."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ds.feature_names) + [label_column])
        for i in range(ds.n_rows):
            row = []
            for v in ds.X[i]:
                if isinstance(v, str):
                    row.append(v)
                else:
                    row.append(repr(float(v)))
            row.append(int(ds.y[i]))
            writer.writerow(row)


def content_hash(ds: Dataset) -> str:
    """SHA-256 over the numeric matrix, labels, and schema; split identity."""
    if not ds.is_numeric:
        raise ValueError("content_hash requires a numeric (encoded) dataset")
    h = hashlib.sha256()
    h.update(repr(ds.X.shape).encode())
    h.update(np.ascontiguousarray(ds.X, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(ds.y, dtype=np.int64).tobytes())
    h.update("\x00".join(ds.feature_names).encode())
    return h.hexdigest()
