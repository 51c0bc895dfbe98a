"""Train-side preprocessing: standardization, oversampling, outlier pruning.

Each transform is fitted on training data only; the held-out partition is
never resampled, only rescaled with the training statistics.
"""

import numpy as np

from flowguard import (
    Dataset,
    LofConfig,
    SmoteConfig,
    SynthConfig,
    apply_scaler,
    fit_scaler,
    generate,
    label_distribution,
    lof_scores,
    remove_outliers,
    smote_oversample,
    stratified_split,
)

ds = generate(SynthConfig(n_benign=300, n_ddos=100, n_features=6,
                          class_separation=3.0, seed=1))
split = stratified_split(ds, 0.8, seed=1)

dist = label_distribution(split.train)
print(f"train before: {dist.benign_count} benign / {dist.ddos_count} ddos")

balanced = smote_oversample(split.train, SmoteConfig(k_neighbors=5, seed=1))
dist = label_distribution(balanced)
print(f"after smote:  {dist.benign_count} benign / {dist.ddos_count} ddos "
      f"(+{balanced.n_rows - split.train.n_rows} synthetic minority rows)")

# synthetic rows interpolate between real minority neighbors
first_new = balanced.X[split.train.n_rows]
print(f"first synthetic row: {np.round(first_new, 3)}")

pruned = remove_outliers(balanced, LofConfig(k_neighbors=20, threshold=1.5))
print(f"lof removed {pruned.removed_count} rows "
      f"(max score {pruned.scores.max():.3f})")

scaler = fit_scaler(pruned.dataset)
train = apply_scaler(scaler, pruned.dataset)
test = apply_scaler(scaler, split.test)
print(f"train feature means after scaling: {np.round(train.X.mean(axis=0), 12)}")
print(f"test rows unchanged in count: {test.n_rows == split.test.n_rows}")

# a far-away point sticks out immediately in the density scores
spiked = Dataset(feature_names=split.train.feature_names,
                 X=np.vstack([split.train.X, [[50.0] * 6]]),
                 y=np.append(split.train.y, 1))
scores = lof_scores(spiked, k_neighbors=20)
print(f"planted outlier score: {scores[-1]:.1f} "
      f"vs median {np.median(scores[:-1]):.3f}")
