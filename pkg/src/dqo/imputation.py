"""kNN estimation of unanswered features from the answered ones.

Unknown features are filled from the k training rows nearest to the query on
the currently-known dimensions (standardized Euclidean distance); continuous
features take the neighbor mean, discrete ones the neighbor mode. The same
machinery estimates each feature's measurement error delta_f as the RMSE of
predicting that feature for every training row from its neighbors (self
excluded), which is what the prediction-interval formula charges for
imputed-but-unanswered features. (Mean absolute error would be the obvious
alternative for delta; RMSE is the fixed choice here.)

Ties are deterministic: equidistant neighbors resolve to the lowest row
index, mode ties to the lowest value. Feature ids are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial.distance import cdist

from .data import DatasetTable


@dataclass(frozen=True)
class ImputerConfig:
    """Neighbor count plus per-feature standardization from training data.

    Features with zero standard deviation are excluded from the distance.
    """

    k: int
    means: np.ndarray
    sds: np.ndarray

    def __post_init__(self) -> None:
        means = np.asarray(self.means, dtype=float)
        sds = np.asarray(self.sds, dtype=float)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if means.shape != sds.shape or means.ndim != 1:
            raise ValueError("means and sds must be matching 1-d arrays")
        if np.any(sds < 0):
            raise ValueError("standard deviations must be non-negative")

    @classmethod
    def from_table(cls, table: DatasetTable, k: int) -> "ImputerConfig":
        if k > table.n_rows:
            raise ValueError(f"k={k} exceeds the {table.n_rows} training rows")
        return cls(k=k, means=table.x.mean(axis=0), sds=table.x.std(axis=0))


def _distance_columns(known: Iterable[int], sds: np.ndarray) -> list[int]:
    return [f - 1 for f in sorted(known) if sds[f - 1] > 0.0]


def _mode(values: np.ndarray) -> float:
    uniq, counts = np.unique(values, return_counts=True)
    return float(uniq[np.argmax(counts)])  # first argmax = lowest value


def _column_estimate(values: np.ndarray, discrete: bool) -> float:
    return _mode(values) if discrete else float(values.mean())


def estimate_features(
    x_train: np.ndarray,
    x: np.ndarray,
    known: Iterable[int],
    config: ImputerConfig,
    discrete_mask: np.ndarray,
) -> np.ndarray:
    """Fill unknown entries of x from the k nearest training rows.

    ``x`` is read only on the known feature ids; known entries are copied
    through unchanged. With no known features (cold start) every entry falls
    back to the training marginal mean/mode.
    """
    x_train = np.asarray(x_train, dtype=float)
    x = np.asarray(x, dtype=float)
    n, d = x_train.shape
    known = frozenset(known)
    if not known <= set(range(1, d + 1)):
        raise ValueError(f"known ids {sorted(known)} outside 1..{d}")
    if config.k > n:
        raise ValueError(f"k={config.k} exceeds the {n} training rows")
    discrete_mask = np.asarray(discrete_mask, dtype=bool)

    z = np.empty(d)
    for f in known:
        z[f - 1] = x[f - 1]
    unknown = [f for f in range(1, d + 1) if f not in known]
    if not unknown:
        return z

    if not known:
        for f in unknown:
            z[f - 1] = _column_estimate(x_train[:, f - 1], discrete_mask[f - 1])
        return z

    cols = _distance_columns(known, config.sds)
    if cols:
        diffs = (x_train[:, cols] - x[cols]) / config.sds[cols]
        dist2 = np.einsum("ij,ij->i", diffs, diffs)
    else:
        dist2 = np.zeros(n)  # all known features constant: every row ties
    neighbors = np.argsort(dist2, kind="stable")[: config.k]
    for f in unknown:
        z[f - 1] = _column_estimate(x_train[neighbors, f - 1], discrete_mask[f - 1])
    return z


def estimate_measurement_error(
    train: DatasetTable,
    config: ImputerConfig,
    known_profile: Iterable[int],
) -> np.ndarray:
    """Per-feature RMSE of kNN prediction on the training set (self excluded).

    ``known_profile`` (typically the free set) fixes the distance dimensions;
    its own features get delta = 0 since they are never imputed.
    """
    profile = frozenset(known_profile)
    x = train.x
    n, d = x.shape
    if not profile <= set(range(1, d + 1)):
        raise ValueError(f"known_profile ids {sorted(profile)} outside 1..{d}")

    cols = _distance_columns(profile, config.sds)
    if cols:
        scaled = x[:, cols] / config.sds[cols]
        dist2 = cdist(scaled, scaled, metric="sqeuclidean")
    else:
        dist2 = np.zeros((n, n))
    np.fill_diagonal(dist2, np.inf)
    neighbors = np.argsort(dist2, axis=1, kind="stable")[:, : config.k]

    delta = np.zeros(d)
    for spec in train.features:
        f = spec.id
        if f in profile:
            continue
        actual = x[:, f - 1]
        vals = actual[neighbors]  # (n, k) neighbor values of feature f
        if spec.is_discrete:
            levels = np.unique(actual)
            codes = np.searchsorted(levels, vals)
            counts = np.zeros((n, len(levels)), dtype=int)
            rows = np.repeat(np.arange(n), config.k)
            np.add.at(counts, (rows, codes.ravel()), 1)
            predicted = levels[np.argmax(counts, axis=1)]  # first max = lowest value
        else:
            predicted = vals.mean(axis=1)
        delta[f - 1] = float(np.sqrt(np.mean((predicted - actual) ** 2)))
    return delta


@dataclass(frozen=True)
class KnnImputer:
    """Training matrix + config bundled behind the engine's imputer interface."""

    x_train: np.ndarray
    config: ImputerConfig
    discrete_mask: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_train", np.asarray(self.x_train, dtype=float))
        object.__setattr__(self, "discrete_mask", np.asarray(self.discrete_mask, dtype=bool))

    @classmethod
    def from_table(cls, table: DatasetTable, k: int) -> "KnnImputer":
        return cls(
            x_train=table.x,
            config=ImputerConfig.from_table(table, k),
            discrete_mask=np.array([s.is_discrete for s in table.features]),
        )

    def estimate(self, x: np.ndarray, known: Iterable[int]) -> np.ndarray:
        return estimate_features(self.x_train, x, known, self.config, self.discrete_mask)
