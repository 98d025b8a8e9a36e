"""Nearest-neighbour evaluation and the projection baselines."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import DomainPair


@dataclass(frozen=True, eq=False)
class PredictionResult:
    """Predicted labels for a test block, with accuracy when truth was known."""

    predicted: np.ndarray
    accuracy: float | None = None

    def __post_init__(self):
        predicted = np.array(self.predicted, dtype=np.int64)
        if predicted.ndim != 1:
            raise ValueError("predicted labels must form a vector")
        predicted.setflags(write=False)
        object.__setattr__(self, "predicted", predicted)
        if self.accuracy is not None and not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must lie in [0, 1], got {self.accuracy}")


def knn1_predict(
    train: np.ndarray, train_labels: np.ndarray, test: np.ndarray
) -> PredictionResult:
    """Label each test row with its nearest training row's label.

    Distances are Euclidean; exact ties resolve to the lowest training row
    index, so results are deterministic.
    """
    train = np.asarray(train, dtype=float)
    test = np.asarray(test, dtype=float)
    labels = np.asarray(train_labels)
    if train.ndim != 2 or test.ndim != 2:
        raise ValueError("train and test must be 2-D sample matrices")
    if train.shape[1] != test.shape[1]:
        raise ValueError(f"feature widths differ: {train.shape[1]} vs {test.shape[1]}")
    if train.shape[0] < 1:
        raise ValueError("training set is empty")
    if labels.shape != (train.shape[0],):
        raise ValueError("one label per training row is required")
    nearest = cdist(test, train, "sqeuclidean").argmin(axis=1)
    return PredictionResult(predicted=labels[nearest])


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of positions where predicted equals truth."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {truth.shape}")
    return float(np.mean(predicted == truth))


def _principal_directions(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k centered principal directions, deterministically oriented."""
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    components = vt[:k]
    heads = np.argmax(np.abs(components), axis=1)
    signs = np.where(components[np.arange(k), heads] < 0, -1.0, 1.0)
    return components * signs[:, None], centered


def pca_fit_transform(
    source: np.ndarray, target: np.ndarray, k: int, pooled: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Center and project each domain onto top-k principal directions.

    By default every domain is centered on its own mean and gets its own
    directions; pooled=True fits one basis on the stacked domains instead.
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    if source.ndim != 2 or target.ndim != 2 or source.shape[1] != target.shape[1]:
        raise ValueError("domains must be 2-D with a common feature width")
    if not 1 <= k <= source.shape[1]:
        raise ValueError(f"k must lie in [1, {source.shape[1]}], got {k}")
    if pooled:
        components, centered = _principal_directions(np.vstack([source, target]), k)
        n1 = source.shape[0]
        return centered[:n1] @ components.T, centered[n1:] @ components.T
    components_s, centered_s = _principal_directions(source, k)
    components_t, centered_t = _principal_directions(target, k)
    return centered_s @ components_s.T, centered_t @ components_t.T


def no_adaptation_predict(pair: DomainPair) -> PredictionResult:
    """1-NN from raw source rows to raw target rows, no projection at all."""
    result = knn1_predict(pair.source.features, pair.source.labels, pair.target.features)
    if pair.target.labels is None:
        return result
    return PredictionResult(
        predicted=result.predicted,
        accuracy=accuracy(result.predicted, pair.target.labels),
    )
