"""Deterministic synthetic data for validation runs, scripts, and tests.

Gaussian blobs with well-separated class centers: near-balanced labels by
construction, every draw keyed to an explicit seed.
"""

from __future__ import annotations

import numpy as np

from .dataio import FeatureMatrix, LabeledDataset, LabelVector, NoisySubset
from .errors import DataError


def make_blobs(n_samples: int, dim: int, n_classes: int, seed: int,
               spread: float = 1.0, separation: float = 6.0) -> LabeledDataset:
    """Isotropic Gaussian clusters, labels assigned round-robin."""
    if n_classes < 1 or n_samples < 1 or dim < 1:
        raise DataError("blob synthesis needs positive n_samples, dim, n_classes")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    centers = rng.normal(size=(n_classes, dim))
    centers *= separation / np.maximum(np.linalg.norm(centers, axis=1, keepdims=True), 1e-12)
    labels = np.arange(n_samples, dtype=np.int64) % n_classes
    feats = centers[labels] + spread * rng.normal(size=(n_samples, dim))
    return LabeledDataset(
        FeatureMatrix(feats.astype(np.float32)),
        LabelVector(labels, n_classes),
    )


def pick_subset_indices(ds: LabeledDataset, per_class: int, seed: int) -> np.ndarray:
    """Sorted indices of a per-class random draw without replacement."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    picks = []
    y = ds.clean_labels.labels
    for j in range(ds.n_classes):
        members = np.flatnonzero(y == j)
        if members.size < per_class:
            raise DataError(
                f"class {j} has {members.size} samples, fewer than per_class={per_class}"
            )
        picks.append(rng.choice(members, size=per_class, replace=False))
    return np.sort(np.concatenate(picks)).astype(np.int64)


def subset_view(ds: LabeledDataset, indices: np.ndarray,
                noisy_labels: np.ndarray) -> NoisySubset:
    """Cut a NoisySubset out of a dataset given full-length noisy labels."""
    idx = np.sort(np.asarray(indices, dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= ds.n_samples):
        raise DataError("subset index outside the dataset")
    noisy = np.asarray(noisy_labels, dtype=np.int64)
    if noisy.size != ds.n_samples:
        raise DataError("noisy label vector must cover the whole dataset")
    return NoisySubset(
        sample_indices=idx,
        features=FeatureMatrix(ds.features.data[idx].copy()),
        clean_labels=LabelVector(ds.clean_labels.labels[idx], ds.n_classes),
        noisy_labels=LabelVector(noisy[idx], ds.n_classes),
    )
