"""Dataset builders shared across the test modules."""

import numpy as np

import noiseforge as nf


def random_dataset(rng, n=200, d=8, c=4, spread=1.0, separation=6.0) -> nf.LabeledDataset:
    """Gaussian blobs with rng-drawn class imbalance; every class nonempty."""
    centers = rng.normal(size=(c, d)) * separation
    labels = rng.integers(0, c, size=n)
    labels[:c] = np.arange(c)  # guarantee nonempty classes
    feats = centers[labels] + spread * rng.normal(size=(n, d))
    return nf.LabeledDataset(
        nf.FeatureMatrix(feats.astype(np.float32)),
        nf.LabelVector(labels.astype(np.int64), c),
    )


def corrupted_subset(ds: nf.LabeledDataset, per_class: int, tau: float,
                     seed: int) -> nf.NoisySubset:
    """Cut a per-class subset and corrupt its labels symmetrically."""
    idx = nf.pick_subset_indices(ds, per_class, seed=seed)
    sub_ds = nf.LabeledDataset(
        nf.FeatureMatrix(ds.features.data[idx].copy()),
        nf.LabelVector(ds.clean_labels.labels[idx], ds.n_classes),
    )
    corrupt = nf.gen_symmetric(
        sub_ds, nf.NoiseSpec(pattern="symm_exc", seed=seed + 1, tau=tau)
    )
    full = ds.clean_labels.labels.copy()
    full[idx] = corrupt.noisy.labels
    return nf.subset_view(ds, idx, full)
