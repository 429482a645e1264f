"""Noise transition estimation from an annotated subset.

The estimator is plain row-normalized confusion counting: with both clean
and noisy labels observed it is the maximum-likelihood (and unbiased)
choice. Rows without clean-sample support stay flagged as undefined rather
than being smoothed; smoothing would invent pattern the annotation does
not contain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import LabelVector, NoisySubset
from .errors import DataError

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic C x C flip-probability matrix with per-row support.

    t[i, j] = Pr(noisy = j | clean = i). Rows with support 0 are all-zero
    and must be treated as undefined, not as "never flips".
    """

    t: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        support = np.asarray(self.support, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DataError(f"transition matrix must be square, got {t.shape}")
        if support.shape != (t.shape[0],):
            raise DataError("support length must match matrix size")
        if (t < 0).any() or (t > 1).any():
            raise DataError("transition entries must lie in [0, 1]")
        live = support > 0
        if live.any():
            sums = t[live].sum(axis=1)
            if np.abs(sums - 1.0).max() > ROW_SUM_TOL:
                raise DataError("transition rows with support must sum to 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "support", support)

    @property
    def n_classes(self) -> int:
        return self.t.shape[0]

    @property
    def row_defined(self) -> np.ndarray:
        return self.support > 0


@dataclass(frozen=True)
class ClassNoiseProfile:
    """Per-class noise ratios and conditional flip distributions.

    rho[j] = 1 - t[j, j] is the probability that class j gets mislabeled.
    flip_rows[j] is the off-diagonal row renormalized to sum 1: the
    distribution over destination classes given that a flip happens. It is
    undefined (all-zero, flip_defined[j] = False) when rho[j] = 0 or the
    row itself has no support.
    """

    rho: np.ndarray
    rho_overall: float
    flip_rows: np.ndarray
    flip_defined: np.ndarray
    rho_defined: np.ndarray
    support: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.rho.size


def transition_from_labels(clean: LabelVector, noisy: LabelVector) -> TransitionMatrix:
    """Count-based transition estimate from paired label vectors."""
    if len(clean) == 0:
        raise DataError("cannot estimate a transition matrix from an empty subset")
    if len(clean) != len(noisy) or clean.n_classes != noisy.n_classes:
        raise DataError("clean and noisy label vectors must align")
    c = clean.n_classes
    counts = np.zeros((c, c), dtype=np.int64)
    np.add.at(counts, (clean.labels, noisy.labels), 1)
    support = counts.sum(axis=1)
    t = np.zeros((c, c), dtype=np.float64)
    live = support > 0
    t[live] = counts[live] / support[live, None]
    return TransitionMatrix(t, support)


def estimate_transition(subset: NoisySubset) -> TransitionMatrix:
    return transition_from_labels(subset.clean_labels, subset.noisy_labels)


def class_noise_profile(t: TransitionMatrix) -> ClassNoiseProfile:
    c = t.n_classes
    rho_defined = t.row_defined.copy()
    rho = np.where(rho_defined, 1.0 - np.diag(t.t), 0.0)
    # support-weighted mean == total disagreements / total support
    total = int(t.support.sum())
    if total == 0:
        raise DataError("transition matrix has no supported rows")
    rho_overall = float(np.dot(t.support, rho) / total)
    flip_rows = np.zeros_like(t.t)
    flip_defined = rho_defined & (rho > 0)
    for j in np.flatnonzero(flip_defined):
        row = t.t[j].copy()
        row[j] = 0.0
        flip_rows[j] = row / rho[j]
    return ClassNoiseProfile(
        rho=rho,
        rho_overall=rho_overall,
        flip_rows=flip_rows,
        flip_defined=flip_defined,
        rho_defined=rho_defined,
        support=t.support.copy(),
    )


def transition_report(t: TransitionMatrix, profile: ClassNoiseProfile) -> dict:
    """JSON-ready report with fixed key order; floats rounded downstream."""
    return {
        "classes": t.n_classes,
        "support": t.support.tolist(),
        "matrix": t.t.tolist(),
        "rho": profile.rho.tolist(),
        "rho_overall": profile.rho_overall,
        "flip_rows": profile.flip_rows.tolist(),
        "undefined_rows": np.flatnonzero(~t.row_defined).tolist(),
        "undefined_flip_rows": np.flatnonzero(~profile.flip_defined).tolist(),
    }
