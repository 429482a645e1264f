"""Validation statistics over a noisy assignment.

Tallies flips per (class, concentration-interval) cell, which yields both
the per-interval frequency histogram and the per-interval noise-ratio
curve, and checks the closure property: the per-interval noise rates
realized by a subset-guided run must recover the budget it was given, up
to largest-remainder rounding and logged capping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concentration import N_INTERVALS, ConcentrationProfile
from .dataio import LabeledDataset, LabelVector
from .errors import DataError
from .generators import NoiseAssignment, NoiseBudget


@dataclass(frozen=True)
class IntervalNoiseReport:
    """Per-cell sample counts, flip counts, and ratios."""

    totals: np.ndarray   # (C, 5) int64
    noisy: np.ndarray    # (C, 5) int64
    ratios: np.ndarray   # (C, 5) float64, 0 for empty cells
    boundaries: list     # per class: 5 entries of (con_lo, con_hi) or None
    empty_cells: tuple   # (class, interval) pairs with zero population
    n_samples: int
    n_flips: int

    @property
    def overall_ratio(self) -> float:
        return self.n_flips / self.n_samples

    @property
    def n_classes(self) -> int:
        return self.totals.shape[0]


def interval_noise_report(ds: LabeledDataset, assignment: NoiseAssignment,
                          profile: ConcentrationProfile) -> IntervalNoiseReport:
    if len(assignment.clean) != ds.n_samples or profile.con.size != ds.n_samples:
        raise DataError("assignment, profile, and dataset disagree in length")
    if not np.array_equal(assignment.clean.labels, ds.clean_labels.labels):
        raise DataError("assignment clean labels differ from the dataset's")
    c = ds.n_classes
    totals = profile.sizes.astype(np.int64)
    noisy = np.zeros((c, N_INTERVALS), dtype=np.int64)
    for j in range(c):
        for i, cell in enumerate(profile.intervals[j]):
            noisy[j, i] = int(assignment.flipped[cell].sum())
    with np.errstate(invalid="ignore"):
        ratios = np.where(totals > 0, noisy / np.maximum(totals, 1), 0.0)
    empty = tuple((int(j), int(i)) for j, i in np.argwhere(totals == 0))
    return IntervalNoiseReport(
        totals=totals,
        noisy=noisy,
        ratios=ratios,
        boundaries=profile.boundaries,
        empty_cells=empty,
        n_samples=ds.n_samples,
        n_flips=assignment.n_flips,
    )


def overall_accuracy(pred: LabelVector, truth: LabelVector) -> float:
    """Fraction of positions where the two label vectors agree."""
    if len(pred) != len(truth):
        raise DataError(f"length mismatch: {len(pred)} predictions, {len(truth)} truths")
    if len(pred) == 0:
        raise DataError("accuracy of empty label vectors is undefined")
    return float(np.mean(pred.labels == truth.labels))


def closure_violations(report: IntervalNoiseReport, budget: NoiseBudget) -> list[str]:
    """Check that a subset-guided run realized exactly its budget.

    The generator flips every selected sample and nothing else, so the
    per-cell flip counts must equal the budget cells exactly, and the
    realized counts must sit within one unit of the fractional targets
    r * Num_j except where capping was logged.
    """
    problems = []
    if report.n_flips != budget.num_all:
        problems.append(f"realized flips {report.n_flips} != budget total {budget.num_all}")
    if not np.array_equal(report.noisy, budget.num_interval):
        bad = np.argwhere(report.noisy != budget.num_interval)
        j, i = (int(v) for v in bad[0])
        problems.append(
            f"cell ({j},{i}) realized {int(report.noisy[j, i])} flips, "
            f"budgeted {int(budget.num_interval[j, i])}"
        )
    capped = {rec["class"] for rec in budget.capping_log}
    for j in range(budget.n_classes):
        if j in capped or budget.num_class[j] == 0:
            continue
        target = budget.r_interval[j] * budget.num_class[j]
        if np.any(np.abs(report.noisy[j] - target) >= 1.0):
            i = int(np.argmax(np.abs(report.noisy[j] - target)))
            problems.append(
                f"class {j} interval {i}: realized {int(report.noisy[j, i])} flips, "
                f"fractional target {target[i]:.6f}"
            )
    return problems


def report_to_dict(report: IntervalNoiseReport) -> dict:
    """JSON-ready report; ratios at 6 decimal digits."""
    per_class = []
    for j in range(report.n_classes):
        per_class.append({
            "class": j,
            "boundaries": [
                None if b is None else [round(b[0], 6), round(b[1], 6)]
                for b in report.boundaries[j]
            ],
            "totals": [int(v) for v in report.totals[j]],
            "noisy": [int(v) for v in report.noisy[j]],
            "ratios": [round(float(v), 6) for v in report.ratios[j]],
        })
    return {
        "n_samples": report.n_samples,
        "n_flips": report.n_flips,
        "overall_ratio": round(report.overall_ratio, 6),
        "empty_cells": [list(c) for c in report.empty_cells],
        "per_class": per_class,
    }
