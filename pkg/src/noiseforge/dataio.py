"""On-disk formats and the in-memory data model shared by every stage.

Feature files are binary ("RGNF"): little-endian 4-byte magic, u32 format
version, u64 sample count, u32 dimension, then the float32 row-major
payload. Labels travel as CSV with an authoritative ``index`` column, so
on-disk row order never matters. All loaders validate eagerly; non-finite
feature values are rejected here because every downstream quantity is
distance-based and would silently NaN-poison otherwise.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"RGNF"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQI")  # magic, version, n_samples, dim

LABEL_HEADER = ["index", "label"]
SUBSET_HEADER = ["index", "clean_label", "noisy_label"]
ASSIGNMENT_HEADER = ["index", "clean_label", "noisy_label", "flipped"]


@dataclass(frozen=True)
class FeatureMatrix:
    """N x d float32 embedding matrix; finite values only."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"feature matrix needs n_samples >= 1 and dim >= 1, got {arr.shape}")
        bad = ~np.isfinite(arr)
        if bad.any():
            k = int(np.argwhere(bad)[0][0])
            raise DataError(f"non-finite feature value at sample {k}")
        object.__setattr__(self, "data", arr)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Class indices in [0, n_classes)."""

    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=np.int64)
        if arr.ndim != 1:
            raise DataError("label vector must be 1-D")
        if self.n_classes < 1:
            raise DataError(f"n_classes must be >= 1, got {self.n_classes}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.n_classes):
            k = int(np.argwhere((arr < 0) | (arr >= self.n_classes))[0][0])
            raise DataError(
                f"label {arr[k]} at index {k} outside [0, {self.n_classes})"
            )
        object.__setattr__(self, "labels", arr)

    def __len__(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class LabeledDataset:
    """Features plus clean labels; the unit the generators corrupt."""

    features: FeatureMatrix
    clean_labels: LabelVector
    per_class_counts: np.ndarray = field(init=False)

    def __post_init__(self):
        if len(self.clean_labels) != self.features.n_samples:
            raise DataError(
                f"{len(self.clean_labels)} labels for {self.features.n_samples} feature rows"
            )
        counts = np.bincount(self.clean_labels.labels, minlength=self.clean_labels.n_classes)
        object.__setattr__(self, "per_class_counts", counts)

    @property
    def n_samples(self) -> int:
        return self.features.n_samples

    @property
    def n_classes(self) -> int:
        return self.clean_labels.n_classes


@dataclass(frozen=True)
class NoisySubset:
    """Human-annotated subset: features, clean labels, noisy labels.

    ``sample_indices`` point into a parent dataset when the subset was cut
    from one; they are only required to be unique. Feature row r pairs with
    the r-th smallest index.
    """

    sample_indices: np.ndarray
    features: FeatureMatrix
    clean_labels: LabelVector
    noisy_labels: LabelVector

    def __post_init__(self):
        n = self.features.n_samples
        if len(self.clean_labels) != n or len(self.noisy_labels) != n:
            raise DataError("subset labels and features disagree in length")
        if self.clean_labels.n_classes != self.noisy_labels.n_classes:
            raise DataError("clean and noisy labels disagree on class count")
        idx = np.asarray(self.sample_indices, dtype=np.int64)
        if idx.size != n:
            raise DataError("subset index array length mismatch")
        if np.unique(idx).size != idx.size:
            raise DataError("subset indices are not unique")
        object.__setattr__(self, "sample_indices", idx)

    @property
    def n_samples(self) -> int:
        return self.features.n_samples

    @property
    def n_classes(self) -> int:
        return self.clean_labels.n_classes

    @property
    def clean_class_counts(self) -> np.ndarray:
        return np.bincount(self.clean_labels.labels, minlength=self.n_classes)

    @property
    def disagreement_count(self) -> int:
        return int(np.sum(self.clean_labels.labels != self.noisy_labels.labels))


def write_features(m: FeatureMatrix, path) -> None:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, m.n_samples, m.dim)
    payload = np.ascontiguousarray(m.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_features(path) -> FeatureMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DataError(f"{path}: file too short for a feature header")
    magic, version, n, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    if n < 1 or d < 1:
        raise DataError(f"{path}: invalid shape ({n}, {d}) in header")
    expected = n * d * 4
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise DataError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    return FeatureMatrix(arr.copy())


def _read_csv_rows(path, expected_header):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise DataError(f"{path}: not valid UTF-8 ({e})") from e
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    if [h.strip() for h in header] != expected_header:
        raise DataError(
            f"{path}: header {header} does not match {expected_header}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(expected_header):
            raise DataError(f"{path}:{lineno}: expected {len(expected_header)} fields, got {len(row)}")
        try:
            rows.append([int(v) for v in row])
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: non-integer field ({e})") from e
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def _check_index_column(path, indices, dense: bool):
    idx = np.asarray(indices, dtype=np.int64)
    uniq, counts = np.unique(idx, return_counts=True)
    if (counts > 1).any():
        dup = int(uniq[counts > 1][0])
        raise DataError(f"{path}: duplicate index {dup}")
    if dense:
        n = idx.size
        if uniq[0] != 0 or uniq[-1] != n - 1:
            missing = sorted(set(range(n)) - set(uniq.tolist()))
            raise DataError(f"{path}: index column must cover 0..{n - 1}; missing {missing[:5]}")
    elif (idx < 0).any():
        raise DataError(f"{path}: negative sample index")
    return idx


def _validated_labels(path, values, n_classes, column):
    arr = np.asarray(values, dtype=np.int64)
    if n_classes is None:
        n_classes = int(arr.max()) + 1 if arr.size else 1
    bad = (arr < 0) | (arr >= n_classes)
    if bad.any():
        k = int(np.argwhere(bad)[0][0])
        raise DataError(
            f"{path}: {column} {arr[k]} outside [0, {n_classes}) at row {k}"
        )
    return LabelVector(arr, n_classes)


def write_labels(v: LabelVector, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(LABEL_HEADER)
        for i, lab in enumerate(v.labels):
            w.writerow([i, int(lab)])


def read_labels(path, n_classes) -> LabelVector:
    """Load an ``index,label`` CSV; rows may appear in any order.

    Pass ``n_classes=None`` to infer the class count as max(label) + 1.
    """
    rows = _read_csv_rows(path, LABEL_HEADER)
    idx = _check_index_column(path, [r[0] for r in rows], dense=True)
    order = np.argsort(idx)
    values = np.asarray([r[1] for r in rows], dtype=np.int64)[order]
    return _validated_labels(path, values, n_classes, "label")


def read_subset_csv(path, n_classes):
    """Load an ``index,clean_label,noisy_label`` CSV without features.

    Returns (indices, clean, noisy) with rows sorted by index. Indices only
    need to be unique; they may point into a parent dataset.
    """
    rows = _read_csv_rows(path, SUBSET_HEADER)
    idx = _check_index_column(path, [r[0] for r in rows], dense=False)
    order = np.argsort(idx)
    clean = np.asarray([r[1] for r in rows], dtype=np.int64)[order]
    noisy = np.asarray([r[2] for r in rows], dtype=np.int64)[order]
    if n_classes is None:
        n_classes = int(max(clean.max(), noisy.max())) + 1
    return (
        idx[order],
        _validated_labels(path, clean, n_classes, "clean_label"),
        _validated_labels(path, noisy, n_classes, "noisy_label"),
    )


def read_noisy_subset(path, n_classes, features: FeatureMatrix) -> NoisySubset:
    """Pair a subset CSV with its feature matrix.

    Feature row r corresponds to the r-th smallest CSV index. Row count must
    match the feature matrix exactly.
    """
    idx, clean, noisy = read_subset_csv(path, n_classes)
    if len(clean) != features.n_samples:
        raise DataError(
            f"{path}: {len(clean)} rows but feature file has {features.n_samples} samples"
        )
    return NoisySubset(idx, features, clean, noisy)


def write_subset_csv(indices, clean: LabelVector, noisy: LabelVector, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUBSET_HEADER)
        for i, c, n in zip(indices, clean.labels, noisy.labels):
            w.writerow([int(i), int(c), int(n)])


def write_assignment_csv(clean: np.ndarray, noisy: np.ndarray, path) -> None:
    """Emit the generator output CSV: index,clean_label,noisy_label,flipped."""
    flipped = (np.asarray(clean) != np.asarray(noisy)).astype(int)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(ASSIGNMENT_HEADER)
        for i, (c, n, fl) in enumerate(zip(clean, noisy, flipped)):
            w.writerow([i, int(c), int(n), int(fl)])


def read_assignment_csv(path, n_classes):
    """Load a generator output CSV; returns (clean, noisy) LabelVectors."""
    rows = _read_csv_rows(path, ASSIGNMENT_HEADER)
    idx = _check_index_column(path, [r[0] for r in rows], dense=True)
    order = np.argsort(idx)
    clean = np.asarray([r[1] for r in rows], dtype=np.int64)[order]
    noisy = np.asarray([r[2] for r in rows], dtype=np.int64)[order]
    flipped = np.asarray([r[3] for r in rows], dtype=np.int64)[order]
    if ((flipped != 0) != (clean != noisy)).any():
        k = int(np.argwhere((flipped != 0) != (clean != noisy))[0][0])
        raise DataError(f"{path}: flipped flag inconsistent with labels at index {k}")
    if n_classes is None:
        n_classes = int(max(clean.max(), noisy.max())) + 1
    return (
        _validated_labels(path, clean, n_classes, "clean_label"),
        _validated_labels(path, noisy, n_classes, "noisy_label"),
    )
