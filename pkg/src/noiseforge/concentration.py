"""Feature-concentration indicators and the five-interval partition.

For sample k with class c, the concentration degree is the ratio of its
summed squared distance to classmates (intra) over its summed squared
distance to everything else (inter). Low values mean the sample sits deep
inside its own class cluster; high values mean it strays toward other
classes and is the kind of sample humans mislabel.

Both sums collapse to O(d) per sample through the standard expansion
sum_i ||x - x_i||^2 = m*||x||^2 - 2*x.sum_i(x_i) + sum_i ||x_i||^2
over per-class aggregates, giving an O(N*d) pass instead of O(N^2*d).
Accumulation is float64 throughout; float32 storage over 50k squared
distances loses digits that matter.

Each class is then sorted by concentration and cut into five contiguous
intervals with widths proportional to 1:2:4:8:16 (a deterministic,
monotone realization of "gradually increasing" widths; the ratio is a
config knob). Rounding is largest-remainder with the surplus going to the
widest interval first, so undersized classes collapse from the narrow end.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .apportion import largest_remainder, proportional_shares
from .dataio import LabeledDataset
from .errors import DataError

DEFAULT_INTERVAL_WEIGHTS = (1, 2, 4, 8, 16)
N_INTERVALS = 5
_CHUNK = 8192  # fixed chunk boundaries keep float results identical for any thread count


@dataclass(frozen=True)
class ClassAggregates:
    """Per-class member count, feature sum, and summed squared norm."""

    counts: np.ndarray   # (C,) int64
    sums: np.ndarray     # (C, d) float64
    sq_norms: np.ndarray  # (C,) float64

    @property
    def n_classes(self) -> int:
        return self.counts.size

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ConcentrationProfile:
    """Per-sample concentration plus the per-class interval partition."""

    con: np.ndarray          # (N,) float64
    interval_of: np.ndarray  # (N,) int in [0, 5)
    intervals: list          # per class: list of 5 int64 index arrays, sorted by con
    sizes: np.ndarray        # (C, 5) int64
    boundaries: list         # per class: 5 entries of (con_lo, con_hi) or None
    interval_weights: tuple
    small_classes: list      # classes with fewer than N_INTERVALS members
    intra: np.ndarray = field(repr=False)          # (N,) float64, enables lazy Con_{k-j}
    aggregates: ClassAggregates = field(repr=False)

    @property
    def n_classes(self) -> int:
        return self.sizes.shape[0]


def class_aggregates(ds: LabeledDataset) -> ClassAggregates:
    x = ds.features.data
    y = ds.clean_labels.labels
    c = ds.n_classes
    counts = ds.per_class_counts.astype(np.int64)
    sums = np.zeros((c, ds.features.dim), dtype=np.float64)
    sq = np.zeros(c, dtype=np.float64)
    for j in range(c):
        members = x[y == j].astype(np.float64)
        if members.size:
            sums[j] = members.sum(axis=0)
            sq[j] = float(np.einsum("ij,ij->", members, members))
    return ClassAggregates(counts, sums, sq)


def l_intra(k: int, agg: ClassAggregates, ds: LabeledDataset) -> float:
    """Summed squared distance from sample k to its classmates."""
    x = ds.features.data[k].astype(np.float64)
    j = int(ds.clean_labels.labels[k])
    n2 = float(x @ x)
    val = agg.counts[j] * n2 - 2.0 * float(x @ agg.sums[j]) + agg.sq_norms[j]
    return max(float(val), 0.0)


def l_inter(k: int, agg: ClassAggregates, ds: LabeledDataset) -> float:
    """Summed squared distance from sample k to every foreign-class sample."""
    if np.count_nonzero(agg.counts) < 2:
        raise DataError("inter-class distances need at least two populated classes")
    x = ds.features.data[k].astype(np.float64)
    j = int(ds.clean_labels.labels[k])
    n2 = float(x @ x)
    m_f = agg.n_samples - agg.counts[j]
    sum_f = agg.sums.sum(axis=0) - agg.sums[j]
    sq_f = agg.sq_norms.sum() - agg.sq_norms[j]
    return max(float(m_f * n2 - 2.0 * float(x @ sum_f) + sq_f), 0.0)


def l_inter_j(k: int, j: int, agg: ClassAggregates, ds: LabeledDataset) -> float:
    """Summed squared distance from sample k to the members of foreign class j."""
    own = int(ds.clean_labels.labels[k])
    if j == own:
        raise DataError(f"class {j} is sample {k}'s own class")
    if agg.counts[j] == 0:
        raise DataError(f"class {j} has no members")
    x = ds.features.data[k].astype(np.float64)
    n2 = float(x @ x)
    return max(float(agg.counts[j] * n2 - 2.0 * float(x @ agg.sums[j]) + agg.sq_norms[j]), 0.0)


def con_k(k: int, agg: ClassAggregates, ds: LabeledDataset) -> float:
    inter = l_inter(k, agg, ds)
    if inter <= 0.0:
        raise DataError(f"degenerate geometry: sample {k} has zero inter-class distance")
    return l_intra(k, agg, ds) / inter


def con_k_j(k: int, j: int, agg: ClassAggregates, ds: LabeledDataset) -> float:
    inter = l_inter_j(k, j, agg, ds)
    if inter <= 0.0:
        raise DataError(
            f"degenerate geometry: sample {k} has zero distance to class {j}"
        )
    return l_intra(k, agg, ds) / inter


def _chunk_ranges(n: int, chunk: int = _CHUNK):
    return [(a, min(a + chunk, n)) for a in range(0, n, chunk)]


def distance_stats(ds: LabeledDataset, agg: ClassAggregates | None = None,
                   threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (intra, inter) sums for every sample.

    Chunk boundaries are fixed, so results are bit-identical for any thread
    count. einsum (non-optimized) keeps the reduction order independent of
    the BLAS configuration.
    """
    if agg is None:
        agg = class_aggregates(ds)
    if np.count_nonzero(agg.counts) < 2:
        raise DataError("inter-class distances need at least two populated classes")
    x32 = ds.features.data
    y = ds.clean_labels.labels
    n = ds.n_samples
    sum_all = agg.sums.sum(axis=0)
    sq_all = agg.sq_norms.sum()
    intra = np.empty(n, dtype=np.float64)
    inter = np.empty(n, dtype=np.float64)

    def work(bounds):
        a, b = bounds
        xc = x32[a:b].astype(np.float64)
        yc = y[a:b]
        n2 = np.einsum("ij,ij->i", xc, xc)
        own_dot = np.einsum("ij,ij->i", xc, agg.sums[yc])
        tot_dot = np.einsum("ij,j->i", xc, sum_all)
        mc = agg.counts[yc]
        intra[a:b] = np.maximum(mc * n2 - 2.0 * own_dot + agg.sq_norms[yc], 0.0)
        inter[a:b] = (n - mc) * n2 - 2.0 * (tot_dot - own_dot) + (sq_all - agg.sq_norms[yc])

    ranges = _chunk_ranges(n)
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, ranges))
    else:
        for r in ranges:
            work(r)

    bad = inter <= 0.0
    if bad.any():
        k = int(np.argmax(bad))
        raise DataError(f"degenerate geometry: sample {k} has zero inter-class distance")
    return intra, inter


def foreign_concentrations(ds: LabeledDataset, agg: ClassAggregates,
                           indices: np.ndarray,
                           intra: np.ndarray | None = None) -> np.ndarray:
    """Con_{k-j} for the given samples against every foreign class.

    Returns (len(indices), C) with the own-class column set to NaN; callers
    must mask it. Computed on demand because materializing all N x C values
    has no consumer.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return np.empty((0, agg.n_classes), dtype=np.float64)
    xs = ds.features.data[idx].astype(np.float64)
    ys = ds.clean_labels.labels[idx]
    n2 = np.einsum("ij,ij->i", xs, xs)
    # (n, C) distance sums to each class group
    inter_j = (agg.counts[None, :] * n2[:, None]
               - 2.0 * np.einsum("id,cd->ic", xs, agg.sums)
               + agg.sq_norms[None, :])
    if intra is None:
        own = np.take_along_axis(inter_j, ys[:, None], axis=1)[:, 0]
        intra_vals = np.maximum(own, 0.0)
    else:
        intra_vals = intra[idx]
    populated = agg.counts > 0
    rows = np.arange(idx.size)
    inter_j[rows, ys] = np.nan
    with np.errstate(invalid="ignore"):
        bad = (inter_j <= 0.0) & populated[None, :]
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise DataError(
            f"degenerate geometry: sample {int(idx[i])} has zero distance to class {int(j)}"
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        out = intra_vals[:, None] / inter_j
    out[:, ~populated] = np.nan
    return out


def interval_sizes(n: int, weights=DEFAULT_INTERVAL_WEIGHTS) -> list[int]:
    """Split n class members into five interval sizes, widest-first surplus."""
    weights = _checked_weights(weights)
    if n == 0:
        return [0] * N_INTERVALS
    return largest_remainder(proportional_shares(weights, n), n, ties="high")


def _checked_weights(weights):
    w = tuple(weights)
    if len(w) != N_INTERVALS:
        raise DataError(f"interval_weights needs exactly {N_INTERVALS} entries, got {len(w)}")
    if any(v <= 0 for v in w):
        raise DataError("interval_weights must be positive")
    return w


def partition_intervals(con: np.ndarray, labels: np.ndarray, n_classes: int,
                        weights=DEFAULT_INTERVAL_WEIGHTS):
    """Rank-partition each class along its concentration order.

    Ties in con break by ascending sample index so the sort is total and
    the partition deterministic. Returns (interval_of, intervals, sizes,
    boundaries, small_classes).
    """
    weights = _checked_weights(weights)
    interval_of = np.full(con.size, -1, dtype=np.int64)
    intervals = []
    sizes = np.zeros((n_classes, N_INTERVALS), dtype=np.int64)
    boundaries = []
    small = []
    for j in range(n_classes):
        members = np.flatnonzero(labels == j)
        order = members[np.lexsort((members, con[members]))]
        cuts = interval_sizes(order.size, weights)
        sizes[j] = cuts
        if 0 < order.size < N_INTERVALS:
            small.append(j)
        cells = []
        bounds = []
        pos = 0
        for i, width in enumerate(cuts):
            cell = order[pos:pos + width]
            pos += width
            cells.append(cell)
            if cell.size:
                interval_of[cell] = i
                bounds.append((float(con[cell[0]]), float(con[cell[-1]])))
            else:
                bounds.append(None)
        intervals.append(cells)
        boundaries.append(bounds)
    return interval_of, intervals, sizes, boundaries, small


def build_profile(ds: LabeledDataset, agg: ClassAggregates | None = None,
                  weights=DEFAULT_INTERVAL_WEIGHTS, threads: int = 1) -> ConcentrationProfile:
    """Full concentration profile: values plus the interval partition."""
    if agg is None:
        agg = class_aggregates(ds)
    intra, inter = distance_stats(ds, agg, threads=threads)
    con = intra / inter
    interval_of, intervals, sizes, boundaries, small = partition_intervals(
        con, ds.clean_labels.labels, ds.n_classes, weights
    )
    return ConcentrationProfile(
        con=con,
        interval_of=interval_of,
        intervals=intervals,
        sizes=sizes,
        boundaries=boundaries,
        interval_weights=tuple(weights),
        small_classes=small,
        intra=intra,
        aggregates=agg,
    )
