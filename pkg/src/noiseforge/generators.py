"""Noisy-label generators.

Four corruption patterns over a clean dataset:

* symm_inc: with probability tau, redraw the label uniformly over all C
  classes. A redraw may land on the true class, so the realized noise
  ratio is tau*(C-1)/C.
* symm_exc: with probability tau, redraw uniformly over the C-1 other
  classes; realized ratio is tau.
* asym: flip classes in a user map source->target with probability tau.
* rgn: transfer the noise pattern observed on a small annotated subset.
  The subset fixes two things: how much noise each class receives (via
  its per-class noise rates) and where inside a class the noise lands
  (via the per-interval noise counts over the concentration partition).
  Each selected sample is then flipped to the class favored by a blend
  of the subset's flip distribution and the sample's own foreign-class
  concentration profile.

Budget arithmetic runs on exact rationals; floats appear only in the
reported ratios. All randomness flows from a single 64-bit seed; the
subset-guided pattern draws from per-(class, interval) substreams so the
output does not depend on scheduling or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .apportion import largest_remainder, proportional_shares, round_half_up, to_fraction
from .concentration import (
    DEFAULT_INTERVAL_WEIGHTS,
    N_INTERVALS,
    ConcentrationProfile,
    _chunk_ranges,
    build_profile,
    foreign_concentrations,
)
from .dataio import LabeledDataset, LabelVector, NoisySubset
from .errors import ConfigError, DataError
from .transition import ClassNoiseProfile, class_noise_profile, estimate_transition

PATTERNS = ("symm_inc", "symm_exc", "asym", "rgn")
DEFAULT_MU1 = 0.1
DEFAULT_MU2 = 0.9
_BLEND_TOL = 1e-12


@dataclass(frozen=True)
class NoiseSpec:
    """Validated generation request. Fields irrelevant to the pattern stay None."""

    pattern: str
    seed: int
    rho0: float | None = None
    tau: float | None = None
    asym_map: dict | None = None
    mu1: float = DEFAULT_MU1
    mu2: float = DEFAULT_MU2

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ConfigError(f"unknown pattern {self.pattern!r}; expected one of {PATTERNS}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if self.pattern in ("symm_inc", "symm_exc", "asym"):
            if self.tau is None:
                raise ConfigError(f"pattern {self.pattern} requires tau")
            if not (0.0 <= self.tau <= 1.0):
                raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
            if self.rho0 is not None:
                raise ConfigError(f"rho0 is not used by pattern {self.pattern}")
        if self.pattern == "asym":
            if not self.asym_map:
                raise ConfigError("pattern asym requires a nonempty class map")
            for src, dst in self.asym_map.items():
                if not isinstance(src, int) or not isinstance(dst, int) or src < 0 or dst < 0:
                    raise ConfigError("asym map entries must be nonnegative class indices")
                if src == dst:
                    raise ConfigError(f"asym map contains self-loop {src}->{dst}")
        elif self.asym_map is not None:
            raise ConfigError(f"asym_map is not used by pattern {self.pattern}")
        if self.pattern == "rgn":
            if self.rho0 is None:
                raise ConfigError("pattern rgn requires rho0")
            if not (0.0 <= self.rho0 <= 1.0):
                raise ConfigError(f"rho0 must lie in [0, 1], got {self.rho0}")
            if self.tau is not None:
                raise ConfigError("tau is not used by pattern rgn")
            if self.mu1 < 0 or self.mu2 < 0 or abs(self.mu1 + self.mu2 - 1.0) > _BLEND_TOL:
                raise ConfigError(
                    f"blend weights must be nonnegative and sum to 1, got {self.mu1}, {self.mu2}"
                )


@dataclass(frozen=True)
class NoiseBudget:
    """Integer flip quotas per class and per (class, interval) cell."""

    num_all: int
    r_class: np.ndarray       # (C,) float64, share of flips per class
    num_class: np.ndarray     # (C,) int64
    r_interval: np.ndarray    # (C, 5) float64, within-class interval shares
    num_interval: np.ndarray  # (C, 5) int64
    capacity: np.ndarray      # (C, 5) int64, interval sizes on the target dataset
    capping_log: tuple        # adjustment records, empty when nothing saturated
    fallback_classes: tuple   # classes whose interval shares fell back to the weight prior

    def __post_init__(self):
        if int(self.num_class.sum()) != self.num_all:
            raise DataError("per-class quotas do not sum to the total")
        if not np.array_equal(self.num_interval.sum(axis=1), self.num_class):
            raise DataError("per-interval quotas do not sum to the class quotas")
        if np.any(self.num_interval > self.capacity):
            raise DataError("a cell quota exceeds its capacity")

    @property
    def n_classes(self) -> int:
        return self.num_class.size


@dataclass(frozen=True)
class NoiseAssignment:
    """Clean labels, corrupted labels, and the generation audit trail."""

    clean: LabelVector
    noisy: LabelVector
    flipped: np.ndarray  # (N,) bool, exactly where noisy != clean
    pattern: str
    seed: int
    budget: NoiseBudget | None = None
    flip_audit: tuple | None = None  # per-flip probability rows (subset-guided only)

    def __post_init__(self):
        if len(self.clean) != len(self.noisy) or self.clean.n_classes != self.noisy.n_classes:
            raise DataError("clean and noisy label vectors must align")
        expect = self.clean.labels != self.noisy.labels
        if not np.array_equal(self.flipped, expect):
            raise DataError("flipped flags disagree with the label arrays")

    @property
    def n_flips(self) -> int:
        return int(self.flipped.sum())

    @property
    def realized_ratio(self) -> float:
        return self.n_flips / len(self.clean)


def _assignment(ds: LabeledDataset, noisy: np.ndarray, spec: NoiseSpec, **extra) -> NoiseAssignment:
    noisy_lv = LabelVector(noisy, ds.n_classes)
    flipped = ds.clean_labels.labels != noisy_lv.labels
    return NoiseAssignment(
        clean=ds.clean_labels,
        noisy=noisy_lv,
        flipped=flipped,
        pattern=spec.pattern,
        seed=spec.seed,
        **extra,
    )


def gen_symmetric(ds: LabeledDataset, spec: NoiseSpec) -> NoiseAssignment:
    """Uniform random flips, inclusive or exclusive of the true class.

    Draw order is pinned: one uniform per sample for the flip decision,
    then one integer per sample for the replacement label. Both vectors
    are drawn for every sample so the stream layout never depends on tau.
    """
    if spec.pattern not in ("symm_inc", "symm_exc"):
        raise ConfigError(f"gen_symmetric cannot handle pattern {spec.pattern!r}")
    c = ds.n_classes
    if c < 2:
        raise DataError("symmetric noise needs at least two classes")
    y = ds.clean_labels.labels
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    redraw = rng.random(ds.n_samples) < spec.tau
    if spec.pattern == "symm_inc":
        draws = rng.integers(0, c, size=ds.n_samples)
    else:
        # draw over c-1 slots, then skip past the true class
        d0 = rng.integers(0, c - 1, size=ds.n_samples)
        draws = d0 + (d0 >= y)
    return _assignment(ds, np.where(redraw, draws, y), spec)


def gen_asymmetric(ds: LabeledDataset, spec: NoiseSpec) -> NoiseAssignment:
    """Class-conditional flips along a fixed source->target map."""
    if spec.pattern != "asym":
        raise ConfigError(f"gen_asymmetric cannot handle pattern {spec.pattern!r}")
    c = ds.n_classes
    for src, dst in spec.asym_map.items():
        if src >= c or dst >= c:
            raise ConfigError(f"asym map entry {src}->{dst} outside [0, {c})")
    lut = np.arange(c, dtype=np.int64)
    for src, dst in spec.asym_map.items():
        lut[src] = dst
    y = ds.clean_labels.labels
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    u = rng.random(ds.n_samples)
    flip = (u < spec.tau) & (lut[y] != y)
    return _assignment(ds, np.where(flip, lut[y], y), spec)


def subset_interval_noise_counts(subset: NoisySubset,
                                 sub_profile: ConcentrationProfile) -> np.ndarray:
    """num_{j-i}: noisy subset members per (clean class, interval) cell."""
    noisy_mask = subset.clean_labels.labels != subset.noisy_labels.labels
    out = np.zeros((subset.n_classes, N_INTERVALS), dtype=np.int64)
    for j in range(subset.n_classes):
        for i, cell in enumerate(sub_profile.intervals[j]):
            out[j, i] = int(noisy_mask[cell].sum())
    return out


def _spread(amounts: np.ndarray, residual: np.ndarray, total: int, ties: str) -> np.ndarray:
    """Add `total` units to `amounts`, proportional to residual capacity.

    Safe by construction: when total <= sum(residual), each proportional
    share is <= its residual, and largest-remainder rounding adds at most
    one unit above the floor, which still fits because residuals are
    integers.
    """
    if total == 0:
        return amounts
    add = largest_remainder(proportional_shares(residual.tolist(), total), total, ties=ties)
    return amounts + np.asarray(add, dtype=np.int64)


def compute_budget(ds: LabeledDataset, profile_c: ConcentrationProfile,
                   num_ji: np.ndarray, noise_profile: ClassNoiseProfile,
                   rho0: float) -> NoiseBudget:
    """Flip quotas: total -> per class -> per interval, then capacity capping.

    The total is round(rho0*N), half away from zero. Class shares weight
    each class by its size times its subset noise rate; interval shares
    follow the subset's per-interval noise counts. Both roundings are
    largest-remainder, so the quotas always sum exactly. Cells never
    exceed their interval's population: surplus moves first to the other
    intervals of the same class, then across classes, proportional to
    residual capacity each time. Every adjustment is logged.
    """
    if not (0.0 <= rho0 <= 1.0):
        raise ConfigError(f"rho0 must lie in [0, 1], got {rho0}")
    c = ds.n_classes
    if noise_profile.n_classes != c or num_ji.shape != (c, N_INTERVALS):
        raise DataError("budget inputs disagree on the class count")
    if profile_c.n_classes != c or profile_c.con.size != ds.n_samples:
        raise DataError("concentration profile does not match the dataset")
    nc = ds.per_class_counts.astype(object)  # exact ints for Fraction arithmetic
    num_all = round_half_up(to_fraction(rho0) * ds.n_samples)

    missing = (ds.per_class_counts > 0) & ~noise_profile.rho_defined
    if missing.any():
        j = int(np.argmax(missing))
        raise DataError(
            f"subset has no members of class {j}; cannot transfer its noise rate"
        )
    weights = [nc[j] * to_fraction(float(noise_profile.rho[j])) for j in range(c)]
    total_w = sum(weights)
    if total_w == 0:
        raise DataError("subset carries no noise pattern (all class noise rates are zero)")
    r_class = [w / total_w for w in weights]
    num_class = np.asarray(
        largest_remainder([r * num_all for r in r_class], num_all, ties="low"),
        dtype=np.int64,
    )

    r_interval = np.zeros((c, N_INTERVALS), dtype=np.float64)
    num_interval = np.zeros((c, N_INTERVALS), dtype=np.int64)
    fallback = []
    wsum = sum(profile_c.interval_weights)
    for j in range(c):
        row = num_ji[j]
        row_sum = int(row.sum())
        if row_sum > 0:
            r_row = [Fraction(int(v), row_sum) for v in row]
        elif num_class[j] > 0:
            # subset saw no noise in this class yet the class owes flips:
            # fall back to the monotone interval prior
            r_row = [Fraction(w, wsum) for w in profile_c.interval_weights]
            fallback.append(j)
        else:
            continue
        r_interval[j] = [float(v) for v in r_row]
        if num_class[j] > 0:
            num_interval[j] = largest_remainder(
                [r * int(num_class[j]) for r in r_row], int(num_class[j]), ties="high"
            )

    capacity = profile_c.sizes.astype(np.int64)
    num_interval, log = _cap_to_capacity(num_interval, capacity)
    return NoiseBudget(
        num_all=num_all,
        r_class=np.asarray([float(r) for r in r_class]),
        num_class=num_interval.sum(axis=1),
        r_interval=r_interval,
        num_interval=num_interval,
        capacity=capacity,
        capping_log=tuple(log),
        fallback_classes=tuple(fallback),
    )


def _cap_to_capacity(num: np.ndarray, capacity: np.ndarray):
    """Clamp cell quotas to cell sizes, conserving the grand total.

    Surplus is reassigned proportional to residual capacity, inside the
    class first (favoring wider intervals on ties), then across classes
    (favoring lower class indices on ties). The grand total never exceeds
    N, so the cross-class stage always succeeds.
    """
    num = num.copy()
    c = num.shape[0]
    log = []
    carry = np.zeros(c, dtype=np.int64)
    for j in range(c):
        over = num[j] - capacity[j]
        surplus = int(over[over > 0].sum())
        if surplus == 0:
            continue
        for i in np.flatnonzero(over > 0):
            log.append({
                "stage": "cap", "class": int(j), "interval": int(i),
                "requested": int(num[j, i]), "capacity": int(capacity[j, i]),
            })
        num[j] = np.minimum(num[j], capacity[j])
        residual = capacity[j] - num[j]
        take = min(surplus, int(residual.sum()))
        if take:
            num[j] = _spread(num[j], residual, take, ties="high")
            log.append({"stage": "redistribute-within", "class": int(j), "moved": take})
        carry[j] = surplus - take
    total_carry = int(carry.sum())
    if total_carry:
        res_class = capacity.sum(axis=1) - num.sum(axis=1)
        if total_carry > int(res_class.sum()):
            raise DataError("flip quota exceeds the dataset size")  # unreachable for rho0 <= 1
        add_class = _spread(np.zeros(c, dtype=np.int64), res_class, total_carry, ties="low")
        for j in np.flatnonzero(add_class):
            num[j] = _spread(num[j], capacity[j] - num[j], int(add_class[j]), ties="high")
            log.append({
                "stage": "redistribute-cross", "class": int(j), "received": int(add_class[j]),
                "sources": [int(s) for s in np.flatnonzero(carry)],
            })
    return num, log


def select_noisy_samples(budget: NoiseBudget, profile_c: ConcentrationProfile,
                         seed: int) -> np.ndarray:
    """Uniform without-replacement draw of each cell's quota.

    Every (class, interval) cell owns an RNG substream keyed by (class,
    interval) under the run seed, so the selection is independent of cell
    visit order and worker count.
    """
    picks = []
    for j in range(budget.n_classes):
        for i in range(N_INTERVALS):
            k = int(budget.num_interval[j, i])
            if k == 0:
                continue
            cell = profile_c.intervals[j][i]
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(j, i)))
            picks.append(rng.choice(cell, size=k, replace=False))
    if not picks:
        return np.empty(0, dtype=np.int64)
    return np.sort(np.concatenate(picks)).astype(np.int64)


def choose_flip_label(own: int, con_row: np.ndarray, flip_row: np.ndarray | None,
                      mu1: float = DEFAULT_MU1, mu2: float = DEFAULT_MU2):
    """Destination class for one selected sample, plus the probability audit.

    con_row holds the sample's concentration against every class (own and
    empty classes NaN); it is normalized over foreign classes into a
    feature-evidence distribution. flip_row is the subset's conditional
    flip distribution for the sample's class, or None when the subset saw
    no flips there. The blend mu1*flip + mu2*feature decides by argmax,
    lowest class index on ties; the true class is never a candidate.

    Fallbacks: zero feature evidence -> flip_row alone; flip_row also
    missing -> uniform over foreign classes. Missing flip_row with live
    feature evidence uses the feature distribution alone.
    """
    c = con_row.size
    con = np.nan_to_num(con_row, nan=0.0)
    con[own] = 0.0
    if not np.isfinite(con).all() or con.min() < 0:
        raise DataError("concentration values must be finite and nonnegative")
    total = con.sum()
    fallback = None
    p1 = None if flip_row is None else np.asarray(flip_row, dtype=np.float64)
    if total > 0.0:
        p2 = con / total
        if p1 is not None:
            p = mu1 * p1 + mu2 * p2
        else:
            p = p2.copy()
            fallback = "feature-only"
    elif p1 is not None:
        p2 = None
        p = p1.copy()
        fallback = "subset-row-only"
    else:
        p2 = None
        p = np.full(c, 1.0 / (c - 1))
        p[own] = 0.0
        fallback = "uniform"
    cand = p.copy()
    cand[own] = -1.0  # probabilities are nonnegative, so own class can never win
    label = int(np.argmax(cand))
    audit = {
        "clean_label": int(own),
        "p_subset": None if p1 is None else [float(v) for v in p1],
        "p_feature": None if p2 is None else [float(v) for v in p2],
        "p_blend": [float(v) for v in p],
        "chosen": label,
        "fallback": fallback,
    }
    return label, audit


def gen_rgn(ds: LabeledDataset, subset: NoisySubset, spec: NoiseSpec,
            weights=DEFAULT_INTERVAL_WEIGHTS, threads: int = 1) -> NoiseAssignment:
    """Subset-guided noise: estimate, budget, select, flip.

    Pipeline: estimate the transition matrix and per-class noise rates on
    the subset; partition the subset by concentration (clean-label
    grouping) to read off where its noise sits; budget flips on the full
    dataset; draw the victims cell by cell; choose each victim's new
    label from the blended flip distribution.
    """
    if spec.pattern != "rgn":
        raise ConfigError(f"gen_rgn cannot handle pattern {spec.pattern!r}")
    if subset.n_classes != ds.n_classes:
        raise DataError(
            f"subset has {subset.n_classes} classes, dataset has {ds.n_classes}"
        )
    trans = estimate_transition(subset)
    noise_prof = class_noise_profile(trans)
    sub_ds = LabeledDataset(subset.features, subset.clean_labels)
    sub_profile = build_profile(sub_ds, weights=weights, threads=threads)
    num_ji = subset_interval_noise_counts(subset, sub_profile)
    profile = build_profile(ds, weights=weights, threads=threads)
    budget = compute_budget(ds, profile, num_ji, noise_prof, spec.rho0)
    selected = select_noisy_samples(budget, profile, spec.seed)

    y = ds.clean_labels.labels
    noisy = y.copy()
    audits = []
    for a, b in _chunk_ranges(selected.size):
        idx = selected[a:b]
        con = foreign_concentrations(ds, profile.aggregates, idx, intra=profile.intra)
        for r, k in enumerate(idx):
            own = int(y[k])
            flip_row = noise_prof.flip_rows[own] if noise_prof.flip_defined[own] else None
            label, audit = choose_flip_label(own, con[r], flip_row, spec.mu1, spec.mu2)
            noisy[k] = label
            audit["index"] = int(k)
            audits.append(audit)
    return _assignment(ds, noisy, spec, budget=budget, flip_audit=tuple(audits))


def budget_report(budget: NoiseBudget) -> dict:
    """JSON-ready budget tables for the audit output."""
    return {
        "num_all": budget.num_all,
        "class_shares": [round(float(v), 9) for v in budget.r_class],
        "class_quotas": [int(v) for v in budget.num_class],
        "interval_shares": [[round(float(v), 9) for v in row] for row in budget.r_interval],
        "interval_quotas": [[int(v) for v in row] for row in budget.num_interval],
        "interval_capacity": [[int(v) for v in row] for row in budget.capacity],
        "capping_log": list(budget.capping_log),
        "fallback_classes": list(budget.fallback_classes),
    }
