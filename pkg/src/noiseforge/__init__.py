"""Deterministic label-noise synthesis for classification datasets.

Corrupts clean labels under four patterns: symmetric (inclusive or
exclusive of the true class), asymmetric class maps, and subset-guided
noise that transfers the noise structure observed on a small annotated
subset (its transition matrix plus where the noise sits along the
feature-concentration axis) onto the full dataset.
"""

__version__ = "0.1.0"

from .analysis import (
    IntervalNoiseReport,
    closure_violations,
    interval_noise_report,
    overall_accuracy,
    report_to_dict,
)
from .apportion import largest_remainder, round_half_up, to_fraction
from .concentration import (
    DEFAULT_INTERVAL_WEIGHTS,
    ClassAggregates,
    ConcentrationProfile,
    build_profile,
    class_aggregates,
    con_k,
    con_k_j,
    distance_stats,
    foreign_concentrations,
    interval_sizes,
    l_inter,
    l_inter_j,
    l_intra,
    partition_intervals,
)
from .dataio import (
    FORMAT_VERSION,
    FeatureMatrix,
    LabeledDataset,
    LabelVector,
    NoisySubset,
    read_features,
    read_labels,
    read_noisy_subset,
    read_subset_csv,
    write_features,
    write_labels,
    write_subset_csv,
)
from .errors import ConfigError, DataError, NoiseforgeError, ValidationError
from .generators import (
    NoiseAssignment,
    NoiseBudget,
    NoiseSpec,
    choose_flip_label,
    compute_budget,
    gen_asymmetric,
    gen_rgn,
    gen_symmetric,
    select_noisy_samples,
    subset_interval_noise_counts,
)
from .synthetic import make_blobs, pick_subset_indices, subset_view
from .transition import (
    ClassNoiseProfile,
    TransitionMatrix,
    class_noise_profile,
    estimate_transition,
    transition_from_labels,
    transition_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
