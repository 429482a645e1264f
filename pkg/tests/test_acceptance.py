"""End-to-end sign-off checks for the noise synthesis pipeline.

One test per shipped guarantee. Each prints an `ACCEPTANCE <name>:
PASS|FAIL` line (visible under `pytest -s`); under `pytest -v` the
test outcome itself is the per-criterion verdict.
"""

import os
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

import noiseforge as nf
from noiseforge.cli import main
from support import corrupted_subset, random_dataset
from oracles import brute_distance_stats, oracle_budget, oracle_round_half_up

REL_TOL = 1e-4
ABS_FLOOR = 1e-9


@contextmanager
def _verdict(name):
    try:
        yield
    except Exception:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS")


def _close(got, want):
    return np.all(np.abs(got - want) <= np.maximum(REL_TOL * np.abs(want), ABS_FLOOR))


def test_distance_oracle_equivalence_and_runtime():
    with _verdict("distance-oracle-equivalence"):
        rng = np.random.default_rng(8140)
        for _ in range(20):
            c = int(rng.integers(2, 11))
            n = int(rng.integers(max(2 * c, 20), 1001))
            d = int(rng.integers(2, 65))
            ds = random_dataset(rng, n=n, d=d, c=c)
            intra, inter = nf.distance_stats(ds)
            b_intra, b_inter = brute_distance_stats(
                ds.features.data, ds.clean_labels.labels
            )
            assert _close(intra, b_intra)
            assert _close(inter, b_inter)
            assert _close(intra / inter, b_intra / b_inter)

        # fast path stays interactive at benchmark scale
        big = nf.LabeledDataset(
            nf.FeatureMatrix(rng.standard_normal((50000, 512)).astype(np.float32)),
            nf.LabelVector(np.arange(50000, dtype=np.int64) % 10, 10),
        )
        t0 = time.perf_counter()
        nf.distance_stats(big, threads=1)
        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0, f"fast path took {elapsed:.2f}s on 50000x512"


def _fake_noise_profile(rho):
    rho = np.asarray(rho, dtype=np.float64)
    c = rho.size
    flip_rows = np.zeros((c, c))
    flip_defined = rho > 0
    for j in range(c):
        if flip_defined[j]:
            flip_rows[j] = 1.0 / (c - 1)
            flip_rows[j, j] = 0.0
    return nf.ClassNoiseProfile(
        rho=rho,
        rho_overall=float(rho.mean()),
        flip_rows=flip_rows,
        flip_defined=flip_defined,
        rho_defined=np.ones(c, dtype=bool),
        support=np.full(c, 50, dtype=np.int64),
    )


def test_budget_closure_against_rational_oracle():
    with _verdict("budget-closure"):
        rng = np.random.default_rng(55)
        for _ in range(50):
            c = int(rng.integers(2, 9))
            nc = rng.integers(40, 400, size=c)
            labels = np.repeat(np.arange(c, dtype=np.int64), nc)
            feats = rng.normal(size=(labels.size, 6)) + 8.0 * rng.normal(size=(c, 6))[labels]
            ds = nf.LabeledDataset(
                nf.FeatureMatrix(feats.astype(np.float32)), nf.LabelVector(labels, c)
            )
            profile = nf.build_profile(ds)
            rho = rng.uniform(0.02, 0.9, size=c)
            rho0 = float(rng.uniform(0.02, 0.6))
            num_ji = rng.integers(0, 25, size=(c, 5))
            if rng.random() < 0.2:
                num_ji[int(rng.integers(c))] = 0  # exercise the prior fallback

            budget = nf.compute_budget(ds, profile, num_ji, _fake_noise_profile(rho), rho0)
            want_all = oracle_round_half_up(nf.to_fraction(rho0) * labels.size)
            assert budget.num_all == want_all
            assert int(budget.num_class.sum()) == want_all
            assert np.array_equal(budget.num_interval.sum(axis=1), budget.num_class)
            assert np.all(budget.num_interval <= budget.capacity)
            if not budget.capping_log:
                o_all, o_class, o_interval = oracle_budget(
                    nc.tolist(), rho.tolist(), rho0, num_ji, profile.interval_weights
                )
                assert budget.num_all == o_all
                assert np.array_equal(budget.num_class, np.asarray(o_class))
                assert np.array_equal(budget.num_interval, np.asarray(o_interval))


def test_guided_noise_hits_requested_ratio_exactly():
    with _verdict("requested-ratio-exact"):
        rng = np.random.default_rng(77)
        ds = random_dataset(rng, n=10000, d=12, c=10, separation=8.0)
        subset = corrupted_subset(ds, per_class=50, tau=0.3, seed=11)
        for rho0 in (0.2, 0.5, 0.8):
            spec = nf.NoiseSpec(pattern="rgn", seed=101, rho0=rho0)
            assignment = nf.gen_rgn(ds, subset, spec)
            want = oracle_round_half_up(nf.to_fraction(rho0) * 10000)
            assert assignment.n_flips == want == int(round(rho0 * 10000))
            assert not np.any(
                assignment.noisy.labels[assignment.flipped]
                == assignment.clean.labels[assignment.flipped]
            )


def test_interval_rates_survive_generation_round_trip():
    with _verdict("interval-rate-transfer"):
        rng = np.random.default_rng(909)
        ds = random_dataset(rng, n=6000, d=10, c=6, separation=8.0)
        subset = corrupted_subset(ds, per_class=60, tau=0.35, seed=4)
        spec = nf.NoiseSpec(pattern="rgn", seed=31, rho0=0.3)
        assignment = nf.gen_rgn(ds, subset, spec)
        budget = assignment.budget

        profile = nf.build_profile(ds)
        report = nf.interval_noise_report(ds, assignment, profile)
        assert nf.closure_violations(report, budget) == []
        assert np.array_equal(report.noisy, budget.num_interval)

        # realized per-interval counts equal the largest-remainder rounding
        # of the subset's interval rates, wherever capping did not intervene
        sub_ds = nf.LabeledDataset(subset.features, subset.clean_labels)
        sub_profile = nf.build_profile(sub_ds)
        num_ji = nf.subset_interval_noise_counts(subset, sub_profile)
        capped = {entry["class"] for entry in budget.capping_log}
        checked = 0
        for j in range(6):
            quota = int(budget.num_class[j])
            row_sum = int(num_ji[j].sum())
            if j in capped or j in budget.fallback_classes or not (quota and row_sum):
                continue
            shares = [Fraction(int(v), row_sum) * quota for v in num_ji[j]]
            want = nf.largest_remainder(shares, quota, ties="high")
            assert np.array_equal(report.noisy[j], np.asarray(want))
            checked += 1
        assert checked >= 4  # the check must not pass vacuously


def test_symmetric_noise_statistics():
    with _verdict("symmetric-statistics"):
        n, c, tau = 100000, 10, 0.4
        ds = nf.LabeledDataset(
            nf.FeatureMatrix(np.zeros((n, 1), dtype=np.float32)),
            nf.LabelVector(np.arange(n, dtype=np.int64) % c, c),
        )
        exc = nf.gen_symmetric(ds, nf.NoiseSpec(pattern="symm_exc", seed=5, tau=tau))
        clean, noisy = exc.clean.labels, exc.noisy.labels
        per_class = n // c
        for j in range(c):
            flips_j = exc.flipped & (clean == j)
            freq = np.bincount(noisy[flips_j], minlength=c) / per_class
            foreign = np.delete(freq, j)
            assert np.all(np.abs(foreign - tau / (c - 1)) <= 0.005)
        assert abs(exc.realized_ratio - 0.40) <= 0.005

        inc = nf.gen_symmetric(ds, nf.NoiseSpec(pattern="symm_inc", seed=5, tau=tau))
        assert abs(inc.realized_ratio - tau * (c - 1) / c) <= 0.005


def test_flip_probability_worked_examples():
    with _verdict("flip-probability-vectors"):
        con_row = np.array([np.nan, 0.6, 0.2])
        flip_row = np.array([0.0, 0.5, 0.5])
        label, audit = nf.choose_flip_label(0, con_row, flip_row, mu1=0.1, mu2=0.9)
        p_feature = np.asarray(audit["p_feature"])
        p_blend = np.asarray(audit["p_blend"])
        assert np.all(np.abs(p_feature[1:] - [0.75, 0.25]) <= 1e-12)
        assert np.all(np.abs(p_blend[1:] - [0.725, 0.275]) <= 1e-12)
        assert label == 1
        assert audit["fallback"] is None


def test_cli_outputs_are_byte_deterministic(tmp_path, monkeypatch, rng):
    with _verdict("byte-determinism"):
        ds = random_dataset(rng, n=2500, d=10, c=5, separation=8.0)
        subset = corrupted_subset(ds, per_class=40, tau=0.3, seed=9)
        features = tmp_path / "features.rgnf"
        labels = tmp_path / "labels.csv"
        subset_csv = tmp_path / "subset.csv"
        nf.write_features(ds.features, features)
        nf.write_labels(ds.clean_labels, labels)
        nf.write_subset_csv(
            subset.sample_indices, subset.clean_labels, subset.noisy_labels, subset_csv
        )
        outputs = {}
        for tag, threads in (("one", "1"), ("two", "1"), ("eight", "8")):
            d = tmp_path / tag
            d.mkdir()
            monkeypatch.chdir(d)
            rc = main([
                "generate", "--pattern", "rgn",
                "--features", str(features), "--labels", str(labels),
                "--subset", str(subset_csv), "--rho0", "0.25", "--seed", "2024",
                "--threads", threads, "--out", "noisy.csv", "--audit", "audit.json",
            ])
            assert rc == 0
            outputs[tag] = (
                (d / "noisy.csv").read_bytes(), (d / "audit.json").read_bytes()
            )
        assert outputs["one"] == outputs["two"]  # rerun
        assert outputs["one"] == outputs["eight"]  # thread count


CIFAR10N_DIR = os.environ.get("NOISEFORGE_CIFAR10N", "")


@pytest.mark.skipif(
    not CIFAR10N_DIR,
    reason="set NOISEFORGE_CIFAR10N to a directory holding CIFAR-10_human.npy "
    "and features.rgnf (512-d train-set features in dataset order)",
)
def test_cifar10n_worst_labels_match_reported_structure():
    with _verdict("cifar10n-worst"):
        human = np.load(
            os.path.join(CIFAR10N_DIR, "CIFAR-10_human.npy"), allow_pickle=True
        ).item()
        clean = np.asarray(human["clean_label"], dtype=np.int64)
        worst = np.asarray(human["worse_label"], dtype=np.int64)
        overall = float(np.mean(clean != worst))
        assert abs(overall - 0.40) <= 0.02

        feats = nf.read_features(os.path.join(CIFAR10N_DIR, "features.rgnf"))
        ds = nf.LabeledDataset(feats, nf.LabelVector(clean, 10))
        profile = nf.build_profile(ds, threads=4)
        assignment = nf.NoiseAssignment(
            clean=nf.LabelVector(clean, 10),
            noisy=nf.LabelVector(worst, 10),
            flipped=clean != worst,
            pattern="external",
            seed=0,
        )
        report = nf.interval_noise_report(ds, assignment, profile)
        good = 0
        for j in range(10):
            ratios = report.ratios[j]
            if np.all(np.diff(ratios) >= -1e-12) and ratios[-1] < 1.0:
                good += 1
        assert good > 5, f"only {good}/10 classes show the expected interval trend"
