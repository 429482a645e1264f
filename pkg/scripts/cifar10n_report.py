#!/usr/bin/env python3
"""Transition and concentration report for the CIFAR-10N relabelings.

CIFAR-10N ships human annotations for the CIFAR-10 train split in a
single `CIFAR-10_human.npy` (keys: clean_label, worse_label,
aggre_label, random_label1..3). Given that file plus a feature file for
the same 50000 images in dataset order (see the extractor package),
this prints the estimated transition matrix, the overall noise ratio,
and the realized noise ratio per concentration interval, class by
class. It also writes the label CSVs so the same analysis can be rerun
through `noiseforge transition` / `noiseforge analyze`.

Typical use:
    python3 scripts/cifar10n_report.py \
        --human-labels CIFAR-10_human.npy \
        --features cifar10_train.rgnf --outdir c10n_out
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

import noiseforge as nf

ANNOTATIONS = {
    "worst": "worse_label",
    "aggregate": "aggre_label",
    "random1": "random_label1",
    "random2": "random_label2",
    "random3": "random_label3",
}


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--human-labels", type=Path, required=True,
                   help="path to CIFAR-10_human.npy")
    p.add_argument("--features", type=Path, required=True,
                   help="RGNF feature file, one row per train image in order")
    p.add_argument("--annotation", choices=sorted(ANNOTATIONS), default="worst")
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--outdir", type=Path, default=Path("c10n_out"))
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    human = np.load(args.human_labels, allow_pickle=True).item()
    clean = nf.LabelVector(np.asarray(human["clean_label"], dtype=np.int64), 10)
    noisy = nf.LabelVector(
        np.asarray(human[ANNOTATIONS[args.annotation]], dtype=np.int64), 10
    )

    t = nf.transition_from_labels(clean, noisy)
    profile_t = nf.class_noise_profile(t)
    print(f"annotation set: {args.annotation} "
          f"({len(clean)} rows, overall noise {profile_t.rho_overall:.4f})")
    print("transition matrix (rows = clean class):")
    for j in range(10):
        print("  " + " ".join(f"{v:.3f}" for v in t.t[j]))
    print("per-class noise rates: "
          + " ".join(f"{v:.3f}" for v in profile_t.rho))

    feats = nf.read_features(args.features)
    if feats.n_samples != len(clean):
        raise SystemExit(
            f"feature rows ({feats.n_samples}) != labels ({len(clean)}); "
            "the feature file must cover the train split in dataset order"
        )
    ds = nf.LabeledDataset(feats, clean)
    profile = nf.build_profile(ds, threads=args.threads)
    assignment = nf.NoiseAssignment(
        clean=clean, noisy=noisy,
        flipped=clean.labels != noisy.labels,
        pattern="human", seed=0,
    )
    report = nf.interval_noise_report(ds, assignment, profile)
    print("\nrealized noise ratio per concentration interval (narrow -> wide):")
    monotone = 0
    for j in range(10):
        ratios = report.ratios[j]
        trend = "non-decreasing" if np.all(np.diff(ratios) >= -1e-12) else "mixed"
        monotone += trend == "non-decreasing"
        row = " ".join(f"{v:.3f}" for v in ratios)
        print(f"  class {j}: [{row}]  {trend}")
    print(f"{monotone}/10 classes show a non-decreasing interval trend")

    args.outdir.mkdir(parents=True, exist_ok=True)
    nf.write_labels(clean, args.outdir / "labels.csv")
    idx = np.arange(len(clean), dtype=np.int64)
    nf.write_subset_csv(idx, clean, noisy, args.outdir / f"{args.annotation}.csv")
    with open(args.outdir / "report.json", "w", encoding="utf-8") as f:
        json.dump(nf.report_to_dict(report), f, indent=2)
        f.write("\n")
    print(f"\nCSV + JSON artifacts in {args.outdir}/; rerun via the CLI with:")
    print(f"  noiseforge transition --subset {args.outdir}/{args.annotation}.csv"
          f" --classes 10 --out transition.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
