"""Command-line front end.

Subcommands: transition, concentration, generate, analyze, validate.
Options can come from a JSON config file (--config); explicit flags win.
Every JSON output carries a meta stanza with the tool version, the format
version, and the fully resolved configuration, so a run can be replayed
byte-identically from its own audit. The worker-count knob is excluded
from that stanza: results never depend on it.

Exit codes: 0 success, 2 configuration error (including bad flags),
3 data-format error, 4 validation failure. Logs go to stderr, data only
to files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .analysis import (
    closure_violations,
    interval_noise_report,
    report_to_dict,
)
from .concentration import DEFAULT_INTERVAL_WEIGHTS, build_profile
from .dataio import (
    FORMAT_VERSION,
    FeatureMatrix,
    LabeledDataset,
    LabelVector,
    NoisySubset,
    read_assignment_csv,
    read_features,
    read_labels,
    read_subset_csv,
    write_assignment_csv,
)
from .errors import ConfigError, DataError, NoiseforgeError, ValidationError
from .generators import (
    NoiseAssignment,
    NoiseSpec,
    budget_report,
    gen_asymmetric,
    gen_rgn,
    gen_symmetric,
)
from .synthetic import make_blobs, pick_subset_indices, subset_view
from .transition import class_noise_profile, transition_from_labels, transition_report

log = logging.getLogger("noiseforge")

_CLI_PATTERNS = ("symm-inc", "symm-exc", "asym", "rgn")


def _round_nested(value, digits):
    if isinstance(value, float):
        return round(value, digits)
    if isinstance(value, list):
        return [_round_nested(v, digits) for v in value]
    if isinstance(value, dict):
        return {k: _round_nested(v, digits) for k, v in value.items()}
    return value


def _write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def _load_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            cfg = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return cfg


def _resolve(args, spec_keys: dict) -> dict:
    """Merge flag values over config-file values over defaults."""
    cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}
    unknown = set(cfg) - set(spec_keys)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    resolved = {}
    for key, default in spec_keys.items():
        flag = getattr(args, key, None)
        resolved[key] = flag if flag is not None else cfg.get(key, default)
    return resolved


def _require(resolved: dict, *keys) -> None:
    for k in keys:
        if resolved[k] is None:
            raise ConfigError(f"missing required option --{k.replace('_', '-')}")


def _meta(command: str, resolved: dict) -> dict:
    cfg = {k: v for k, v in resolved.items() if k != "threads"}
    return {
        "tool": "noiseforge",
        "version": __version__,
        "format_version": FORMAT_VERSION,
        "command": command,
        "config": cfg,
    }


def _parse_weights(value):
    if value is None:
        return list(DEFAULT_INTERVAL_WEIGHTS)
    if isinstance(value, str):
        try:
            value = [int(v) for v in value.split(",")]
        except ValueError:
            raise ConfigError(f"interval weights must be integers, got {value!r}")
    if not isinstance(value, (list, tuple)):
        raise ConfigError("interval_weights must be a list of five integers")
    return [int(v) for v in value]


def _parse_asym_map(value) -> dict:
    """Accept an inline JSON object or a path to one."""
    if isinstance(value, dict):
        raw = value
    else:
        text = str(value)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError:
            try:
                with open(text, "r", encoding="utf-8") as f:
                    raw = json.load(f)
            except (OSError, json.JSONDecodeError):
                raise ConfigError(f"asym map is neither inline JSON nor a JSON file: {value!r}")
    if not isinstance(raw, dict):
        raise ConfigError("asym map must be a JSON object of class->class")
    try:
        return {int(k): int(v) for k, v in raw.items()}
    except (TypeError, ValueError):
        raise ConfigError("asym map keys and values must be integers")


def _load_dataset(features_path, labels_path, n_classes) -> LabeledDataset:
    features = read_features(features_path)
    labels = read_labels(labels_path, n_classes)
    return LabeledDataset(features, labels)


def _load_subset(path, ds: LabeledDataset) -> NoisySubset:
    """Subset rows must point into the dataset and agree on clean labels."""
    idx, clean, noisy = read_subset_csv(path, ds.n_classes)
    if idx.size and (idx.min() < 0 or idx.max() >= ds.n_samples):
        raise DataError(f"{path}: subset index outside [0, {ds.n_samples})")
    mismatch = ds.clean_labels.labels[idx] != clean.labels
    if mismatch.any():
        r = int(np.argmax(mismatch))
        raise DataError(
            f"{path}: clean label at index {int(idx[r])} disagrees with the label file"
        )
    return NoisySubset(
        sample_indices=idx,
        features=FeatureMatrix(ds.features.data[idx].copy()),
        clean_labels=clean,
        noisy_labels=noisy,
    )


def _cmd_transition(args) -> int:
    resolved = _resolve(args, {"subset": None, "classes": None, "out": None})
    _require(resolved, "subset", "out")
    _, clean, noisy = read_subset_csv(resolved["subset"], resolved["classes"])
    t = transition_from_labels(clean, noisy)
    profile = class_noise_profile(t)
    payload = {"meta": _meta("transition", resolved)}
    payload.update(_round_nested(transition_report(t, profile), 9))
    _write_json(payload, resolved["out"])
    log.info("transition: %d classes, overall noise ratio %.4f",
             t.n_classes, profile.rho_overall)
    return 0


def _cmd_concentration(args) -> int:
    resolved = _resolve(args, {
        "features": None, "labels": None, "classes": None,
        "interval_weights": None, "out": None, "threads": 1,
    })
    _require(resolved, "features", "labels", "out")
    weights = _parse_weights(resolved["interval_weights"])
    resolved["interval_weights"] = weights
    ds = _load_dataset(resolved["features"], resolved["labels"], resolved["classes"])
    profile = build_profile(ds, weights=weights, threads=int(resolved["threads"]))
    out = str(resolved["out"])
    if out.endswith(".csv"):
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write("index,class,con,interval\n")
            y = ds.clean_labels.labels
            for k in range(ds.n_samples):
                f.write(f"{k},{int(y[k])},{float(profile.con[k])!r},{int(profile.interval_of[k])}\n")
    else:
        payload = {
            "meta": _meta("concentration", resolved),
            "boundaries": [
                [None if b is None else [round(b[0], 9), round(b[1], 9)] for b in row]
                for row in profile.boundaries
            ],
            "interval_sizes": profile.sizes.tolist(),
            "small_classes": list(profile.small_classes),
            "samples": [
                {
                    "index": k,
                    "class": int(ds.clean_labels.labels[k]),
                    "con": round(float(profile.con[k]), 9),
                    "interval": int(profile.interval_of[k]),
                }
                for k in range(ds.n_samples)
            ],
        }
        _write_json(payload, out)
    log.info("concentration: %d samples, %d classes", ds.n_samples, ds.n_classes)
    return 0


def _build_spec(resolved: dict) -> NoiseSpec:
    pattern = str(resolved["pattern"]).replace("-", "_")
    seed = resolved["seed"]
    if seed is None:
        raise ConfigError("missing required option --seed")
    asym_map = resolved["asym_map"]
    if asym_map is not None:
        asym_map = _parse_asym_map(asym_map)
    return NoiseSpec(
        pattern=pattern,
        seed=int(seed),
        rho0=None if resolved["rho0"] is None else float(resolved["rho0"]),
        tau=None if resolved["tau"] is None else float(resolved["tau"]),
        asym_map=asym_map,
        mu1=float(resolved["mu1"]),
        mu2=float(resolved["mu2"]),
    )


def _cmd_generate(args) -> int:
    resolved = _resolve(args, {
        "pattern": None, "features": None, "labels": None, "subset": None,
        "classes": None, "rho0": None, "tau": None, "asym_map": None,
        "mu1": 0.1, "mu2": 0.9, "interval_weights": None, "seed": None,
        "out": None, "audit": None, "threads": 1,
    })
    _require(resolved, "pattern", "features", "labels", "out")
    if resolved["pattern"] not in _CLI_PATTERNS:
        raise ConfigError(
            f"unknown pattern {resolved['pattern']!r}; expected one of {_CLI_PATTERNS}"
        )
    weights = _parse_weights(resolved["interval_weights"])
    resolved["interval_weights"] = weights
    spec = _build_spec(resolved)
    ds = _load_dataset(resolved["features"], resolved["labels"], resolved["classes"])
    threads = int(resolved["threads"])

    if spec.pattern in ("symm_inc", "symm_exc"):
        assignment = gen_symmetric(ds, spec)
    elif spec.pattern == "asym":
        assignment = gen_asymmetric(ds, spec)
    else:
        if resolved["subset"] is None:
            raise ConfigError("pattern rgn requires --subset")
        subset = _load_subset(resolved["subset"], ds)
        assignment = gen_rgn(ds, subset, spec, weights=weights, threads=threads)

    write_assignment_csv(assignment.clean.labels, assignment.noisy.labels, resolved["out"])
    if resolved["audit"] is not None:
        audit = {
            "meta": _meta("generate", resolved),
            "realized": {
                "n_flips": assignment.n_flips,
                "ratio": round(assignment.realized_ratio, 6),
            },
            "budget": None if assignment.budget is None else budget_report(assignment.budget),
            "flips": None if assignment.flip_audit is None else [
                _round_nested(dict(row), 9) for row in assignment.flip_audit
            ],
        }
        _write_json(audit, resolved["audit"])
    log.info("generate %s: %d/%d labels flipped (ratio %.4f)",
             spec.pattern, assignment.n_flips, ds.n_samples, assignment.realized_ratio)
    return 0


def _cmd_analyze(args) -> int:
    resolved = _resolve(args, {
        "features": None, "labels": None, "noisy": None, "classes": None,
        "interval_weights": None, "out": None, "threads": 1,
    })
    _require(resolved, "features", "labels", "noisy", "out")
    weights = _parse_weights(resolved["interval_weights"])
    resolved["interval_weights"] = weights
    ds = _load_dataset(resolved["features"], resolved["labels"], resolved["classes"])
    clean, noisy = read_assignment_csv(resolved["noisy"], ds.n_classes)
    assignment = NoiseAssignment(
        clean=clean,
        noisy=noisy,
        flipped=clean.labels != noisy.labels,
        pattern="external",
        seed=0,
    )
    profile = build_profile(ds, weights=weights, threads=int(resolved["threads"]))
    report = interval_noise_report(ds, assignment, profile)
    payload = {"meta": _meta("analyze", resolved)}
    payload.update(report_to_dict(report))
    _write_json(payload, resolved["out"])
    log.info("analyze: %d flips over %d samples (ratio %.4f)",
             report.n_flips, report.n_samples, report.overall_ratio)
    return 0


def _cmd_validate(args) -> int:
    """End-to-end closure check on synthetic data; exits 4 on violation."""
    resolved = _resolve(args, {"seed": 20260814, "threads": 1})
    seed = int(resolved["seed"])
    threads = int(resolved["threads"])

    ds = make_blobs(3000, 16, 6, seed=seed, spread=1.5)
    idx = pick_subset_indices(ds, per_class=40, seed=seed)
    sub_ds = LabeledDataset(
        FeatureMatrix(ds.features.data[idx].copy()),
        LabelVector(ds.clean_labels.labels[idx], ds.n_classes),
    )
    corrupt = gen_symmetric(sub_ds, NoiseSpec(pattern="symm_exc", seed=(seed + 1) % 2**64, tau=0.35))
    full_noisy = ds.clean_labels.labels.copy()
    full_noisy[idx] = corrupt.noisy.labels
    subset = subset_view(ds, idx, full_noisy)

    spec = NoiseSpec(pattern="rgn", seed=seed, rho0=0.25)
    assignment = gen_rgn(ds, subset, spec, threads=threads)
    profile = build_profile(ds, threads=threads)
    report = interval_noise_report(ds, assignment, profile)
    problems = closure_violations(report, assignment.budget)

    replay = gen_rgn(ds, subset, spec, threads=threads)
    if not np.array_equal(replay.noisy.labels, assignment.noisy.labels):
        problems.append("replay with the same seed produced different labels")

    if problems:
        for p in problems:
            log.error("validate: %s", p)
        raise ValidationError(f"{len(problems)} closure violations")
    log.info("validate: OK (%d flips on %d samples, %d capping adjustments)",
             report.n_flips, report.n_samples, len(assignment.budget.capping_log))
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; explicit flags override it")
    p.add_argument("--threads", type=int, help="worker pool size (never changes results)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="noiseforge",
        description="Deterministic label-noise synthesis for classification datasets.",
    )
    p.add_argument(
        "--version", action="version",
        version=f"noiseforge {__version__} (feature format v{FORMAT_VERSION})",
    )
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transition", help="estimate a noise transition matrix from a subset CSV")
    t.add_argument("--subset")
    t.add_argument("--classes", type=int)
    t.add_argument("--out")
    _add_common(t)
    t.set_defaults(func=_cmd_transition)

    c = sub.add_parser("concentration", help="per-sample concentration and interval partition")
    c.add_argument("--features")
    c.add_argument("--labels")
    c.add_argument("--classes", type=int)
    c.add_argument("--interval-weights", dest="interval_weights")
    c.add_argument("--out", help=".csv for per-sample rows, anything else for JSON")
    _add_common(c)
    c.set_defaults(func=_cmd_concentration)

    g = sub.add_parser("generate", help="corrupt labels under a noise pattern")
    g.add_argument("--pattern", choices=_CLI_PATTERNS)
    g.add_argument("--features")
    g.add_argument("--labels")
    g.add_argument("--subset")
    g.add_argument("--classes", type=int)
    g.add_argument("--rho0", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--asym-map", dest="asym_map")
    g.add_argument("--mu1", type=float)
    g.add_argument("--mu2", type=float)
    g.add_argument("--interval-weights", dest="interval_weights")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.add_argument("--audit")
    _add_common(g)
    g.set_defaults(func=_cmd_generate)

    a = sub.add_parser("analyze", help="per-interval noise statistics of a noisy assignment")
    a.add_argument("--features")
    a.add_argument("--labels")
    a.add_argument("--noisy")
    a.add_argument("--classes", type=int)
    a.add_argument("--interval-weights", dest="interval_weights")
    a.add_argument("--out")
    _add_common(a)
    a.set_defaults(func=_cmd_analyze)

    v = sub.add_parser("validate", help="end-to-end closure check on synthetic data")
    v.add_argument("--seed", type=int)
    _add_common(v)
    v.set_defaults(func=_cmd_validate)

    return p


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        log.error("%s", e)
        return 2
    except ValidationError as e:
        log.error("%s", e)
        return 4
    except DataError as e:
        log.error("%s", e)
        return 3
    except NoiseforgeError as e:  # base-class safety net
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
