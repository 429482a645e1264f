import json

import numpy as np
import pytest

import noiseforge as nf
from noiseforge.cli import main
from support import corrupted_subset


@pytest.fixture
def workspace(tmp_path, rng):
    """Feature file, label CSV, and corrupted-subset CSV on disk."""
    centers = rng.normal(size=(5, 8)) * 6.0
    labels = np.arange(1500, dtype=np.int64) % 5
    feats = centers[labels] + rng.normal(size=(1500, 8))
    ds = nf.LabeledDataset(
        nf.FeatureMatrix(feats.astype(np.float32)), nf.LabelVector(labels, 5)
    )
    subset = corrupted_subset(ds, per_class=30, tau=0.35, seed=7)
    paths = {
        "dir": tmp_path,
        "features": tmp_path / "features.rgnf",
        "labels": tmp_path / "labels.csv",
        "subset": tmp_path / "subset.csv",
    }
    nf.write_features(ds.features, paths["features"])
    nf.write_labels(ds.clean_labels, paths["labels"])
    nf.write_subset_csv(
        subset.sample_indices, subset.clean_labels, subset.noisy_labels, paths["subset"]
    )
    return paths


def _generate_args(ws, out, audit=None, **over):
    args = [
        "generate", "--pattern", over.pop("pattern", "rgn"),
        "--features", str(ws["features"]), "--labels", str(ws["labels"]),
        "--seed", over.pop("seed", "99"), "--out", str(out),
    ]
    if over.pop("subset", True):
        args += ["--subset", str(ws["subset"])]
    if audit is not None:
        args += ["--audit", str(audit)]
    for k, v in over.items():
        args += [f"--{k.replace('_', '-')}", str(v)]
    return args


def test_transition_report_on_disk(workspace):
    out = workspace["dir"] / "trans.json"
    rc = main(["transition", "--subset", str(workspace["subset"]),
               "--classes", "5", "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["meta"]["command"] == "transition"
    assert payload["classes"] == 5
    assert len(payload["matrix"]) == 5
    rows = np.asarray(payload["matrix"])
    assert np.allclose(rows.sum(axis=1), 1.0, atol=1e-6)
    # 9-decimal rounding: no value carries more precision
    flat = [v for row in payload["matrix"] for v in row]
    assert all(abs(v - round(v, 9)) == 0 for v in flat)


def test_concentration_csv_output(workspace):
    out = workspace["dir"] / "con.csv"
    rc = main(["concentration", "--features", str(workspace["features"]),
               "--labels", str(workspace["labels"]), "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "index,class,con,interval"
    assert len(lines) == 1501
    first = lines[1].split(",")
    assert first[0] == "0"
    assert 0 <= int(first[3]) <= 4


def test_concentration_json_output(workspace):
    out = workspace["dir"] / "con.json"
    rc = main(["concentration", "--features", str(workspace["features"]),
               "--labels", str(workspace["labels"]), "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert len(payload["samples"]) == 1500
    assert len(payload["boundaries"]) == 5
    assert payload["interval_sizes"][0] == [10, 19, 39, 77, 155]  # 300 per class


def test_generate_rgn_with_audit_and_analyze(workspace):
    out = workspace["dir"] / "noisy.csv"
    audit = workspace["dir"] / "audit.json"
    rc = main(_generate_args(workspace, out, audit=audit, rho0="0.2"))
    assert rc == 0
    payload = json.loads(audit.read_text())
    assert payload["meta"]["config"]["rho0"] == 0.2
    assert "threads" not in payload["meta"]["config"]
    assert payload["realized"]["n_flips"] == 300
    assert payload["budget"]["num_all"] == 300
    assert len(payload["flips"]) == 300

    analysis = workspace["dir"] / "analysis.json"
    rc = main(["analyze", "--features", str(workspace["features"]),
               "--labels", str(workspace["labels"]),
               "--noisy", str(out), "--out", str(analysis)])
    assert rc == 0
    report = json.loads(analysis.read_text())
    assert report["n_flips"] == 300
    noisy_cells = np.asarray([row["noisy"] for row in report["per_class"]])
    assert np.array_equal(noisy_cells, np.asarray(payload["budget"]["interval_quotas"]))


def test_generate_symmetric_tau_zero_identity(workspace):
    out = workspace["dir"] / "noisy.csv"
    rc = main(_generate_args(workspace, out, pattern="symm-exc", subset=False, tau="0"))
    assert rc == 0
    clean, noisy = nf.dataio.read_assignment_csv(out, 5)
    assert np.array_equal(clean.labels, noisy.labels)


def test_generate_asym_via_config_file(workspace):
    cfg = workspace["dir"] / "run.json"
    cfg.write_text(json.dumps({
        "pattern": "asym", "tau": 1.0, "asym_map": {"2": 0},
        "features": str(workspace["features"]), "labels": str(workspace["labels"]),
        "seed": 5,
    }))
    out = workspace["dir"] / "noisy.csv"
    rc = main(["generate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    clean, noisy = nf.dataio.read_assignment_csv(out, 5)
    assert np.all(noisy.labels[clean.labels == 2] == 0)


def test_flag_overrides_config_value(workspace):
    cfg = workspace["dir"] / "run.json"
    cfg.write_text(json.dumps({"pattern": "symm-exc", "tau": 1.0, "seed": 5}))
    out = workspace["dir"] / "noisy.csv"
    audit = workspace["dir"] / "audit.json"
    rc = main(["generate", "--config", str(cfg), "--tau", "0",
               "--features", str(workspace["features"]),
               "--labels", str(workspace["labels"]),
               "--out", str(out), "--audit", str(audit)])
    assert rc == 0
    payload = json.loads(audit.read_text())
    assert payload["meta"]["config"]["tau"] == 0.0
    assert payload["realized"]["n_flips"] == 0


def test_unknown_config_key_rejected(workspace):
    cfg = workspace["dir"] / "run.json"
    cfg.write_text(json.dumps({"pattern": "symm-exc", "tua": 0.5}))
    rc = main(["generate", "--config", str(cfg), "--seed", "1",
               "--features", str(workspace["features"]),
               "--labels", str(workspace["labels"]),
               "--out", str(workspace["dir"] / "x.csv")])
    assert rc == 2


def test_exit_codes(workspace):
    out = workspace["dir"] / "x.csv"
    # rgn without subset -> config error
    assert main(_generate_args(workspace, out, subset=False, rho0="0.2")) == 2
    # missing seed -> config error
    assert main(["generate", "--pattern", "symm-exc", "--tau", "0.1",
                 "--features", str(workspace["features"]),
                 "--labels", str(workspace["labels"]), "--out", str(out)]) == 2
    # corrupt feature file -> data error
    bad = workspace["dir"] / "bad.rgnf"
    bad.write_bytes(b"NOPE" + bytes(16))
    assert main(["generate", "--pattern", "symm-exc", "--tau", "0.1", "--seed", "1",
                 "--features", str(bad), "--labels", str(workspace["labels"]),
                 "--out", str(out)]) == 3
    # unknown flag -> argparse usage error (exit 2)
    with pytest.raises(SystemExit) as e:
        main(["generate", "--bogus", "1"])
    assert e.value.code == 2


def test_generate_byte_determinism_across_runs_and_threads(workspace, monkeypatch):
    # output paths are echoed into the audit meta, so each run works in its
    # own directory and names its outputs identically
    dirs = []
    for tag, threads in (("r1", "1"), ("r2", "8")):
        d = workspace["dir"] / tag
        d.mkdir()
        monkeypatch.chdir(d)
        rc = main(_generate_args(
            workspace, "noisy.csv", audit="audit.json",
            rho0="0.2", threads=threads,
        ))
        assert rc == 0
        dirs.append(d)
    d1, d2 = dirs
    assert (d1 / "noisy.csv").read_bytes() == (d2 / "noisy.csv").read_bytes()
    assert (d1 / "audit.json").read_bytes() == (d2 / "audit.json").read_bytes()


def test_validate_subcommand_passes():
    assert main(["validate", "--seed", "321"]) == 0


def test_version_banner(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    text = capsys.readouterr().out
    assert "noiseforge" in text
    assert "format v1" in text
