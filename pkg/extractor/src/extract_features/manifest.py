"""Extraction manifest: what produced the feature file, and its hash."""

import hashlib
import json
from dataclasses import asdict, dataclass

from .errors import ExtractionError


@dataclass(frozen=True)
class ExtractionManifest:
    dataset: str
    model: str
    weights: str
    layer: str
    n_samples: int
    dim: int
    checksum_sha256: str
    preprocessing: dict

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            json.dump(asdict(self), f, indent=2)
            f.write("\n")


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def verify_checksum(path, manifest: ExtractionManifest) -> None:
    got = sha256_of(path)
    if got != manifest.checksum_sha256:
        raise ExtractionError(
            f"{path}: checksum {got} does not match manifest "
            f"{manifest.checksum_sha256}"
        )
