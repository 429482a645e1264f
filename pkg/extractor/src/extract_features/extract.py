"""Core pipeline: ordered images -> embeddings -> RGNF + manifest."""

from .datasets import ImageSource, resolve
from .manifest import ExtractionManifest, sha256_of
from .model import PREPROCESSING, Embedder
from .rgnf import RgnfWriter


def extract(dataset: str, out_path, manifest_path=None, model: str = "resnet34",
            weights: str = "pretrained", batch: int = 256) -> ExtractionManifest:
    """Embed every image of ``dataset`` into ``out_path``, in canonical order.

    Returns the manifest; also writes it as JSON when ``manifest_path``
    is given. The decode of each image happens right before its batch
    runs, so a corrupted file fails with its canonical index named.
    """
    source = resolve(dataset)
    embedder = Embedder(model=model, weights=weights)
    write_embeddings(source, embedder, out_path, batch=batch)
    manifest = ExtractionManifest(
        dataset=source.name,
        model=embedder.model_id,
        weights=embedder.weights_id,
        layer=embedder.layer,
        n_samples=source.n,
        dim=embedder.dim,
        checksum_sha256=sha256_of(out_path),
        preprocessing=dict(PREPROCESSING),
    )
    if manifest_path is not None:
        manifest.to_json(manifest_path)
    return manifest


def write_embeddings(source: ImageSource, embedder: Embedder, out_path,
                     batch: int = 256) -> None:
    if batch <= 0:
        batch = 1
    with RgnfWriter(out_path, source.n, embedder.dim) as w:
        for start in range(0, source.n, batch):
            stop = min(start + batch, source.n)
            images = [source.image(i) for i in range(start, stop)]
            w.append(embedder.embed(images))


def write_label_csv(source: ImageSource, path) -> None:
    """``index,label`` rows in canonical order, for classed sources."""
    if source.labels is None:
        raise ValueError(f"{source.name} does not define labels")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("index,label\n")
        for i, y in enumerate(source.labels):
            f.write(f"{i},{int(y)}\n")
