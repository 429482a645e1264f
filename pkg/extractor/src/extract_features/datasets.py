"""Image sources with a fixed canonical order.

Two forms are accepted:

- a directory: class subfolders (sorted name -> class id) or a flat
  folder of images; either way the canonical order is the sorted
  relative path, so rerunning over the same tree reproduces the same
  row order;
- a registered name, currently ``cifar10-train:<root>`` and
  ``cifar10-test:<root>``, which reads the standard pickled CIFAR-10
  batches already on disk (never downloads) in their native index
  order. That order is what the public relabeling sets are aligned to.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ExtractionError

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tiff", ".webp"}


@dataclass
class ImageSource:
    """Ordered image collection; labels only when the source defines them."""

    name: str
    n: int
    labels: np.ndarray | None
    classes: list | None
    _get: callable

    def image(self, index: int) -> Image.Image:
        """Decoded RGB image at canonical position ``index``."""
        try:
            img = self._get(index)
            return img.convert("RGB")
        except ExtractionError:
            raise
        except Exception as e:
            raise ExtractionError(f"cannot decode image at index {index}: {e}")


def _from_directory(root: Path) -> ImageSource:
    subdirs = sorted(p for p in root.iterdir() if p.is_dir())
    classed = [d for d in subdirs if any(
        f.suffix.lower() in IMAGE_SUFFIXES for f in d.iterdir() if f.is_file()
    )]
    if classed:
        classes = [d.name for d in classed]
        files, labels = [], []
        for ci, d in enumerate(classed):
            for f in sorted(p for p in d.iterdir()
                            if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES):
                files.append(f)
                labels.append(ci)
        order = np.argsort([str(f.relative_to(root)) for f in files], kind="stable")
        files = [files[i] for i in order]
        labels = np.asarray(labels, dtype=np.int64)[order]
    else:
        files = sorted(p for p in root.iterdir()
                       if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
        labels, classes = None, None
    if not files:
        raise ExtractionError(f"no images under {root}")

    def get(i, _files=files):
        with Image.open(_files[i]) as img:
            img.load()
            return img

    return ImageSource(name=str(root), n=len(files), labels=labels,
                       classes=classes, _get=get)


def _from_cifar10(root: str, train: bool) -> ImageSource:
    from torchvision.datasets import CIFAR10

    split = "train" if train else "test"
    try:
        ds = CIFAR10(root=root, train=train, download=False)
    except RuntimeError as e:
        raise ExtractionError(
            f"CIFAR-10 batches not found under {root!r} ({e}); download "
            "cifar-10-python.tar.gz from https://www.cs.toronto.edu/~kriz/cifar.html "
            "and unpack it there"
        )

    def get(i, _ds=ds):
        return _ds[i][0]

    return ImageSource(
        name=f"cifar10-{split}:{root}", n=len(ds),
        labels=np.asarray(ds.targets, dtype=np.int64),
        classes=list(ds.classes), _get=get,
    )


def resolve(dataset: str) -> ImageSource:
    """Directory path or registered ``name:root`` string -> ImageSource."""
    p = Path(dataset)
    if p.is_dir():
        return _from_directory(p)
    name, sep, root = dataset.partition(":")
    if name in ("cifar10-train", "cifar10-test"):
        if not sep:
            raise ExtractionError(
                f"{name} needs a data root, e.g. {name}:/data/cifar10"
            )
        return _from_cifar10(root, train=name.endswith("train"))
    raise ExtractionError(
        f"dataset {dataset!r} is neither a directory nor a known name "
        "(cifar10-train:<root>, cifar10-test:<root>)"
    )
