import numpy as np
import pytest
from PIL import Image

pytest.importorskip("torch", reason="extractor tests need torch + torchvision")
pytest.importorskip("extract_features", reason="pip install -e extractor/ first")


def _write_images(d, n, seed, size=(32, 32)):
    rng = np.random.default_rng(seed)
    for i in range(n):
        arr = rng.integers(0, 255, size=(*size, 3), dtype=np.uint8)
        Image.fromarray(arr).save(d / f"img_{i:03d}.png")


@pytest.fixture(scope="session")
def flat_tree(tmp_path_factory):
    """Ten CIFAR-sized images in one folder, no class structure."""
    d = tmp_path_factory.mktemp("flat")
    _write_images(d, 10, seed=0)
    return d


@pytest.fixture(scope="session")
def classed_tree(tmp_path_factory):
    """Three class folders of four images each."""
    root = tmp_path_factory.mktemp("classed")
    for c, name in enumerate(("cat", "dog", "eel")):
        sub = root / name
        sub.mkdir()
        _write_images(sub, 4, seed=10 + c)
    return root


@pytest.fixture(scope="session")
def embedder():
    """Seeded random-weight model, shared across tests for speed."""
    import extract_features as xf

    return xf.Embedder(weights="none")
