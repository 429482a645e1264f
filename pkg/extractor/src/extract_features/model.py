"""Penultimate-layer embedder: resnet34 -> 512-d global-average-pool.

Inference only: eval mode, no gradients, no augmentation. Preprocessing
is pinned (224x224 bilinear resize with anti-aliasing, ImageNet
normalization) so the same images give the same features everywhere;
the exact constants are echoed into the manifest.
"""

from pathlib import Path

import numpy as np
import torch
from torchvision import models, transforms
from torchvision.transforms import InterpolationMode

from .errors import ConfigError, ModelUnavailableError

MODELS = {"resnet34": (models.resnet34, 512)}

PREPROCESSING = {
    "resize": [224, 224],
    "interpolation": "bilinear",
    "antialias": True,
    "mean": [0.485, 0.456, 0.406],
    "std": [0.229, 0.224, 0.225],
}

_TRANSFORM = transforms.Compose([
    transforms.Resize(tuple(PREPROCESSING["resize"]),
                      interpolation=InterpolationMode.BILINEAR, antialias=True),
    transforms.ToTensor(),
    transforms.Normalize(mean=PREPROCESSING["mean"], std=PREPROCESSING["std"]),
])


class Embedder:
    """Frozen CNN mapping PIL images to penultimate-layer activations."""

    def __init__(self, model: str = "resnet34", weights: str = "pretrained"):
        if model not in MODELS:
            raise ConfigError(f"unknown model {model!r}; available: {sorted(MODELS)}")
        ctor, dim = MODELS[model]
        self.model_id = model
        self.weights_id = weights
        self.dim = dim
        self.layer = "avgpool"
        torch.manual_seed(0)  # pins the init when weights are random
        if weights == "pretrained":
            try:
                net = ctor(weights="IMAGENET1K_V1")
            except Exception as e:
                raise ModelUnavailableError(
                    f"pretrained {model} weights are not available ({e}); either "
                    "download them on a connected machine with "
                    f"`python -c \"import torchvision; torchvision.models.{model}"
                    "(weights='IMAGENET1K_V1')\"` and copy ~/.cache/torch/hub/"
                    "checkpoints/ over, or pass --weights <state_dict.pth> / "
                    "--weights none"
                )
        elif weights == "none":
            net = ctor(weights=None)
        else:
            net = ctor(weights=None)
            path = Path(weights)
            if not path.is_file():
                raise ModelUnavailableError(f"weights file not found: {path}")
            state = torch.load(path, map_location="cpu", weights_only=True)
            net.load_state_dict(state)
        net.fc = torch.nn.Identity()  # keep the 512-d pooled vector
        net.eval()
        self.net = net

    @torch.no_grad()
    def embed(self, images) -> np.ndarray:
        """(B, dim) float32 for a list of PIL RGB images."""
        batch = torch.stack([_TRANSFORM(img) for img in images])
        out = self.net(batch)
        return out.cpu().numpy().astype(np.float32)
