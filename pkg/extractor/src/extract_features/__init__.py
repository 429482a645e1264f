"""Image dataset -> RGNF feature file via a frozen CNN's penultimate layer."""

__version__ = "0.1.0"

from .datasets import ImageSource, resolve
from .errors import ConfigError, ExtractionError, ModelUnavailableError
from .extract import extract, write_embeddings, write_label_csv
from .manifest import ExtractionManifest, sha256_of, verify_checksum
from .model import MODELS, PREPROCESSING, Embedder
from .rgnf import RgnfWriter, read_features, read_header

__all__ = [name for name in dir() if not name.startswith("_")]
