"""Writer for the RGNF binary feature format (v1).

Layout, all little-endian: magic ``RGNF`` (4 bytes), u32 format
version, u64 row count, u32 dimension, then n_samples * dim float32
values in row-major order. 20-byte header, no footer, no padding.
"""

import struct

import numpy as np

from .errors import ExtractionError

MAGIC = b"RGNF"
VERSION = 1
_HEADER = struct.Struct("<4sIQI")


class RgnfWriter:
    """Incremental row-major writer; the row count is fixed up front."""

    def __init__(self, path, n_samples: int, dim: int):
        if n_samples < 0 or dim <= 0:
            raise ExtractionError(f"bad feature shape ({n_samples}, {dim})")
        self.path = path
        self.n_samples = n_samples
        self.dim = dim
        self._written = 0
        self._f = open(path, "wb")
        self._f.write(_HEADER.pack(MAGIC, VERSION, n_samples, dim))

    def append(self, rows) -> None:
        arr = np.ascontiguousarray(rows, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise ExtractionError(
                f"batch shape {arr.shape} does not match dim {self.dim}"
            )
        if not np.isfinite(arr).all():
            raise ExtractionError("non-finite feature values in batch")
        if self._written + arr.shape[0] > self.n_samples:
            raise ExtractionError("more rows appended than declared in the header")
        self._f.write(arr.tobytes(order="C"))
        self._written += arr.shape[0]

    def close(self) -> None:
        if self._f.closed:
            return
        try:
            if self._written != self.n_samples:
                raise ExtractionError(
                    f"wrote {self._written} rows, header declares {self.n_samples}"
                )
        finally:
            self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self._f.close()


def read_header(path) -> tuple:
    """(n_samples, dim) from a v1 file; validates magic and length."""
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ExtractionError(f"{path}: truncated header")
        magic, version, n, d = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ExtractionError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ExtractionError(f"{path}: unsupported format version {version}")
        f.seek(0, 2)
        body = f.tell() - _HEADER.size
    if body != n * d * 4:
        raise ExtractionError(
            f"{path}: payload is {body} bytes, header implies {n * d * 4}"
        )
    return int(n), int(d)


def read_features(path) -> np.ndarray:
    n, d = read_header(path)
    with open(path, "rb") as f:
        f.seek(_HEADER.size)
        data = np.fromfile(f, dtype="<f4", count=n * d)
    return data.reshape(n, d)
