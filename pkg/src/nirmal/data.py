"""IDX file reading/writing (the MNIST distribution format) and class-balanced subsets.

IDX layout: two zero bytes, an element-type byte (only ``0x08``, unsigned
byte, is supported), a byte giving the number of dimensions, then one
big-endian uint32 per dimension, then the row-major payload.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

IMAGES_MAGIC = 0x00000803  # 2051
LABELS_MAGIC = 0x00000801  # 2049

PathLike = Union[str, os.PathLike]

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


class IdxFormatError(ValueError):
    """Malformed IDX header (wrong magic, unsupported type)."""


class IdxLengthError(IdxFormatError):
    """Payload size does not match the header dimensions."""


@dataclass(frozen=True)
class IdxHeader:
    magic: int
    dims: Tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))


def parse_idx(buf: bytes, expected_magic: Optional[int] = None) -> Tuple[IdxHeader, np.ndarray]:
    """Decode an in-memory IDX blob into its header and a uint8 array."""
    if len(buf) < 4:
        raise IdxLengthError(f"IDX data too short for a header ({len(buf)} bytes)")
    (magic,) = struct.unpack(">I", buf[:4])
    if expected_magic is not None and magic != expected_magic:
        raise IdxFormatError(
            f"bad IDX magic: expected {expected_magic} (0x{expected_magic:08x}), "
            f"got {magic} (0x{magic:08x})"
        )
    if magic >> 16 != 0:
        raise IdxFormatError(f"bad IDX magic 0x{magic:08x}: leading bytes must be zero")
    dtype_code, ndim = (magic >> 8) & 0xFF, magic & 0xFF
    if dtype_code != 0x08:
        raise IdxFormatError(f"unsupported IDX element type 0x{dtype_code:02x} (only 0x08 u8)")
    offset = 4 + 4 * ndim
    if len(buf) < offset:
        raise IdxLengthError(f"IDX header declares {ndim} dims but data ends at {len(buf)} bytes")
    dims = struct.unpack(f">{ndim}I", buf[4:offset])
    header = IdxHeader(magic, tuple(dims))
    payload = len(buf) - offset
    if payload != header.size:
        raise IdxLengthError(
            f"IDX payload has {payload} bytes, header dims {header.dims} require {header.size}"
        )
    data = np.frombuffer(buf, dtype=np.uint8, offset=offset).reshape(header.dims)
    return header, data.copy()


def _read(path: PathLike, magic: int) -> np.ndarray:
    path = Path(path)
    try:
        buf = path.read_bytes()
    except FileNotFoundError:
        raise FileNotFoundError(f"IDX file not found: {path}") from None
    try:
        return parse_idx(buf, magic)[1]
    except IdxFormatError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def load_idx_images(path: PathLike) -> np.ndarray:
    """Read an image file (magic 2051) into an ``(n, rows, cols)`` uint8 array."""
    arr = _read(path, IMAGES_MAGIC)
    return arr


def load_idx_labels(path: PathLike) -> np.ndarray:
    """Read a label file (magic 2049) into an ``(n,)`` uint8 array."""
    return _read(path, LABELS_MAGIC)


def encode_idx(arr) -> bytes:
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255 or not np.all(arr == np.round(arr))):
            raise ValueError("IDX u8 payload must hold integers in [0, 255]")
        arr = arr.astype(np.uint8)
    if not 1 <= arr.ndim <= 255:
        raise ValueError(f"cannot encode a {arr.ndim}-d array as IDX")
    head = struct.pack(">I", (0x08 << 8) | arr.ndim) + struct.pack(f">{arr.ndim}I", *arr.shape)
    return head + np.ascontiguousarray(arr).tobytes()


def write_idx(path: PathLike, arr) -> None:
    Path(path).write_bytes(encode_idx(arr))


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n x d, float64) with integer labels in ``[0, n_classes)``."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if x.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {x.shape}")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError(f"labels shape {y.shape} does not match {x.shape[0]} samples")
        if x.shape[0] < 1:
            raise ValueError("dataset must hold at least one sample")
        if not np.issubdtype(y.dtype, np.integer):
            raise ValueError(f"labels must be integers, got {y.dtype}")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y.astype(np.int64))

    def __len__(self):
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(self.features[indices], self.labels[indices], self.n_classes)

    @classmethod
    def from_idx_arrays(cls, images: np.ndarray, labels: np.ndarray, n_classes: int = 10) -> "Dataset":
        """Flatten images and scale bytes to [0, 1] by dividing by 255."""
        images = np.asarray(images)
        feats = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
        return cls(feats, np.asarray(labels).astype(np.int64), n_classes)

    def to_idx_arrays(self, image_shape: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Inverse of :meth:`from_idx_arrays`; features must be multiples of 1/255."""
        raw = np.rint(self.features * 255.0)
        if raw.min() < 0 or raw.max() > 255:
            raise ValueError("features outside [0, 1] cannot be written as IDX bytes")
        images = raw.astype(np.uint8).reshape((len(self),) + tuple(image_shape))
        return images, self.labels.astype(np.uint8)


def load_dataset(images_path: PathLike, labels_path: PathLike, n_classes: int = 10) -> Dataset:
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise ValueError(
            f"{images_path} holds {images.shape[0]} images but {labels_path} holds {labels.shape[0]} labels"
        )
    return Dataset.from_idx_arrays(images, labels, n_classes)


def mnist_paths(data_dir: PathLike, split: str) -> Tuple[Path, Path]:
    images, labels = MNIST_FILES[split]
    return Path(data_dir) / images, Path(data_dir) / labels


def mnist_available(data_dir: Optional[PathLike]) -> bool:
    if data_dir is None:
        return False
    return all(p.is_file() for split in MNIST_FILES for p in mnist_paths(data_dir, split))


def load_mnist(data_dir: PathLike, split: str = "train") -> Dataset:
    """Load the uncompressed MNIST/FashionMNIST ``split`` ("train" or "test") from ``data_dir``.

    Files are not downloaded; a missing file raises ``FileNotFoundError``
    with the expected path and the standard file names.
    """
    images, labels = mnist_paths(data_dir, split)
    for p in (images, labels):
        if not p.is_file():
            raise FileNotFoundError(
                f"missing {p}; download and gunzip the MNIST IDX files "
                f"({', '.join(n for pair in MNIST_FILES.values() for n in pair)}) into {Path(data_dir)}"
            )
    return load_dataset(images, labels)


def subset_indices(labels, n_classes: int, n_per_class: int, seed: int, exclude=None) -> np.ndarray:
    """Class-balanced random indices, sorted by class then draw order.

    ``exclude`` removes indices from the candidate pool, which is how
    disjoint train/test subsets are cut from one file.
    """
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    mask = np.ones(labels.shape[0], dtype=bool)
    if exclude is not None:
        mask[np.asarray(exclude, dtype=np.int64)] = False
    picked = []
    for k in range(n_classes):
        pool = np.flatnonzero((labels == k) & mask)
        if pool.shape[0] < n_per_class:
            raise ValueError(
                f"class {k} has only {pool.shape[0]} samples available, {n_per_class} requested"
            )
        picked.append(rng.choice(pool, size=n_per_class, replace=False))
    return np.concatenate(picked)


def subset(dataset: Dataset, n_per_class: int, seed: int, exclude=None) -> Dataset:
    """Deterministic class-balanced subset with ``n_per_class`` samples of every class."""
    idx = subset_indices(dataset.labels, dataset.n_classes, n_per_class, seed, exclude)
    return dataset.take(idx)
