"""MNIST IDX files, read and written bit-exactly.

Layout (all header integers big-endian, unsigned 32-bit)::

    images:  magic 0x00000803 | count | rows | cols | count*rows*cols bytes
    labels:  magic 0x00000801 | count | count bytes

Files ending in ``.gz`` are transparently decompressed.
"""

from __future__ import annotations

import csv
import gzip
import logging
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from sla_lab.domain.data import Dataset
from sla_lab.domain.errors import ConsistencyError, FormatError

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

PathLike = Union[str, Path]


def _read(path: PathLike) -> bytes:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as f:
            return f.read()
    return path.read_bytes()


def _header(buf: bytes, fields: int, expected_magic: int, path: PathLike) -> Tuple[int, ...]:
    size = 4 * fields
    if len(buf) < size:
        raise FormatError(f"{path}: truncated header ({len(buf)} bytes, need {size})")
    values = struct.unpack_from(f">{fields}I", buf, 0)
    if values[0] != expected_magic:
        raise FormatError(
            f"{path}: bad magic {buf[:4].hex()} (expected {expected_magic:08x})"
        )
    return values


def decode_images(buf: bytes, path: PathLike = "<images>") -> np.ndarray:
    _, count, rows, cols = _header(buf, 4, IMAGES_MAGIC, path)
    expected = 16 + count * rows * cols
    if len(buf) != expected:
        raise FormatError(f"{path}: {len(buf)} bytes on disk, header promises {expected}")
    pixels = np.frombuffer(buf, dtype=np.uint8, offset=16)
    return pixels.reshape(count, rows, cols, 1)


def decode_labels(buf: bytes, path: PathLike = "<labels>") -> np.ndarray:
    _, count = _header(buf, 2, LABELS_MAGIC, path)
    expected = 8 + count
    if len(buf) != expected:
        raise FormatError(f"{path}: {len(buf)} bytes on disk, header promises {expected}")
    return np.frombuffer(buf, dtype=np.uint8, offset=8).astype(np.int64)


def load_mnist_idx(
    images_path: PathLike,
    labels_path: PathLike,
    *,
    name: str = "mnist",
    n_classes: int = 10,
) -> Dataset:
    """Decode a pair of IDX files; pixels are scaled by 1/255."""
    raw_images = decode_images(_read(images_path), images_path)
    labels = decode_labels(_read(labels_path), labels_path)
    if raw_images.shape[0] != labels.shape[0]:
        raise ConsistencyError(
            f"{images_path} holds {raw_images.shape[0]} images but {labels_path} holds {labels.shape[0]} labels"
        )
    logger.info(f"[data] loaded {name}: {raw_images.shape[0]} images of {raw_images.shape[1:]}")
    return Dataset(
        name=name,
        images=raw_images.astype(np.float64) / 255.0,
        labels=labels,
        n_classes=n_classes,
    )


def encode_idx(ds: Dataset) -> Tuple[bytes, bytes]:
    """Inverse of ``load_mnist_idx`` for single-channel datasets."""
    if ds.images.shape[-1] != 1:
        raise FormatError(f"IDX images are single-channel, {ds.name} has {ds.images.shape[-1]} channels")
    count, rows, cols, _ = ds.images.shape
    pixels = np.rint(ds.images * 255.0).clip(0, 255).astype(np.uint8)
    image_bytes = struct.pack(">4I", IMAGES_MAGIC, count, rows, cols) + pixels.tobytes()
    label_bytes = struct.pack(">2I", LABELS_MAGIC, count) + ds.labels.astype(np.uint8).tobytes()
    return image_bytes, label_bytes


def write_idx(ds: Dataset, images_path: PathLike, labels_path: PathLike) -> None:
    image_bytes, label_bytes = encode_idx(ds)
    for path, payload in ((Path(images_path), image_bytes), (Path(labels_path), label_bytes)):
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix == ".gz":
            with gzip.open(path, "wb") as f:
                f.write(payload)
        else:
            path.write_bytes(payload)


def export_csv(ds: Dataset, path: PathLike) -> Path:
    """Debug dump with header ``index,label``, one row per example."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["index", "label"])
        for k, label in enumerate(ds.labels.tolist()):
            writer.writerow([k, label])
    return path
