"""Datasets: synthetic classification blobs, non-IID partitioning, IDX files."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .rngstream import RngStream

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, d)
    labels: np.ndarray    # (n,) ints in [0, num_classes)
    name: str
    num_classes: int

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValueError("features must be a nonempty (n, d) matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must align with features")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise ValueError("labels out of range")

    def __len__(self) -> int:
        return self.features.shape[0]


def synth_classification(n: int, d: int, C: int, separation: float,
                         stream: RngStream, name: str = "synth") -> Dataset:
    """Gaussian class blobs with unit within-class deviation.

    Class means sit at distance ``separation`` from the origin along
    mutually orthogonal directions whenever C <= d (random directions
    otherwise), so the pairwise mean distance is separation * sqrt(2).
    separation = 0 collapses all classes onto one blob.
    """
    if C < 2:
        raise ValueError(f"need at least two classes, got {C}")
    if n < C or d < 1:
        raise ValueError("degenerate dataset dimensions")
    gen = stream.generator()
    raw = gen.standard_normal((C, d))
    if C <= d:
        q, _ = np.linalg.qr(raw.T)
        dirs = q[:, :C].T
    else:
        dirs = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    means = separation * dirs
    labels = gen.permutation(np.arange(n) % C)
    features = means[labels] + gen.standard_normal((n, d))
    return Dataset(features=features, labels=labels.astype(np.int64),
                   name=name, num_classes=C)


def partition_noniid(data: Dataset, K: int, labels_per_client: int,
                     stream: RngStream) -> list[Dataset]:
    """Split into K shards, each drawing from few distinct labels.

    Client k is assigned labels {(k * labels_per_client + j) mod C}, and
    every label's sample pool is split evenly among the clients holding it.
    The shards are pairwise disjoint and exhaust the dataset; sizes are
    exactly equal whenever the label pools divide evenly and differ by at
    most one per label otherwise.
    """
    if labels_per_client < 1:
        raise ValueError("labels_per_client must be >= 1")
    C = data.num_classes
    if K * labels_per_client < C:
        raise ValueError(
            f"infeasible assignment: {K} clients x {labels_per_client} labels "
            f"cannot cover {C} classes")
    gen = stream.generator()
    owners: list[list[int]] = [[] for _ in range(C)]
    for k in range(K):
        for j in range(labels_per_client):
            owners[(k * labels_per_client + j) % C].append(k)
    shard_idx: list[list[np.ndarray]] = [[] for _ in range(K)]
    for label in range(C):
        pool = np.flatnonzero(data.labels == label)
        if pool.size < len(owners[label]):
            raise ValueError(f"label {label} has too few samples to split")
        pool = gen.permutation(pool)
        for k, chunk in zip(owners[label], np.array_split(pool, len(owners[label]))):
            shard_idx[k].append(chunk)
    shards = []
    for k in range(K):
        idx = np.sort(np.concatenate(shard_idx[k]))
        shards.append(Dataset(features=data.features[idx],
                              labels=data.labels[idx],
                              name=f"{data.name}/client{k}",
                              num_classes=C))
    return shards


def _read_idx(path: str, expected_magic: int) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(4)
        if len(head) < 4:
            raise ValueError(f"{path}: truncated IDX header")
        magic = struct.unpack(">I", head)[0]
        if magic != expected_magic:
            raise ValueError(f"{path}: bad IDX magic 0x{magic:08x}, "
                             f"expected 0x{expected_magic:08x}")
        ndim = magic & 0xFF
        dims = struct.unpack(f">{ndim}I", fh.read(4 * ndim))
        data = np.frombuffer(fh.read(), dtype=np.uint8)
    if data.size != int(np.prod(dims)):
        raise ValueError(f"{path}: expected {int(np.prod(dims))} bytes, "
                         f"got {data.size}")
    return data.reshape(dims)


def load_idx(images_path: str, labels_path: str | None = None,
             name: str = "idx") -> Dataset:
    """Load an IDX image/label file pair (standard MNIST layout).

    ``labels_path`` defaults to the conventional sibling name
    (images -> labels, idx3 -> idx1).  Pixels are scaled to [0, 1].
    """
    if labels_path is None:
        base = os.path.basename(images_path)
        guess = base.replace("images", "labels").replace("idx3", "idx1")
        if guess == base:
            raise ValueError(
                f"cannot infer labels file for {images_path!r}; pass labels_path")
        labels_path = os.path.join(os.path.dirname(images_path), guess)
    for p in (images_path, labels_path):
        if not os.path.exists(p):
            raise FileNotFoundError(f"expected IDX file {p!r}")
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise ValueError(f"image/label count mismatch: {images.shape[0]} vs "
                         f"{labels.shape[0]}")
    feats = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    labels = labels.astype(np.int64)
    return Dataset(features=feats, labels=labels, name=name,
                   num_classes=int(labels.max()) + 1)
