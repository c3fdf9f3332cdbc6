"""Segment-level preprocessing: normalization, stratified split, oversampling."""
from __future__ import annotations

import csv
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aami import AamiClass
from .errors import ClassTooSmall, EmptyClassWarning
from .records import Segment


@dataclass
class Dataset:
    segments: list[Segment] = field(default_factory=list)

    @property
    def class_counts(self) -> dict[AamiClass, int]:
        return dict(Counter(seg.label for seg in self.segments))

    def __len__(self) -> int:
        return len(self.segments)


def zscore(segment: Segment) -> Segment:
    """Standardize each channel independently to zero mean, unit variance.

    Uses the population standard deviation (divide by n). A channel with
    zero variance maps to all zeros instead of dividing by zero.
    """
    data = np.asarray(segment.data, dtype=np.float64)
    if data.shape[1] < 2:
        raise ValueError("each channel needs at least 2 samples")
    mean = data.mean(axis=1, keepdims=True)
    std = data.std(axis=1, keepdims=True)   # population (1/n)
    out = np.zeros_like(data)
    live = std[:, 0] > 0
    out[live] = (data[live] - mean[live]) / std[live]
    return Segment(data=out, label=segment.label, source=segment.source,
                   symbol=segment.symbol)


def split_train_test(dataset: Dataset, train_fraction: float = 0.8,
                     seed: int = 0) -> tuple[Dataset, Dataset]:
    """Stratified split: per class, floor(train_fraction * n) segments go to
    the training set after a seeded shuffle; the remainder go to test.

    Classes absent from the dataset trigger an EmptyClassWarning but do not
    abort. Deterministic for a fixed seed.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    counts = dataset.class_counts
    for cls in AamiClass:
        if counts.get(cls, 0) == 0:
            warnings.warn(f"class {cls.letter} has 0 segments", EmptyClassWarning,
                          stacklevel=2)
    train: list[Segment] = []
    test: list[Segment] = []
    for cls in AamiClass:
        indices = [i for i, seg in enumerate(dataset.segments) if seg.label == cls]
        if not indices:
            continue
        rng = np.random.default_rng([seed, int(cls)])
        order = rng.permutation(len(indices))
        n_train = int(np.floor(train_fraction * len(indices)))
        for pos in order[:n_train]:
            train.append(dataset.segments[indices[pos]])
        for pos in order[n_train:]:
            test.append(dataset.segments[indices[pos]])
    return Dataset(train), Dataset(test)


def _nearest_neighbors(flat: np.ndarray, k: int) -> np.ndarray:
    """Index matrix of the k nearest same-class rows under Euclidean distance."""
    d2 = np.sum((flat[:, None, :] - flat[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def _synthesize_class(members: list[Segment], deficit: int, k: int,
                      rng: np.random.Generator) -> tuple[list[Segment], list[tuple[int, int, float]]]:
    """Create `deficit` convex interpolations between class members and their
    nearest neighbors. Returns the new segments and, for each, the
    (base index, neighbor index, interpolation weight) that produced it."""
    flat = np.stack([seg.data.reshape(-1) for seg in members])
    k_eff = min(k, len(members) - 1)
    nn = _nearest_neighbors(flat, k_eff)
    shape = members[0].data.shape
    cls = members[0].label

    out: list[Segment] = []
    provenance: list[tuple[int, int, float]] = []
    base_ids = rng.integers(0, len(members), size=deficit)
    nbr_slots = rng.integers(0, k_eff, size=deficit)
    weights = rng.random(deficit)
    for i in range(deficit):
        base = int(base_ids[i])
        nbr = int(nn[base, nbr_slots[i]])
        u = float(weights[i])
        data = flat[base] + u * (flat[nbr] - flat[base])
        out.append(Segment(data=data.reshape(shape), label=cls,
                           source=(f"smote:{cls.letter}", len(members) + i)))
        provenance.append((base, nbr, u))
    return out, provenance


def smote(train: Dataset, k_neighbors: int = 5, seed: int = 0) -> Dataset:
    """Oversample every minority class up to the majority class count.

    Synthetic segments are convex combinations x + u*(x_nn - x) of a random
    class member and one of its k nearest neighbors (Euclidean distance on
    the flattened window, both channels jointly). Original segments are
    never mutated; each class consumes its own seeded random stream, so the
    result is deterministic and per-class parallelizable.
    """
    counts = train.class_counts
    if not counts:
        return Dataset([])
    majority = max(counts.values())
    result = list(train.segments)
    for cls in AamiClass:
        n = counts.get(cls, 0)
        if n == 0 or n == majority:
            continue
        if n < 2:
            raise ClassTooSmall(
                f"class {cls.letter} has {n} segment(s); need >= 2 to oversample"
            )
        members = [seg for seg in train.segments if seg.label == cls]
        rng = np.random.default_rng([seed, int(cls)])
        synthetic, _ = _synthesize_class(members, majority - n, k_neighbors, rng)
        result.extend(synthetic)
    return Dataset(result)


# --- dataset manifest ------------------------------------------------------

MANIFEST_FIELDS = ("record_name", "center_index", "symbol", "aami_class", "split")


def write_manifest(path: str | Path, rows: list[dict]) -> None:
    """Write the bookkeeping CSV: record_name,center_index,symbol,aami_class,split."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_manifest(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
