"""Dataset generation, CSV ingestion, undersampling, and the non-i.i.d.
two-class shard split that turns one labeled dataset into federated clients.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataError, ParseError, SchemaError, ShardError
from .rng import derive_rng


@dataclass
class LabeledDataset:
    """Feature matrix with integer class labels."""

    features: np.ndarray
    labels: np.ndarray
    class_names: list[str] | None = None

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must align with feature rows")
        if self.features.shape[0] == 0:
            raise EmptyDataError("dataset has no rows")
        if self.labels.size and self.labels.min() < 0:
            raise ValueError("labels must be non-negative")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite entries")

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def num_classes(self) -> int:
        if self.class_names is not None:
            return len(self.class_names)
        return int(self.labels.max()) + 1

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)


@dataclass
class ClientDataset:
    """One client's private data, pre-split into train and test."""

    client_id: int
    train: LabeledDataset
    test: LabeledDataset
    classes_present: frozenset[int] = field(default_factory=frozenset)


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian-blob benchmark generator settings."""

    num_classes: int
    input_dim: int
    per_class_count: int
    class_separation: float
    noise_sigma: float
    seed: int

    def __post_init__(self) -> None:
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if self.per_class_count < 1:
            raise ValueError("per_class_count must be positive")
        if self.class_separation <= 0 or self.noise_sigma <= 0:
            raise ValueError("class_separation and noise_sigma must be positive")


def _spread_directions(num_classes: int, input_dim: int, gen: np.random.Generator) -> np.ndarray:
    """Rows are unit direction vectors, orthonormal whenever dim allows."""
    g = gen.standard_normal((num_classes, input_dim))
    if num_classes <= input_dim:
        q, _ = np.linalg.qr(g.T)
        return q.T[:num_classes]
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def generate_synthetic(spec: SyntheticSpec) -> LabeledDataset:
    """Isotropic Gaussian blobs, class c centered at separation * u_c.

    Rows are ordered by class. Deterministic per spec.seed.
    """
    gen = derive_rng(spec.seed)
    dirs = _spread_directions(spec.num_classes, spec.input_dim, gen)
    feats = []
    labels = []
    for c in range(spec.num_classes):
        center = spec.class_separation * dirs[c]
        noise = gen.standard_normal((spec.per_class_count, spec.input_dim))
        feats.append(center + spec.noise_sigma * noise)
        labels.append(np.full(spec.per_class_count, c, dtype=np.int64))
    return LabeledDataset(np.vstack(feats), np.concatenate(labels))


def undersample(data: LabeledDataset, cap: int, seed: int) -> LabeledDataset:
    """Keep at most cap rows per class, sampled without replacement.

    Row order within each class (and globally) is preserved. Classes at or
    below the cap are untouched and consume no randomness.
    """
    if cap < 1:
        raise ValueError(f"cap must be positive, got {cap}")
    gen = derive_rng(seed)
    kept = []
    for c in range(data.num_classes):
        rows = np.flatnonzero(data.labels == c)
        if rows.size > cap:
            sel = gen.choice(rows.size, size=cap, replace=False)
            rows = rows[np.sort(sel)]
        kept.append(rows)
    idx = np.sort(np.concatenate(kept))
    return data.subset(idx)


def shard_split(
    data: LabeledDataset,
    shard_size: int,
    train_fraction: float,
    seed: int,
) -> list[ClientDataset]:
    """Cut each class into fixed-size shards and pair shards across classes.

    Each class's rows are shuffled and cut into floor(count / shard_size)
    disjoint shards; remainder rows are dropped. Clients are formed by
    repeatedly drawing one pair of different-class shards uniformly from all
    remaining cross-class pairs, until no such pair exists. Every client
    therefore holds exactly two classes and 2 * shard_size rows, split
    per shard into train/test at train_fraction (test rows per shard =
    round(shard_size * (1 - train_fraction))).
    """
    if shard_size < 1:
        raise ValueError(f"shard_size must be positive, got {shard_size}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_test = int(round(shard_size * (1.0 - train_fraction)))
    if n_test < 1 or n_test >= shard_size:
        raise ShardError(
            f"train_fraction {train_fraction} leaves no usable train/test split "
            f"for shard_size {shard_size}"
        )
    gen = derive_rng(seed)

    shard_class: list[int] = []
    shard_rows: list[np.ndarray] = []
    for c in range(data.num_classes):
        rows = np.flatnonzero(data.labels == c)
        if rows.size < shard_size:
            raise ShardError(
                f"class {c} has {rows.size} rows, needs at least {shard_size}"
            )
        perm = rows[gen.permutation(rows.size)]
        for k in range(rows.size // shard_size):
            shard_class.append(c)
            shard_rows.append(perm[k * shard_size : (k + 1) * shard_size])

    alive = list(range(len(shard_class)))
    clients: list[ClientDataset] = []
    while True:
        pairs = [
            (i, j)
            for pos, i in enumerate(alive)
            for j in alive[pos + 1 :]
            if shard_class[i] != shard_class[j]
        ]
        if not pairs:
            break
        i, j = pairs[int(gen.integers(len(pairs)))]
        alive.remove(i)
        alive.remove(j)
        train_idx = []
        test_idx = []
        for s in (i, j):
            perm = gen.permutation(shard_size)
            test_idx.append(shard_rows[s][perm[:n_test]])
            train_idx.append(shard_rows[s][perm[n_test:]])
        clients.append(
            ClientDataset(
                client_id=len(clients),
                train=data.subset(np.concatenate(train_idx)),
                test=data.subset(np.concatenate(test_idx)),
                classes_present=frozenset((shard_class[i], shard_class[j])),
            )
        )
    return clients


def load_csv(
    path,
    label_column: str = "label",
    feature_columns: list[str] | None = None,
) -> LabeledDataset:
    """Read a labeled dataset from a headered CSV file.

    Labels map to contiguous class indices by sorted distinct value; the
    original values are kept as class_names. Feature columns default to
    every non-label column in header order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataError(f"{path}: file is empty") from None
        rows = list(reader)
    if not rows:
        raise EmptyDataError(f"{path}: no data rows after the header")
    if label_column not in header:
        raise SchemaError(f"{path}: missing label column {label_column!r}")
    if feature_columns is None:
        feature_columns = [h for h in header if h != label_column]
        if not feature_columns:
            raise SchemaError(f"{path}: no feature columns besides {label_column!r}")
    for col in feature_columns:
        if col not in header:
            raise SchemaError(f"{path}: missing feature column {col!r}")
    col_idx = [header.index(c) for c in feature_columns]
    label_idx = header.index(label_column)

    feats = np.empty((len(rows), len(feature_columns)), dtype=np.float64)
    raw_labels: list[str] = []
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: row {r + 2} has {len(row)} cells, expected {len(header)}"
            )
        for k, ci in enumerate(col_idx):
            cell = row[ci]
            try:
                feats[r, k] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: row {r + 2}, column {feature_columns[k]!r}: "
                    f"{cell!r} is not numeric"
                ) from None
        raw_labels.append(row[label_idx])

    names = sorted(set(raw_labels))
    index = {name: i for i, name in enumerate(names)}
    labels = np.array([index[v] for v in raw_labels], dtype=np.int64)
    return LabeledDataset(feats, labels, class_names=names)


def save_csv(data: LabeledDataset, path, label_column: str = "label") -> None:
    """Write a dataset as CSV; floats use round-trip repr formatting."""
    names = data.class_names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(data.input_dim)] + [label_column])
        for row, lab in zip(data.features, data.labels):
            label = names[lab] if names is not None else str(int(lab))
            writer.writerow([repr(float(v)) for v in row] + [label])
