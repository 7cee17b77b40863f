"""Binary-feature dataset ingestion, stratified splitting, and tree-based
feature ranking.

CSV contract: UTF-8, comma separated, header row, one sample per row, cells
in {0, 1, true, false} (case-insensitive), label column named by the caller
(default ``label``).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DegenerateDataset,
    DimensionMismatch,
    DuplicateFeatureName,
    DuplicateIndex,
    EmptyDataset,
    IndexOutOfRange,
    InsufficientClassSamples,
    MissingLabelColumn,
    NonBinaryValue,
    RaggedRow,
)

_TRUTHY = {"1": 1, "true": 1, "0": 0, "false": 0}


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered, unique feature names; position defines the feature index."""

    names: tuple
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        index = {}
        for i, name in enumerate(self.names):
            if not name:
                raise DuplicateFeatureName("(empty)")
            if name in index:
                raise DuplicateFeatureName(name)
            index[name] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.names)

    def has(self, name: str) -> bool:
        return name in self._index

    def index_of(self, name: str) -> int:
        return self._index[name]


@dataclass(frozen=True)
class BinaryDataset:
    schema: FeatureSchema
    features: np.ndarray  # bool [N, d]
    labels: np.ndarray  # int8 [N], values in {0, 1}

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.bool_)
        labs = np.asarray(self.labels, dtype=np.int8)
        if feats.ndim != 2 or feats.shape[1] != len(self.schema):
            raise DimensionMismatch(len(self.schema), feats.shape)
        if feats.shape[0] == 0:
            raise EmptyDataset("dataset has no rows")
        if labs.shape != (feats.shape[0],):
            raise DimensionMismatch(feats.shape[0], labs.shape)
        if not np.all((labs == 0) | (labs == 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class DataSplit:
    """Disjoint train/val/test index lists into one BinaryDataset."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.size == 0:
                raise ValueError(f"{name} partition is empty")
            object.__setattr__(self, name, arr)
        combined = np.concatenate([self.train, self.val, self.test])
        if len(np.unique(combined)) != combined.size:
            raise ValueError("split partitions overlap")


def load_csv(path, label_column: str = "label") -> BinaryDataset:
    """Parse a binary-feature CSV; see the module docstring for the format."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingLabelColumn(label_column, header)
        label_idx = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_idx]

        rows = []
        labels = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise RaggedRow(line_no, len(header), len(row))
            values = []
            for col_idx, token in enumerate(row):
                parsed = _TRUTHY.get(token.strip().lower())
                if parsed is None:
                    raise NonBinaryValue(line_no, header[col_idx], token)
                values.append(parsed)
            labels.append(values.pop(label_idx))
            rows.append(values)

    if not rows:
        raise EmptyDataset(f"{path} has a header but no data rows")
    return BinaryDataset(
        schema=FeatureSchema(tuple(names)),
        features=np.array(rows, dtype=np.bool_),
        labels=np.array(labels, dtype=np.int8),
    )


def save_csv(dataset: BinaryDataset, path, label_column: str = "label") -> None:
    """Write the dataset back out; load_csv of the result is the identity."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.schema.names) + [label_column])
        feats = dataset.features.astype(np.int8)
        for i in range(dataset.n):
            writer.writerow(list(feats[i]) + [int(dataset.labels[i])])


def split(dataset: BinaryDataset, fractions, seed: int) -> DataSplit:
    """Stratified, seed-deterministic train/val/test partition.

    Per-class allocation uses largest-remainder rounding of the requested
    fractions. If a partition ends up globally empty (possible for tiny
    classes), one sample is moved from the largest partition.
    """
    train_f, val_f, test_f = fractions
    for frac in (train_f, val_f, test_f):
        if not (0.0 < frac < 1.0):
            raise ValueError(f"fractions must lie in (0,1), got {fractions}")
    if abs(train_f + val_f + test_f - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions}")

    rng = np.random.default_rng(seed)
    parts = [[], [], []]
    for label in (0, 1):
        members = np.flatnonzero(dataset.labels == label)
        if members.size < 3:
            raise InsufficientClassSamples(label, int(members.size), 3)
        members = rng.permutation(members)
        counts = _largest_remainder(members.size, (train_f, val_f, test_f))
        start = 0
        for p, count in enumerate(counts):
            parts[p].extend(members[start : start + count].tolist())
            start += count

    # rebalance: every partition must be non-empty
    while any(len(p) == 0 for p in parts):
        donor = max(range(3), key=lambda p: len(parts[p]))
        taker = next(p for p in range(3) if len(parts[p]) == 0)
        parts[taker].append(parts[donor].pop())

    train, val, test = (np.sort(np.array(p, dtype=np.int64)) for p in parts)
    return DataSplit(train=train, val=val, test=test)


def _largest_remainder(total: int, fractions) -> list:
    quotas = [total * f for f in fractions]
    base = [int(q) for q in quotas]
    leftover = total - sum(base)
    order = sorted(
        range(len(fractions)), key=lambda i: (-(quotas[i] - base[i]), i)
    )
    for i in order[:leftover]:
        base[i] += 1
    return base


def rank_features(dataset: BinaryDataset, max_depth: int = 12):
    """Rank features by CART/Gini importance (weighted impurity decrease).

    Grows one greedy binary tree on the 0/1 split of each feature. A
    feature's importance accumulates (node fraction) * (impurity decrease)
    over every internal node that splits on it. Returns every feature as
    (index, score) sorted by descending score, ties and never-used features
    by ascending index.
    """
    if dataset.n < 2 or dataset.d < 1:
        raise DegenerateDataset(
            f"need >= 2 samples and >= 1 feature, got n={dataset.n}, d={dataset.d}"
        )
    if max_depth < 1:
        raise ValueError("max_depth must be positive")

    X = dataset.features
    y = dataset.labels.astype(np.bool_)
    n_total = float(dataset.n)
    importance = np.zeros(dataset.d, dtype=np.float64)

    stack = [(np.arange(dataset.n, dtype=np.int64), 0)]
    while stack:
        rows, depth = stack.pop()
        if depth >= max_depth or rows.size < 2:
            continue
        ysub = y[rows]
        npos = int(np.count_nonzero(ysub))
        if npos == 0 or npos == rows.size:
            continue
        gains = _kernels.gini_gains(
            np.ascontiguousarray(X[rows]), np.ascontiguousarray(ysub)
        )
        best = int(np.argmax(gains))  # ties resolve to the lowest index
        if gains[best] <= 0.0:
            continue
        importance[best] += (rows.size / n_total) * gains[best]
        mask = X[rows, best]
        stack.append((rows[~mask], depth + 1))
        stack.append((rows[mask], depth + 1))

    order = sorted(range(dataset.d), key=lambda j: (-importance[j], j))
    return [(j, float(importance[j])) for j in order]


def select_features(dataset: BinaryDataset, indices) -> BinaryDataset:
    """Project onto the given feature indices, keeping row order and labels."""
    seen = set()
    for idx in indices:
        if not (0 <= idx < dataset.d):
            raise IndexOutOfRange(idx, dataset.d)
        if idx in seen:
            raise DuplicateIndex(idx)
        seen.add(idx)
    idx_arr = np.asarray(list(indices), dtype=np.int64)
    return BinaryDataset(
        schema=FeatureSchema(tuple(dataset.schema.names[i] for i in idx_arr)),
        features=dataset.features[:, idx_arr],
        labels=dataset.labels.copy(),
    )
