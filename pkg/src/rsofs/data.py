"""Tabular dataset loading, normalization, splitting and feature-mask projection.

Datasets follow the common UCI/KEEL shape: one instance per CSV row, numeric
or categorical attribute columns, and a class label column. Everything is
materialized as numpy arrays; datasets are immutable once built and safe to
share across threads.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MISSING_MARKERS = {"", "?", "na", "n/a", "nan"}


class EmptyDatasetError(ValueError):
    """File contains no data rows or no attribute columns."""


class SingleClassDatasetError(ValueError):
    """All rows share one label; classification is degenerate."""


class MalformedRowError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyMaskError(ValueError):
    """A feature mask with no selected attributes was used for projection."""


class ClassTooSmallWarning(UserWarning):
    """A class has a single instance; it is placed in the train partition."""


@dataclass(frozen=True)
class FeatureMask:
    """Fixed-length binary inclusion flags over dataset attributes.

    Bit i corresponds to attribute column i; bit order matches the string
    form, so ``FeatureMask.from_string("0101")`` selects columns 1 and 3.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("mask bits must be 0 or 1")

    @classmethod
    def from_string(cls, s: str) -> "FeatureMask":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_array(cls, a) -> "FeatureMask":
        return cls(tuple(int(bool(v)) for v in a))

    @classmethod
    def ones(cls, n: int) -> "FeatureMask":
        return cls((1,) * n)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    @property
    def popcount(self) -> int:
        return sum(self.bits)

    @property
    def bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def flipped(self, i: int) -> "FeatureMask":
        bits = list(self.bits)
        bits[i] ^= 1
        return FeatureMask(tuple(bits))

    def hamming(self, other: "FeatureMask") -> int:
        return sum(a != b for a, b in zip(self.bits, other.bits))

    def __repr__(self) -> str:
        return f"FeatureMask({self.bitstring})"


@dataclass(frozen=True)
class Dataset:
    """Numeric attribute matrix plus integer-coded class labels."""

    name: str
    features: np.ndarray
    labels: np.ndarray
    attribute_names: tuple[str, ...]

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("row count of features must equal label count")
        if np.isnan(self.features).any():
            raise ValueError("features contain missing values after loading")

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(np.unique(self.labels))


@dataclass(frozen=True)
class SplitDataset:
    """Disjoint stratified train/test views of one dataset."""

    train: Dataset
    test: Dataset
    split_seed: int
    train_fraction: float


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_MARKERS


def _detect_header(rows: list[list[str]]) -> bool:
    # Header assumed when the first row has a non-numeric cell in a column
    # that is numeric over the remaining rows.
    if len(rows) < 2:
        return False
    first, rest = rows[0], rows[1:]
    for col in range(len(first)):
        values = [r[col] for r in rest if not _is_missing(r[col])]
        if not values:
            continue
        parsed = sum(_parse_float(v) is not None for v in values)
        column_numeric = parsed >= max(1, (len(values) + 1) // 2)
        if column_numeric and not _is_missing(first[col]) and _parse_float(first[col]) is None:
            return True
    return False


def _encode_column(cells: list[str]) -> np.ndarray:
    """Numeric column -> floats with mean imputation; categorical column ->
    first-appearance integer codes with mode imputation."""
    parsed = [None if _is_missing(c) else _parse_float(c) for c in cells]
    n_known = sum(c is not None and not _is_missing(c) for c in cells)
    n_numeric = sum(v is not None for v in parsed)
    if n_known > 0 and n_numeric >= max(1, (n_known + 1) // 2):
        values = [v for v in parsed if v is not None]
        fill = float(np.mean(values)) if values else 0.0
        return np.array([fill if v is None else v for v in parsed], dtype=float)
    # categorical: mode-impute missing cells, then code by first appearance
    known = [c.strip() for c in cells if not _is_missing(c)]
    if not known:
        return np.zeros(len(cells), dtype=float)
    counts: dict[str, int] = {}
    for c in known:
        counts[c] = counts.get(c, 0) + 1
    mode = max(counts, key=lambda c: (counts[c], -known.index(c)))
    codes: dict[str, int] = {}
    out = []
    for c in cells:
        key = mode if _is_missing(c) else c.strip()
        if key not in codes:
            codes[key] = len(codes)
        out.append(codes[key])
    return np.array(out, dtype=float)


def _encode_labels(cells: list[str]) -> np.ndarray:
    known = [c.strip() for c in cells if not _is_missing(c)]
    if not known:
        raise EmptyDatasetError("label column is entirely missing")
    counts: dict[str, int] = {}
    for c in known:
        counts[c] = counts.get(c, 0) + 1
    mode = max(counts, key=lambda c: (counts[c], -known.index(c)))
    codes: dict[str, int] = {}
    out = []
    for c in cells:
        key = mode if _is_missing(c) else c.strip()
        if key not in codes:
            codes[key] = len(codes)
        out.append(codes[key])
    return np.array(out, dtype=np.int64)


def load_csv(path: str | Path, label_column: int | str = -1) -> Dataset:
    """Load a UCI-style CSV classification dataset.

    Args:
        path: CSV file, comma separated, UTF-8, optional header row
            (auto-detected: a header is assumed when the first row has a
            non-numeric cell in an otherwise numeric column).
        label_column: class column, as a name (requires a header) or an
            integer index (negative indices count from the end). Defaults
            to the last column.

    Returns:
        Dataset with float features and integer-coded labels. Numeric cells
        that fail to parse (and "?"/empty cells) are imputed with the column
        mean; categorical columns are integer-coded by first appearance and
        missing cells take the column mode.

    Raises:
        FileNotFoundError: missing file.
        MalformedRowError: a row's column count differs from the first row.
        EmptyDatasetError: no data rows or no attribute columns.
        SingleClassDatasetError: fewer than two distinct labels.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with open(path, newline="", encoding="utf-8") as fh:
        raw = [(i + 1, row) for i, row in enumerate(csv.reader(fh))]
    raw = [(ln, row) for ln, row in raw if row and any(c.strip() for c in row)]
    if not raw:
        raise EmptyDatasetError(f"{path.name} has no data rows")

    width = len(raw[0][1])
    for ln, row in raw:
        if len(row) != width:
            raise MalformedRowError(ln, f"expected {width} columns, found {len(row)}")

    rows = [row for _, row in raw]
    has_header = _detect_header(rows)
    header = [c.strip() for c in rows[0]] if has_header else None
    data = rows[1:] if has_header else rows
    if not data:
        raise EmptyDatasetError(f"{path.name} has no data rows")

    if isinstance(label_column, str):
        if header is None or label_column not in header:
            raise ValueError(f"label column {label_column!r} not found (no matching header)")
        label_idx = header.index(label_column)
    else:
        label_idx = label_column % width

    attr_idx = [c for c in range(width) if c != label_idx]
    if not attr_idx:
        raise EmptyDatasetError(f"{path.name} has no attribute columns")

    labels = _encode_labels([row[label_idx] for row in data])
    if len(np.unique(labels)) < 2:
        raise SingleClassDatasetError(f"{path.name} has a single class")

    columns = [_encode_column([row[c] for c in data] if False else [row[c] for row in data]) for c in attr_idx]
    features = np.column_stack(columns)
    names = tuple(header[c] for c in attr_idx) if header else tuple(f"attr{c}" for c in attr_idx)
    return Dataset(name=path.stem, features=features, labels=labels, attribute_names=names)


def min_max_normalize(d: Dataset) -> Dataset:
    """Rescale every attribute column to [0, 1]; constant columns map to 0."""
    lo = d.features.min(axis=0)
    hi = d.features.max(axis=0)
    span = hi - lo
    out = np.zeros_like(d.features)
    nonconst = span > 0
    out[:, nonconst] = (d.features[:, nonconst] - lo[nonconst]) / span[nonconst]
    return Dataset(d.name, out, d.labels, d.attribute_names)


def stratified_split(d: Dataset, train_fraction: float, seed: int) -> SplitDataset:
    """Per-class proportional holdout split, deterministic for a fixed seed.

    Every class appears in the train partition. A single-instance class
    cannot be stratified: its instance goes to train and a
    ClassTooSmallWarning is emitted.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence(seed % 2**63))
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cls in np.unique(d.labels):
        members = np.flatnonzero(d.labels == cls)
        if len(members) < 2:
            warnings.warn(
                f"class {cls} of {d.name} has a single instance; placing it in train",
                ClassTooSmallWarning,
            )
            train_idx.extend(members.tolist())
            continue
        perm = rng.permutation(len(members))
        n_train = int(round(len(members) * train_fraction))
        n_train = min(max(n_train, 1), len(members))
        picked = members[perm[:n_train]]
        rest = members[perm[n_train:]]
        train_idx.extend(picked.tolist())
        test_idx.extend(rest.tolist())
    train_idx.sort()
    test_idx.sort()
    if not test_idx:
        raise ValueError("train_fraction leaves an empty test partition")

    def view(idx: list[int]) -> Dataset:
        sel = np.array(idx, dtype=int)
        return Dataset(d.name, d.features[sel], d.labels[sel], d.attribute_names)

    return SplitDataset(
        train=view(train_idx),
        test=view(test_idx),
        split_seed=seed,
        train_fraction=train_fraction,
    )


def project(d: Dataset, m: FeatureMask) -> Dataset:
    """Keep exactly the attribute columns whose mask bit is 1."""
    if len(m) != d.n_attributes:
        raise ValueError(f"mask length {len(m)} != attribute count {d.n_attributes}")
    if m.popcount == 0:
        raise EmptyMaskError("cannot project onto an empty feature mask")
    idx = np.array(m.indices, dtype=int)
    return Dataset(
        d.name,
        d.features[:, idx],
        d.labels,
        tuple(d.attribute_names[i] for i in idx),
    )
