"""Dataset ingestion and fold-safe preprocessing."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class CsvFormatError(ValueError):
    """A cell failed to parse; message names the row and column."""


@dataclass(frozen=True)
class Dataset:
    """N samples with K numeric features and integer class labels 0..C-1.

    Cross validation additionally needs >= 2 samples per class; that is
    checked where folds are built, not here, so small files still load.
    """

    name: str
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=int)
        if f.ndim != 2 or y.shape != (f.shape[0],):
            raise ValueError("features must be (N, K) with length-N labels")
        if not np.all(np.isfinite(f)):
            raise ValueError("features contain non-finite values")
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")
        if y.min(initial=0) < 0 or y.max(initial=0) >= self.num_classes:
            raise ValueError("labels must lie in 0..num_classes-1")
        f = f.copy()
        y = y.copy()
        f.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", y)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


def _parse_csv(path: Path, label_column: int | str | None,
               delimiter: str) -> tuple[np.ndarray, list[str]]:
    """Shared CSV core: numeric feature matrix plus raw label strings.

    ``label_column`` may be a header name (the first row is then treated as
    a header), a column index (header auto-detected: a first row whose
    feature cells fail numeric parsing is skipped), or None for a file of
    features only.
    """
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter) if row]
    if not rows:
        raise CsvFormatError(f"{path}: empty file")

    width = len(rows[0])
    if isinstance(label_column, str):
        header = rows[0]
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise CsvFormatError(
                f"{path}: no column named {label_column!r} in header {header}")
        data_rows = rows[1:]
        first_line = 2
    else:
        label_idx = label_column % width if label_column is not None else None
        data_rows = rows
        first_line = 1
        feature_cells = [c for i, c in enumerate(rows[0]) if i != label_idx]
        if any(not _is_number(c) for c in feature_cells):
            data_rows = rows[1:]
            first_line = 2
    if not data_rows:
        raise CsvFormatError(f"{path}: no data rows")

    features = []
    raw_labels = []
    for offset, row in enumerate(data_rows):
        line = first_line + offset
        if len(row) != width:
            raise CsvFormatError(
                f"{path}:{line}: expected {width} cells, found {len(row)}")
        vals = []
        for col, cell in enumerate(row):
            if col == label_idx:
                continue
            cell = cell.strip()
            if cell == "":
                raise CsvFormatError(
                    f"{path}:{line}: missing value in column {col}")
            try:
                vals.append(float(cell))
            except ValueError:
                raise CsvFormatError(
                    f"{path}:{line}: non-numeric feature cell {cell!r} "
                    f"in column {col}")
        features.append(vals)
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())
    return np.array(features, dtype=float), raw_labels


def load_csv(path: str | Path, label_column: int | str = -1,
             delimiter: str = ",") -> Dataset:
    """Load a numeric CSV with one label column.

    Labels are encoded as integers in order of first appearance, so the
    encoding is deterministic.  See :func:`_parse_csv` for header handling.
    """
    path = Path(path)
    features, raw_labels = _parse_csv(path, label_column, delimiter)
    encoding: dict[str, int] = {}
    labels = []
    for lbl in raw_labels:
        if lbl not in encoding:
            encoding[lbl] = len(encoding)
        labels.append(encoding[lbl])
    return Dataset(name=path.stem, features=features,
                   labels=np.array(labels, dtype=int),
                   num_classes=len(encoding))


def load_feature_matrix(path: str | Path, label_column: int | str | None = None,
                        delimiter: str = ",") -> np.ndarray:
    """Feature rows only; any label column is parsed but discarded.

    For prediction inputs, which need no valid labeling.
    """
    features, _ = _parse_csv(Path(path), label_column, delimiter)
    return features


def _is_number(cell: str) -> bool:
    try:
        float(cell.strip())
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class Scaler:
    """Per-feature z-score parameters fit on a training fold."""

    mean: np.ndarray
    scale: np.ndarray  # 1.0 where the training column has zero variance

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=float) - self.mean) / self.scale


def standardize(train_features: np.ndarray, test_features: np.ndarray
                ) -> tuple[np.ndarray, np.ndarray, Scaler]:
    """Z-score both folds using training statistics only (no test leakage)."""
    train = np.asarray(train_features, dtype=float)
    if train.shape[0] == 0:
        raise ValueError("empty training fold")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    scaler = Scaler(mean=mean, scale=scale)
    return scaler.transform(train), scaler.transform(test_features), scaler
