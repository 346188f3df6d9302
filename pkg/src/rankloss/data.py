"""Synthetic dataset generation and CSV ingestion.

Synthetic data are class-conditional Gaussians: one mean per class, placed
at one-hot corners scaled so all pairwise mean distances equal the requested
separation, with shared isotropic noise. An optional label-flip probability
relabels samples uniformly among the other classes, producing the noisy
outlier regime that motivates large-batch ranking losses.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import EmptyFileError, MissingColumnError, NonNumericCellError

__all__ = [
    "Dataset",
    "SyntheticSpec",
    "generate_synthetic",
    "load_csv",
    "save_csv",
]


@dataclass(frozen=True)
class Dataset:
    """Feature matrix, class-index labels, and where they came from.

    Every class index in [0, n_classes) must actually occur; class counts
    are retrievable via ``class_counts``.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    class_names: Optional[tuple[str, ...]] = None
    provenance: str = "unknown"

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {features.shape}")
        n, d = features.shape
        if n < 1 or d < 1:
            raise ValueError(f"need at least one sample and one feature, got {features.shape}")
        if labels.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite (no NaN/inf)")
        if self.n_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.n_classes}")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise ValueError(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{labels.min()}, {labels.max()}]"
            )
        counts = np.bincount(labels, minlength=self.n_classes)
        if (counts == 0).any():
            missing = int(np.flatnonzero(counts == 0)[0])
            raise ValueError(f"class {missing} has no samples")
        if self.class_names is not None and len(self.class_names) != self.n_classes:
            raise ValueError(
                f"class_names length {len(self.class_names)} does not match "
                f"n_classes {self.n_classes}"
            )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a Gaussian-blob dataset.

    ``dim`` must be at least the class count so the one-hot mean placement
    keeps all pairwise mean distances equal to ``class_mean_separation``.
    """

    class_counts: tuple[int, ...]
    dim: int
    class_mean_separation: float
    noise_std: float
    label_flip_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        counts = tuple(int(c) for c in self.class_counts)
        if len(counts) < 2:
            raise ValueError(f"need at least 2 classes, got counts {counts}")
        if any(c < 1 for c in counts):
            raise ValueError(f"class counts must be positive, got {counts}")
        if self.dim < len(counts):
            raise ValueError(
                f"dim must be at least the class count ({len(counts)}) for "
                f"equidistant mean placement, got {self.dim}"
            )
        if self.class_mean_separation < 0:
            raise ValueError(f"separation must be nonnegative, got {self.class_mean_separation}")
        if not self.noise_std > 0:
            raise ValueError(f"noise_std must be positive, got {self.noise_std}")
        if not 0.0 <= self.label_flip_prob < 0.5:
            raise ValueError(
                f"label_flip_prob must lie in [0, 0.5), got {self.label_flip_prob}"
            )
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        object.__setattr__(self, "class_counts", counts)

    @property
    def n_classes(self) -> int:
        return len(self.class_counts)

    @property
    def n_samples(self) -> int:
        return sum(self.class_counts)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Deterministically draw the dataset described by ``spec``.

    Rows are ordered by class (all of class 0, then class 1, ...); labels
    are flipped after feature generation, so a flipped sample keeps the
    feature distribution of its original class.
    """
    rng = np.random.default_rng(spec.seed)
    n_classes = spec.n_classes
    # One-hot corners scaled by sep / sqrt(2) are mutually sep apart.
    means = np.zeros((n_classes, spec.dim))
    scale = spec.class_mean_separation / math.sqrt(2.0)
    for c in range(n_classes):
        means[c, c] = scale

    blocks = []
    labels = []
    for c, count in enumerate(spec.class_counts):
        blocks.append(rng.normal(loc=means[c], scale=spec.noise_std, size=(count, spec.dim)))
        labels.extend([c] * count)
    features = np.vstack(blocks)
    labels = np.asarray(labels, dtype=np.int64)

    flip = rng.random(labels.size) < spec.label_flip_prob
    if flip.any():
        offsets = rng.integers(1, n_classes, size=int(flip.sum()))
        labels = labels.copy()
        labels[flip] = (labels[flip] + offsets) % n_classes
    return Dataset(
        features=features,
        labels=labels,
        n_classes=n_classes,
        class_names=None,
        provenance=f"synthetic(seed={spec.seed})",
    )


def load_csv(path, label_column: str) -> Dataset:
    """Load a header-first CSV; every non-label column is a numeric feature.

    Label values map to class indices by first appearance, recorded in
    ``class_names``. Any missing or non-numeric feature cell aborts the load
    with a ``NonNumericCellError`` naming the 0-based data row and the
    column.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError(f"{path}: file is empty") from None
        if label_column not in header:
            raise MissingColumnError(
                f"{path}: no column named {label_column!r} (columns: {header})"
            )
        label_pos = header.index(label_column)
        feature_names = [name for i, name in enumerate(header) if i != label_pos]
        if not feature_names:
            raise MissingColumnError(f"{path}: no feature columns besides the label")

        rows = []
        label_values = []
        for row_no, row in enumerate(reader):
            if len(row) != len(header):
                short = min(len(row), len(header))
                name = header[short] if short < len(header) else header[-1]
                raise NonNumericCellError(
                    f"{path}: row {row_no} has {len(row)} cells, expected "
                    f"{len(header)} (first affected column {name!r})",
                    row=row_no,
                    column=name,
                )
            values = []
            for col_pos, name in enumerate(header):
                cell = row[col_pos]
                if col_pos == label_pos:
                    if cell == "":
                        raise NonNumericCellError(
                            f"{path}: row {row_no}, column {name!r}: empty label cell",
                            row=row_no,
                            column=name,
                        )
                    label_values.append(cell)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise NonNumericCellError(
                        f"{path}: row {row_no}, column {name!r}: "
                        f"cannot parse {cell!r} as a finite number",
                        row=row_no,
                        column=name,
                    )
                values.append(v)
            rows.append(values)
    if not rows:
        raise EmptyFileError(f"{path}: header only, no data rows")

    name_to_index: dict[str, int] = {}
    labels = []
    for value in label_values:
        if value not in name_to_index:
            name_to_index[value] = len(name_to_index)
        labels.append(name_to_index[value])
    class_names = tuple(name_to_index)
    return Dataset(
        features=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        n_classes=len(class_names),
        class_names=class_names,
        provenance=f"csv:{path}",
    )


def save_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset as CSV with 17-significant-digit floats (lossless round trip).

    Labels are written as their class names when present, else as the bare
    index; ``load_csv`` recovers the same labels as long as classes first
    appear in index order (true for generated datasets, which are
    class-ordered).
    """
    path = Path(path)
    header = [f"f{i}" for i in range(dataset.n_features)] + [label_column]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for x, y in zip(dataset.features, dataset.labels):
            name = dataset.class_names[y] if dataset.class_names else str(int(y))
            writer.writerow([format(v, ".17g") for v in x] + [name])
