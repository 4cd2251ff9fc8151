"""Multi-view datasets: CSV ingestion, min-max scaling, stratified folds, one-vs-one pairing."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed input files or invalid dataset contents."""


@dataclass(frozen=True)
class MultiViewDataset:
    """Paired feature matrices for two views plus +/-1 labels."""

    view_a: np.ndarray
    view_b: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        a = np.array(self.view_a, dtype=float, copy=True)
        b = np.array(self.view_b, dtype=float, copy=True)
        y = np.array(self.labels, copy=True).ravel()
        if a.ndim != 2 or b.ndim != 2:
            raise DataError("views must be 2-D matrices")
        if not (a.shape[0] == b.shape[0] == y.shape[0]):
            raise DataError(
                f"row-count mismatch: view A has {a.shape[0]}, view B has {b.shape[0]}, "
                f"labels has {y.shape[0]}"
            )
        if not np.all(np.isin(y, (-1, 1))):
            raise DataError("invalid label: labels must be -1 or +1")
        y = y.astype(int)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DataError("feature values must be finite")
        for arr in (a, b, y):
            arr.setflags(write=False)
        object.__setattr__(self, "view_a", a)
        object.__setattr__(self, "view_b", b)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def positive(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 1)

    @property
    def negative(self) -> np.ndarray:
        return np.flatnonzero(self.labels == -1)

    def subset(self, idx) -> "MultiViewDataset":
        idx = np.asarray(idx, dtype=int)
        return MultiViewDataset(self.view_a[idx], self.view_b[idx], self.labels[idx])

    def require_both_classes(self) -> None:
        if self.positive.size == 0 or self.negative.size == 0:
            raise DataError("training data needs at least one sample of each class")


@dataclass(frozen=True)
class ScalingParams:
    """Per-feature min/max recorded at fit time, one pair of vectors per view."""

    min_a: np.ndarray
    max_a: np.ndarray
    min_b: np.ndarray
    max_b: np.ndarray

    def transform(self, ds: MultiViewDataset) -> MultiViewDataset:
        return MultiViewDataset(
            self.transform_view(ds.view_a, "A"), self.transform_view(ds.view_b, "B"), ds.labels
        )

    def transform_view(self, x: np.ndarray, view: str) -> np.ndarray:
        lo, hi = (self.min_a, self.max_a) if view == "A" else (self.min_b, self.max_b)
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != lo.shape[0]:
            raise DataError(
                f"view {view} has {x.shape[-1]} features, scaling expects {lo.shape[0]}"
            )
        return _affine(x, lo, hi)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("min_a", "max_a", "min_b", "max_b")}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingParams":
        return cls(**{k: np.asarray(d[k], dtype=float) for k in ("min_a", "max_a", "min_b", "max_b")})


def _affine(x, lo, hi):
    span = hi - lo
    const = span == 0
    # constant columns map to 0; test values outside [lo, hi] are not clipped
    out = (x - lo) / np.where(const, 1.0, span)
    out[..., const] = 0.0
    return out


def _read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric cell") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DataError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)


def read_label_tokens(path) -> list[str]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such label file: {path}")
    with path.open() as fh:
        return [ln.strip() for ln in fh if ln.strip()]


def _parse_binary_label(tok: str, where: str) -> int:
    if tok in ("+1", "1"):
        return 1
    if tok == "-1":
        return -1
    raise DataError(f"{where}: invalid label {tok!r} (expected +1, 1 or -1)")


def load_multiview_csv(path_a, path_b, path_labels) -> MultiViewDataset:
    """Read two headerless numeric CSV views and a one-token-per-line +/-1 label file."""
    xa = _read_matrix(path_a)
    xb = _read_matrix(path_b)
    toks = read_label_tokens(path_labels)
    y = np.array([_parse_binary_label(t, f"{path_labels}:{i + 1}") for i, t in enumerate(toks)])
    if not (xa.shape[0] == xb.shape[0] == y.shape[0]):
        raise DataError(
            f"row-count mismatch: {path_a} has {xa.shape[0]} rows, {path_b} has "
            f"{xb.shape[0]}, {path_labels} has {y.shape[0]}"
        )
    return MultiViewDataset(xa, xb, y)


def load_class_labels(path) -> np.ndarray:
    """Read a multiclass label file (one integer class id per line)."""
    toks = read_label_tokens(path)
    try:
        return np.array([int(t) for t in toks], dtype=int)
    except ValueError:
        raise DataError(f"{path}: class labels must be integers") from None


def write_matrix(path, x: np.ndarray) -> None:
    with Path(path).open("w") as fh:
        for row in np.atleast_2d(x):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_labels(path, y) -> None:
    with Path(path).open("w") as fh:
        for v in y:
            fh.write(("+1" if int(v) == 1 else str(int(v))) + "\n")


def minmax_scale(ds: MultiViewDataset) -> tuple[MultiViewDataset, ScalingParams]:
    if len(ds) == 0:
        raise DataError("cannot scale an empty dataset")
    params = ScalingParams(
        ds.view_a.min(axis=0), ds.view_a.max(axis=0), ds.view_b.min(axis=0), ds.view_b.max(axis=0)
    )
    return params.transform(ds), params


def stratified_kfold(ds_or_labels, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified split: shuffle each class, then deal its members round-robin.

    Each class is dealt starting at the fold after the one where the previous
    class finished, so fold sizes differ by at most one overall.
    """
    labels = ds_or_labels.labels if isinstance(ds_or_labels, MultiViewDataset) else np.asarray(ds_or_labels)
    if folds < 2:
        raise DataError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    assignment = np.empty(labels.shape[0], dtype=int)
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < folds:
            raise DataError(
                f"class {cls} has {members.size} samples, fewer than {folds} folds"
            )
        members = rng.permutation(members)
        assignment[members] = (offset + np.arange(members.size)) % folds
        offset = (offset + members.size) % folds
    everything = np.arange(labels.shape[0])
    return [(everything[assignment != f], everything[assignment == f]) for f in range(folds)]


def one_vs_one_pairs(labels) -> list[tuple[int, int, np.ndarray]]:
    """One entry per unordered class pair: (class a, class b, row indices of both)."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise DataError("one-vs-one needs at least two distinct classes")
    return [
        (a.item(), b.item(), np.flatnonzero((labels == a) | (labels == b)))
        for a, b in itertools.combinations(classes, 2)
    ]


def binary_view(labels, a, b) -> np.ndarray:
    """Map class a to +1 and class b to -1 (other classes must already be filtered out)."""
    labels = np.asarray(labels)
    return np.where(labels == a, 1, -1)
