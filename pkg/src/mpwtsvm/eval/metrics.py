"""Accuracy, stratified cross-validation and exhaustive grid search."""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..baseline import fit_wltsvm
from ..data import DataError, MultiViewDataset, _affine, minmax_scale, stratified_kfold
from ..graphs import GraphError
from ..kernels import KernelSpec
from ..model import fit
from ..params import Hyperparameters
from ..qp.dual import AssemblyError
from ..qp.solver import QpError

RULES = ("A", "B", "combined")
DECADES = [10.0**e for e in range(-3, 4)]
PRESET_GRID = {"penalty": DECADES, "gamma": DECADES, "sigma": DECADES, "k": [3, 5, 7, 9, 11]}

# failures that disqualify one grid point without aborting the search
FIT_ERRORS = (QpError, AssemblyError, GraphError, DataError, np.linalg.LinAlgError)


def accuracy(predictions, labels) -> float:
    predictions, labels = np.asarray(predictions).ravel(), np.asarray(labels).ravel()
    if predictions.size == 0:
        raise ValueError("accuracy of an empty prediction set")
    if predictions.shape != labels.shape:
        raise ValueError(f"{predictions.size} predictions for {labels.size} labels")
    return float(np.mean(predictions == labels))


@dataclass(frozen=True)
class CvResult:
    folds: list  # per fold: {rule: accuracy}
    test_sizes: list
    mean: dict
    std: dict

    @property
    def best_rule(self) -> str:
        """Decision rule with the highest mean validation accuracy (combined wins ties)."""
        order = ("combined", "A", "B")
        return max(order, key=lambda r: (self.mean[r], -order.index(r)))

    def to_dict(self) -> dict:
        return {"folds": self.folds, "test_sizes": self.test_sizes, "mean": self.mean, "std": self.std,
                "best_rule": self.best_rule}


def _summarize(per_fold, sizes, rules=RULES) -> CvResult:
    acc = np.array([[f[r] for r in rules] for f in per_fold])
    mean = {r: float(v) for r, v in zip(rules, acc.mean(axis=0))}
    std = {r: float(v) for r, v in zip(rules, acc.std(axis=0))}
    return CvResult(per_fold, sizes, mean, std)


def cross_validate(ds: MultiViewDataset, params: Hyperparameters, folds: int = 5, seed: int = 0) -> CvResult:
    """Scale on each training fold, fit, and score all three decision rules on the held-out fold."""
    per_fold, sizes = [], []
    for train, test in stratified_kfold(ds, folds, seed):
        scaled, scaling = minmax_scale(ds.subset(train))
        model = fit(scaled, params, scaling)
        held = ds.subset(test)
        pred = model.predict_all(held.view_a, held.view_b)
        per_fold.append({r: accuracy(pred[r], held.labels) for r in RULES})
        sizes.append(int(test.size))
    return _summarize(per_fold, sizes)


def single_view_features(ds: MultiViewDataset, view: str) -> np.ndarray:
    """Features the single-view baseline sees: view A, view B, or both concatenated ("AB")."""
    if view == "A":
        return ds.view_a
    if view == "B":
        return ds.view_b
    if view == "AB":
        return np.hstack([ds.view_a, ds.view_b])
    raise ValueError("view must be 'A', 'B' or 'AB'")


def cross_validate_wltsvm(ds: MultiViewDataset, view: str, c: float, k: int, kernel: KernelSpec | None = None,
                          folds: int = 5, seed: int = 0, **kw) -> CvResult:
    """Same folds and scaling protocol as :func:`cross_validate`, for the single-view baseline."""
    x, y = single_view_features(ds, view), ds.labels
    per_fold, sizes = [], []
    for train, test in stratified_kfold(ds, folds, seed):
        xt = x[train]
        lo, hi = xt.min(axis=0), xt.max(axis=0)
        xs = _affine(xt, lo, hi)
        yt = y[train]
        model = fit_wltsvm(xs[yt > 0], xs[yt < 0], c, k, kernel, feature_min=lo, feature_max=hi, **kw)
        per_fold.append({"single": accuracy(model.predict(x[test]), y[test])})
        sizes.append(int(test.size))
    return _summarize(per_fold, sizes, rules=("single",))


def expand_grid(grid: dict) -> list[dict]:
    """Cartesian product in key order; the last key varies fastest."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("empty grid")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def params_for(base: Hyperparameters, point: dict) -> Hyperparameters:
    """Apply one grid point to ``base``.

    ``penalty`` sets all six penalties, ``sigma`` selects a shared RBF kernel
    and ``sigma_b`` an independent view-B width; other keys name
    :class:`Hyperparameters` fields directly.
    """
    changes = {}
    for key, value in point.items():
        if key == "penalty":
            changes.update({n: float(value) for n in ("c_a", "c_b", "c", "c_a2", "c_b2", "c_2")})
        elif key == "sigma":
            changes["kernel"] = KernelSpec("rbf", float(value))
        elif key == "sigma_b":
            changes["kernel_b"] = KernelSpec("rbf", float(value))
        elif key == "k":
            changes["k"] = int(value)
        elif key in Hyperparameters.__dataclass_fields__:
            changes[key] = float(value)
        else:
            raise ValueError(f"unknown grid parameter {key!r}")
    return base.with_(**changes)


@dataclass(frozen=True)
class GridRecord:
    index: int
    point: dict
    cv: CvResult | None
    error: str | None = None

    @property
    def score(self) -> float:
        return -np.inf if self.cv is None else self.cv.mean["combined"]


@dataclass(frozen=True)
class GridResult:
    best_index: int
    best_point: dict
    best_params: Hyperparameters
    records: list = field(repr=False)

    @property
    def best(self) -> GridRecord:
        return self.records[self.best_index]


def _evaluate(args) -> GridRecord:
    index, point, ds, base, folds, seed = args
    try:
        return GridRecord(index, point, cross_validate(ds, params_for(base, point), folds, seed))
    except FIT_ERRORS as exc:
        return GridRecord(index, point, None, f"{type(exc).__name__}: {exc}")


def grid_search(ds: MultiViewDataset, grid: dict | None = None, folds: int = 5, seed: int = 0,
                base: Hyperparameters | None = None, jobs: int = 1) -> GridResult:
    """Cross-validate every grid point and keep the best mean combined accuracy.

    Ties go to the earliest point in enumeration order. Points whose fit fails
    are recorded with their error and never selected. ``jobs > 1`` spreads
    points over worker processes; the result does not depend on it.
    """
    grid = PRESET_GRID if grid is None else grid
    base = base or Hyperparameters()
    points = expand_grid(grid)
    units = [(i, p, ds, base, folds, seed) for i, p in enumerate(points)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_evaluate, units, chunksize=max(1, len(units) // (4 * jobs))))
    else:
        records = [_evaluate(u) for u in units]
    records.sort(key=lambda r: r.index)
    if all(r.cv is None for r in records):
        raise DataError(f"every grid point failed; first error: {records[0].error}")
    best = records[0].index
    for r in records:
        if r.score > records[best].score:
            best = r.index
    return GridResult(best, points[best], params_for(base, points[best]), records)
