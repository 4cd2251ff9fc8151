"""Single-view weighted twin SVM with local information (the comparison baseline).

Each plane solves ``min 1/2 a' F X G X' F a - f'a  s.t. 0 <= a <= C`` where X
holds the opposing class's augmented rows and ``G = (X_own' D X_own + eps I)^-1``;
the plane is ``w = -G X' F a``. This is the one-view restriction of the
multi-view dual with the cross-view and slack-coupling terms removed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import DataError, _affine
from .graphs import class_graphs
from .kernels import KernelSpec, augment, augmented_kernel_block
from .model import (
    SCHEMA_VERSION, ModelFormatError, Plane, _kernel_dict, _kernel_from, _solution_summary,
    nearer_plane, read_document, write_document,
)
from .qp.dual import AssemblyError, regularized_inverse, weighted_gram
from .qp.solver import QpProblem, QpSolution, solve_qp


@dataclass(frozen=True)
class WltsvmModel:
    plane_pos: Plane
    plane_neg: Plane
    feature_min: np.ndarray | None = None
    feature_max: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def kernel(self) -> KernelSpec | None:
        return self.plane_pos.kernel

    def distances(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.feature_min is not None:
            if x.shape[1] != self.feature_min.shape[0]:
                raise ValueError(
                    f"dimension mismatch: got {x.shape[1]} features, expected {self.feature_min.shape[0]}"
                )
            x = _affine(x, self.feature_min, self.feature_max)
        return self.plane_pos.distance(x), self.plane_neg.distance(x)

    def predict(self, x) -> np.ndarray:
        return nearer_plane(*self.distances(x))


def predict_wltsvm(model: WltsvmModel, x):
    """Label of one sample, or labels of a batch, by the nearer plane (ties to +1)."""
    out = model.predict(x)
    return int(out[0]) if np.ndim(x) == 1 else out


def wltsvm_dual(own, other, degree, indicator, penalty: float, eps_reg: float = 1e-6, prune: bool = True):
    """Dual QP for one plane plus what recovery needs: (qp, inverse, kept rows)."""
    f = np.asarray(indicator, dtype=float)
    kept = np.flatnonzero(f != 0) if prune else np.arange(f.shape[0])
    if kept.size == 0:
        raise AssemblyError("no support-vector candidates; increase k")
    x, f = other[kept], f[kept]
    inv = regularized_inverse(weighted_gram(own, degree), scale=eps_reg)
    h = f[:, None] * (x @ inv @ x.T) * f[None, :]
    h = 0.5 * (h + h.T)
    l = kept.size
    qp = QpProblem(h, -f, np.eye(l), np.full(l, float(penalty)))
    return qp, inv, kept


def _plane_vector(sol: QpSolution, inv, other, indicator, kept):
    f = np.asarray(indicator, dtype=float)[kept]
    return -(inv @ (other[kept].T @ (f * sol.pi)))


def fit_wltsvm(x_pos, x_neg, c: float = 1.0, k: int = 5, kernel: KernelSpec | None = None, *,
               eps_reg: float = 1e-6, tol: float = 1e-7, max_iter: int | None = None, prune: bool = True,
               feature_min=None, feature_max=None) -> WltsvmModel:
    """Fit both planes on already scaled samples.

    ``feature_min``/``feature_max`` are stored so prediction can take raw
    features; pass the statistics the training data was scaled with.
    """
    x_pos = np.atleast_2d(np.asarray(x_pos, dtype=float))
    x_neg = np.atleast_2d(np.asarray(x_neg, dtype=float))
    if x_pos.shape[0] == 0 or x_neg.shape[0] == 0 or x_pos.size == 0 or x_neg.size == 0:
        raise DataError("training needs both classes nonempty")
    if x_pos.shape[1] != x_neg.shape[1]:
        raise DataError("classes have different feature counts")
    if c < 0:
        raise ValueError("c must be nonnegative")
    if kernel is None:
        rows_pos, rows_neg, ref = augment(x_pos), augment(x_neg), None
    else:
        ref = np.vstack([x_pos, x_neg])
        rows_pos = augmented_kernel_block(x_pos, ref, kernel)
        rows_neg = augmented_kernel_block(x_neg, ref, kernel)

    planes, diag = [], {}
    for name, own_x, other_x, own_rows, other_rows in (
        ("positive", x_pos, x_neg, rows_pos, rows_neg),
        ("negative", x_neg, x_pos, rows_neg, rows_pos),
    ):
        g = class_graphs(own_x, other_x, k)
        qp, inv, kept = wltsvm_dual(own_rows, other_rows, g.degree, g.indicator, c, eps_reg, prune)
        sol = solve_qp(qp, tol=tol, max_iter=max_iter)
        planes.append(Plane(_plane_vector(sol, inv, other_rows, g.indicator, kept), kernel, ref))
        diag[name] = _solution_summary(sol, kept.size)
    lo = None if feature_min is None else np.asarray(feature_min, dtype=float)
    hi = None if feature_max is None else np.asarray(feature_max, dtype=float)
    return WltsvmModel(planes[0], planes[1], lo, hi, diag)


def save_wltsvm(model: WltsvmModel, path) -> None:
    ref = model.plane_pos.reference
    doc = {
        "schema_version": SCHEMA_VERSION,
        "type": "wltsvm",
        "kernel": _kernel_dict(model.kernel),
        "reference": None if ref is None else ref.tolist(),
        "w_plus": model.plane_pos.w.tolist(),
        "w_minus": model.plane_neg.w.tolist(),
        "feature_min": None if model.feature_min is None else model.feature_min.tolist(),
        "feature_max": None if model.feature_max is None else model.feature_max.tolist(),
        "diagnostics": model.diagnostics,
    }
    write_document(doc, path)


def load_wltsvm(path) -> WltsvmModel:
    doc = read_document(path, "wltsvm")
    try:
        kernel = _kernel_from(doc["kernel"])
        ref = None if doc["reference"] is None else np.asarray(doc["reference"], dtype=float)
        lo = None if doc["feature_min"] is None else np.asarray(doc["feature_min"], dtype=float)
        hi = None if doc["feature_max"] is None else np.asarray(doc["feature_max"], dtype=float)
        return WltsvmModel(
            Plane(np.asarray(doc["w_plus"], dtype=float), kernel, ref),
            Plane(np.asarray(doc["w_minus"], dtype=float), kernel, ref),
            lo, hi, doc.get("diagnostics", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from None
