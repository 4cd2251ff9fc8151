"""The multi-view estimator: fitting, nearest-plane prediction and model files."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import MultiViewDataset, ScalingParams
from .graphs import build_graphs
from .kernels import KernelSpec, augment, augmented_kernel_block, gram
from .params import Hyperparameters
from .qp.dual import DIRECTIONS, assemble_dual, design_matrices, recover_primal
from .qp.solver import QpSolution, QpUnboundedError, solve_qp

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
NORM_FLOOR = 1e-12
DIVERGENCE_FACTOR = 1e6


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Plane:
    """Augmented plane vector (weights or kernel coefficients, then bias) in one view."""

    w: np.ndarray
    kernel: KernelSpec | None = None
    reference: np.ndarray | None = None
    norm: float = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise ValueError("plane vector has non-finite entries")
        object.__setattr__(self, "w", w)
        if self.kernel is None:
            norm = float(np.linalg.norm(w[:-1]))
        else:
            u = w[:-1]
            kc = gram(self.reference, self.reference, self.kernel)
            norm = float(np.sqrt(max(u @ kc @ u, 0.0)))
        object.__setattr__(self, "norm", norm)

    def rows(self, x) -> np.ndarray:
        """Augmented representation of raw (already scaled) samples."""
        if self.kernel is None:
            return augment(x)
        return augmented_kernel_block(x, self.reference, self.kernel)

    def distance(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        expected = self.w.shape[0] - 1 if self.kernel is None else self.reference.shape[1]
        if x.shape[1] != expected:
            raise ValueError(f"dimension mismatch: got {x.shape[1]} features, expected {expected}")
        return plane_distance(self.w, self.rows(x), norm=self.norm)


def plane_distance(w, x_aug, gram_matrix=None, *, norm: float | None = None):
    """``|w . x_aug|`` divided by the norm of w's non-bias part.

    With ``gram_matrix`` (K(C, C)) the norm is the kernel metric
    ``sqrt(u' K u)``. Norms below 1e-12 leave the distance unnormalized.
    Accepts a single augmented sample or a matrix of them.
    """
    w = np.asarray(w, dtype=float).ravel()
    x_aug = np.asarray(x_aug, dtype=float)
    if x_aug.shape[-1] != w.shape[0]:
        raise ValueError(f"dimension mismatch: {x_aug.shape[-1]} vs {w.shape[0]}")
    if norm is None:
        u = w[:-1]
        norm = float(np.linalg.norm(u)) if gram_matrix is None else float(np.sqrt(max(u @ gram_matrix @ u, 0.0)))
    raw = np.abs(x_aug @ w)
    return raw if norm < NORM_FLOOR else raw / norm


def nearer_plane(dist_pos, dist_neg) -> np.ndarray:
    """+1 where the positive plane is at least as close, else -1."""
    return np.where(np.asarray(dist_pos) <= np.asarray(dist_neg), 1, -1)


@dataclass(frozen=True)
class MpwtsvmModel:
    plane_pos_a: Plane
    plane_neg_a: Plane
    plane_pos_b: Plane
    plane_neg_b: Plane
    scaling: ScalingParams | None = None
    params: Hyperparameters | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def w_plus_a(self):
        return self.plane_pos_a.w

    @property
    def w_minus_a(self):
        return self.plane_neg_a.w

    @property
    def w_plus_b(self):
        return self.plane_pos_b.w

    @property
    def w_minus_b(self):
        return self.plane_neg_b.w

    def _prepare(self, x, view):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x if self.scaling is None else self.scaling.transform_view(x, view)

    def view_distances(self, x, view: str) -> tuple[np.ndarray, np.ndarray]:
        if view not in ("A", "B"):
            raise ValueError("view must be 'A' or 'B'")
        x = self._prepare(x, view)
        pos, neg = (self.plane_pos_a, self.plane_neg_a) if view == "A" else (self.plane_pos_b, self.plane_neg_b)
        return pos.distance(x), neg.distance(x)

    def predict_view(self, x, view: str) -> np.ndarray:
        return nearer_plane(*self.view_distances(x, view))

    def predict_combined(self, xa, xb) -> np.ndarray:
        pa, na = self.view_distances(xa, "A")
        pb, nb = self.view_distances(xb, "B")
        if pa.shape != pb.shape:
            raise ValueError("views have different sample counts")
        return nearer_plane(0.5 * (pa + pb), 0.5 * (na + nb))

    def predict_all(self, xa, xb) -> dict[str, np.ndarray]:
        return {
            "A": self.predict_view(xa, "A"),
            "B": self.predict_view(xb, "B"),
            "combined": self.predict_combined(xa, xb),
        }


def predict_view(model: MpwtsvmModel, x, view: str):
    """Label of one sample (or labels of a batch) from a single view."""
    out = model.predict_view(x, view)
    return int(out[0]) if np.ndim(x) == 1 else out


def predict_combined(model: MpwtsvmModel, xa, xb):
    out = model.predict_combined(xa, xb)
    return int(out[0]) if np.ndim(xa) == 1 else out


def _solution_summary(sol: QpSolution, size: int) -> dict:
    return {
        "converged": bool(sol.converged),
        "kkt_residual": float(sol.kkt_residual),
        "iterations": int(sol.iterations),
        "min_eigenvalue": float(sol.min_eigenvalue),
        "objective": float(sol.objective),
        "retained": int(size),
    }


def solve_direction(ds, graphs, params: Hyperparameters, direction: str, designs=None):
    """Assemble and solve one dual; returns (assembly, solution, fell_back).

    When the dual as written is unbounded below (or, being nonconvex, stalls
    short of a certified KKT point) it is re-assembled with the slack blocks
    shifted to make H positive semidefinite and solved again.
    """
    ka, kb = params.kernel_for("A"), params.kernel_for("B")
    asm = assemble_dual(ds, graphs, params, direction, ka, kernel_b=kb, designs=designs)
    try:
        sol = _solve(asm, params)
        if sol.converged or sol.convex or params.convexify:
            return asm, sol, False
        log.info("%s dual did not reach a certified point; solving the convexified dual", direction)
    except QpUnboundedError:
        if params.convexify:
            raise
        log.info("%s dual is unbounded below; solving the convexified dual instead", direction)
    asm = assemble_dual(
        ds, graphs, params.with_(convexify=True), direction, ka, kernel_b=kb, designs=designs
    )
    return asm, _solve(asm, params), True


def _solve(asm, params: Hyperparameters) -> QpSolution:
    # iterates this far beyond the box bounds mean the objective runs off to -inf
    bound = DIVERGENCE_FACTOR * max(1.0, float(np.max(asm.qp.b)))
    return solve_qp(asm.qp, tol=params.tol, max_iter=params.max_iter, max_norm=bound)


def fit(ds: MultiViewDataset, params: Hyperparameters | None = None, scaling: ScalingParams | None = None,
        *, return_details: bool = False):
    """Fit the four planes on an already scaled dataset.

    ``scaling`` is recorded in the model so that prediction accepts raw
    features. With ``return_details`` the dual assemblies and QP solutions
    are returned alongside the model.
    """
    params = params or Hyperparameters()
    ds.require_both_classes()
    graphs = build_graphs(ds, params.k)
    ka, kb = params.kernel_for("A"), params.kernel_for("B")
    designs, refs = design_matrices(ds, ka, kb)
    planes, details, diag = {}, {}, {}
    for direction in DIRECTIONS:
        asm, sol, shifted = solve_direction(ds, graphs, params, direction, designs)
        w_a, w_b = recover_primal(sol, asm)
        planes[direction] = (Plane(w_a, ka, refs["A"]), Plane(w_b, kb, refs["B"]))
        details[direction] = (asm, sol)
        diag[direction] = _solution_summary(sol, asm.size)
        diag[direction]["convexified"] = bool(params.convexify or shifted)
    model = MpwtsvmModel(
        planes["positive"][0], planes["negative"][0], planes["positive"][1], planes["negative"][1],
        scaling, params, diag,
    )
    return (model, details) if return_details else model


# --- model files -----------------------------------------------------------

def _kernel_dict(spec):
    return None if spec is None else spec.to_dict()


def _kernel_from(d):
    return None if d is None else KernelSpec.from_dict(d)


def save_model(model: MpwtsvmModel, path) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "type": "mpwtsvm",
        "kernel_a": _kernel_dict(model.plane_pos_a.kernel),
        "kernel_b": _kernel_dict(model.plane_pos_b.kernel),
        "reference_a": None if model.plane_pos_a.reference is None else model.plane_pos_a.reference.tolist(),
        "reference_b": None if model.plane_pos_b.reference is None else model.plane_pos_b.reference.tolist(),
        "w_plus_a": model.w_plus_a.tolist(),
        "w_minus_a": model.w_minus_a.tolist(),
        "w_plus_b": model.w_plus_b.tolist(),
        "w_minus_b": model.w_minus_b.tolist(),
        "scaling": None if model.scaling is None else model.scaling.to_dict(),
        "params": None if model.params is None else model.params.to_dict(),
        "diagnostics": model.diagnostics,
    }
    write_document(doc, path)


def write_document(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def read_document(path, expected_type: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from None
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ModelFormatError(f"corrupt model file {path}: missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ModelFormatError(
            f"unsupported model schema version {doc['schema_version']!r} (expected {SCHEMA_VERSION})"
        )
    if doc.get("type") != expected_type:
        raise ModelFormatError(f"model file holds a {doc.get('type')!r} model, expected {expected_type!r}")
    return doc


def _array(doc, key):
    v = doc.get(key)
    return None if v is None else np.asarray(v, dtype=float)


def load_model(path) -> MpwtsvmModel:
    doc = read_document(path, "mpwtsvm")
    try:
        ka, kb = _kernel_from(doc["kernel_a"]), _kernel_from(doc["kernel_b"])
        ra, rb = _array(doc, "reference_a"), _array(doc, "reference_b")
        return MpwtsvmModel(
            Plane(_array(doc, "w_plus_a"), ka, ra),
            Plane(_array(doc, "w_minus_a"), ka, ra),
            Plane(_array(doc, "w_plus_b"), kb, rb),
            Plane(_array(doc, "w_minus_b"), kb, rb),
            None if doc["scaling"] is None else ScalingParams.from_dict(doc["scaling"]),
            None if doc["params"] is None else Hyperparameters.from_dict(doc["params"]),
            doc.get("diagnostics", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from None
