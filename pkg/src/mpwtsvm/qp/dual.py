"""Assembly of the two coupled dual problems and recovery of the plane vectors.

Variable layout of one dual, each block of length l (the retained opposing
samples)::

    pi = (alpha_A, alpha_B, lambda_A, lambda_B, xi_A, xi_B)

Quadratic blocks couple (alpha_A, lambda_B) through H1 and (alpha_B, lambda_A)
through H2; the slack pair is coupled by C. Constraint rows read
``alpha_A + lambda_A - C xi_B <= C_A`` and ``alpha_B + lambda_B - C xi_A <= C_B``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..graphs import WeightGraphs
from ..kernels import KernelSpec, augment, augmented_kernel_block
from .solver import QpProblem, QpSolution

COND_LIMIT = 1e12
DIRECTIONS = ("positive", "negative")


class AssemblyError(ValueError):
    pass


class SingularMatrixError(np.linalg.LinAlgError):
    pass


def _try_inverse(a):
    try:
        c, lower = sla.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return None
    anorm = float(np.max(np.sum(np.abs(a), axis=0)))
    rcond, info = sla.lapack.dpocon(c, anorm, uplo="L")
    if info != 0 or rcond * COND_LIMIT < 1.0:
        return None
    inv = sla.cho_solve((c, lower), np.eye(a.shape[0]), check_finite=False)
    return 0.5 * (inv + inv.T)


def regularized_inverse(m, eps: float = 0.0, *, scale: float = 1e-6, return_eps: bool = False):
    """``(M + eps I)^-1`` by Cholesky.

    When the factorization fails or the condition estimate exceeds 1e12, eps
    is raised to ``scale * trace(M) / n`` and the inverse retried; a matrix
    that is still singular raises :class:`SingularMatrixError`.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    n = m.shape[0]
    m = 0.5 * (m + m.T)
    eye = np.eye(n)
    inv = _try_inverse(m + eps * eye)
    if inv is None:
        fallback = scale * float(np.trace(m)) / n
        if not fallback > 0:
            raise SingularMatrixError("matrix is singular and has no positive trace to regularize with")
        eps = max(eps, fallback)
        inv = _try_inverse(m + eps * eye)
        if inv is None:
            raise SingularMatrixError(f"matrix + {eps:.3g} I is still singular")
    return (inv, eps) if return_eps else inv


@dataclass(frozen=True)
class ViewBlock:
    """Per-view ingredients of one dual: own-class design, opposing design, inverse."""

    own: np.ndarray  # rows of the class the plane should pass through
    other: np.ndarray  # retained opposing rows (after pruning)
    inverse: np.ndarray  # (trade-off * own' D own + eps I)^-1
    indicator: np.ndarray  # f over retained opposing rows
    eps: float


@dataclass(frozen=True)
class DualAssembly:
    """A dual problem plus everything needed to map its solution back to planes."""

    qp: QpProblem
    direction: str
    view_a: ViewBlock
    view_b: ViewBlock
    kept: np.ndarray  # indices into the opposing class that survived pruning
    xi_shift: float

    @property
    def size(self) -> int:
        return self.kept.shape[0]


def design_matrices(ds, kernel_a: KernelSpec | None, kernel_b: KernelSpec | None):
    """Row representations of every sample per view.

    Linear mode appends a 1 to each sample. Kernel mode uses
    ``[K(x, C), 1]`` against the reference set C = [positives; negatives].
    Returns ``{view: (positive rows, negative rows)}`` and the reference sets.
    """
    pos, neg = ds.positive, ds.negative
    out, refs = {}, {}
    for view, x, spec in (("A", ds.view_a, kernel_a), ("B", ds.view_b, kernel_b)):
        if spec is None:
            out[view] = (augment(x[pos]), augment(x[neg]))
            refs[view] = None
        else:
            ref = np.vstack([x[pos], x[neg]])
            out[view] = (
                augmented_kernel_block(x[pos], ref, spec),
                augmented_kernel_block(x[neg], ref, spec),
            )
            refs[view] = ref
    return out, refs


def weighted_gram(x, degree, trade: float = 1.0) -> np.ndarray:
    """``trade * X' diag(degree) X``, the graph-weighted quadratic term of one plane."""
    return trade * (x.T * degree) @ x


def _block_h(other, inverse, f):
    y = other @ inverse @ other.T
    y = f[:, None] * y * f[None, :]
    return 0.5 * (y + y.T)


def assemble_dual(
    ds,
    graphs: dict,
    params,
    direction: str,
    kernel: KernelSpec | None = None,
    *,
    kernel_b: KernelSpec | None = None,
    designs=None,
    prune: bool | None = None,
) -> DualAssembly:
    """Build the dual QP for the plane of the positive or the negative class.

    ``graphs`` maps ``(view, class)`` to :class:`WeightGraphs`, e.g.
    ``graphs["A", 1]`` holds the positive class's adjacency in view A and the
    indicator over the negatives. Pass ``kernel=None`` for the linear
    (bias-augmented) formulation. Opposing samples whose indicator is 0 in
    both views are dropped unless ``prune`` is False.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    ds.require_both_classes()
    if kernel is not None and kernel_b is None:
        kernel_b = kernel
    if designs is None:
        designs, _ = design_matrices(ds, kernel, kernel_b)
    prune = params.prune if prune is None else prune
    if direction == "positive":
        cls, own_i, other_i = 1, 0, 1
        ca, cb, cc, gamma = params.c_a, params.c_b, params.c, params.gamma
    else:
        cls, own_i, other_i = -1, 1, 0
        ca, cb, cc, gamma = params.c_a2, params.c_b2, params.c_2, params.gamma_negative

    g_a: WeightGraphs = graphs["A", cls]
    g_b: WeightGraphs = graphs["B", cls]
    f_a = np.asarray(g_a.indicator, dtype=float)
    f_b = np.asarray(g_b.indicator, dtype=float)
    if prune:
        kept = np.flatnonzero((f_a != 0) | (f_b != 0))
        if kept.size == 0:
            raise AssemblyError("no support-vector candidates; increase k")
    else:
        kept = np.arange(f_a.shape[0])

    blocks = {}
    for view, g, f, trade in (("A", g_a, f_a, 1.0), ("B", g_b, f_b, gamma)):
        own = designs[view][own_i]
        other = designs[view][other_i][kept]
        gram_own = weighted_gram(own, g.degree, trade)
        inv, eps = regularized_inverse(gram_own, scale=params.eps_reg, return_eps=True)
        blocks[view] = ViewBlock(own, other, inv, f[kept], eps)

    h1 = _block_h(blocks["A"].other, blocks["A"].inverse, blocks["A"].indicator)
    h2 = _block_h(blocks["B"].other, blocks["B"].inverse, blocks["B"].indicator)
    l = kept.size
    eye, zero = np.eye(l), np.zeros((l, l))
    lam_quad = min(
        0.0,
        2.0 * float(sla.eigvalsh(h1, subset_by_index=[0, 0])[0]),
        2.0 * float(sla.eigvalsh(h2, subset_by_index=[0, 0])[0]),
    )
    shift = 0.0
    if params.convexify:
        shift = max(0.0, -min(lam_quad, -cc)) + 1e-8
    xi_diag = shift * eye
    H = np.block(
        [
            [h1, zero, zero, -h1, zero, zero],
            [zero, h2, -h2, zero, zero, zero],
            [zero, -h2, h2, zero, zero, zero],
            [-h1, zero, zero, h1, zero, zero],
            [zero, zero, zero, zero, xi_diag, cc * eye],
            [zero, zero, zero, zero, cc * eye, xi_diag],
        ]
    )
    p = np.concatenate([-blocks["A"].indicator, -blocks["B"].indicator, np.zeros(4 * l)])
    A = np.block(
        [
            [eye, zero, eye, zero, zero, -cc * eye],
            [zero, eye, zero, eye, -cc * eye, zero],
        ]
    )
    b = np.concatenate([np.full(l, float(ca)), np.full(l, float(cb))])
    lam_min = min(lam_quad, shift - cc)
    qp = QpProblem(H, p, A, b, min_eigenvalue=lam_min)
    return DualAssembly(qp, direction, blocks["A"], blocks["B"], kept, shift)


def split_pi(pi, l: int) -> dict[str, np.ndarray]:
    names = ("alpha_a", "alpha_b", "lambda_a", "lambda_b", "xi_a", "xi_b")
    return {name: pi[i * l:(i + 1) * l] for i, name in enumerate(names)}


def recover_primal(solution: QpSolution | np.ndarray, assembly: DualAssembly):
    """Plane vectors (view A, view B) for the assembled direction.

    Positive direction: ``w_A = -G_A X_-A' F_A (alpha_A - lambda_B)`` and
    ``w_B = -G_B X_-B' F_B (alpha_B - lambda_A)``; the negative direction
    uses the opposite sign because its constraints put the opposing class on
    the positive side of the plane.
    """
    pi = solution.pi if isinstance(solution, QpSolution) else np.asarray(solution, dtype=float)
    parts = split_pi(pi, assembly.size)
    sign = -1.0 if assembly.direction == "positive" else 1.0
    va, vb = assembly.view_a, assembly.view_b
    w_a = sign * (va.inverse @ (va.other.T @ (va.indicator * (parts["alpha_a"] - parts["lambda_b"]))))
    w_b = sign * (vb.inverse @ (vb.other.T @ (vb.indicator * (parts["alpha_b"] - parts["lambda_a"]))))
    return w_a, w_b


def stationarity_residual(w, assembly: DualAssembly, view: str, solution) -> float:
    """Infinity norm of the plane's stationarity equation at ``w``.

    Checks ``(t M + eps I) w + s X' F (alpha - lambda) = 0`` with the same
    regularized Gram matrix used during assembly (s = +1 for the positive
    direction, -1 for the negative one).
    """
    pi = solution.pi if isinstance(solution, QpSolution) else np.asarray(solution, dtype=float)
    parts = split_pi(pi, assembly.size)
    blk = assembly.view_a if view == "A" else assembly.view_b
    diff = parts["alpha_a"] - parts["lambda_b"] if view == "A" else parts["alpha_b"] - parts["lambda_a"]
    sign = 1.0 if assembly.direction == "positive" else -1.0
    lhs = np.linalg.solve(blk.inverse, w) + sign * blk.other.T @ (blk.indicator * diff)
    return float(np.max(np.abs(lhs)))
