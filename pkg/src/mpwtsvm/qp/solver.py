"""Active-set solver for  min 1/2 x'Hx + p'x  s.t.  Ax <= b,  x >= 0.

H may be indefinite. The method keeps a working set of bounds fixed at zero
and of inequality rows held at equality, minimizes over the null space of the
working set, follows negative curvature when the reduced Hessian has any, and
releases the constraint with the most negative multiplier once stationary.
The result is a first-order KKT point together with its multipliers; the
certificate is recomputed from scratch before returning.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog

log = logging.getLogger(__name__)


class QpError(RuntimeError):
    pass


class QpInfeasibleError(QpError):
    pass


class QpUnboundedError(QpError):
    pass


@dataclass(frozen=True)
class QpProblem:
    """``min 1/2 x'Hx + p'x`` subject to ``A x <= b`` and ``x >= 0``."""

    H: np.ndarray
    p: np.ndarray
    A: np.ndarray
    b: np.ndarray
    # smallest eigenvalue of H when the caller already knows it cheaply
    min_eigenvalue: float | None = field(default=None, compare=False)

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        p = np.asarray(self.p, dtype=float).ravel()
        n = p.shape[0]
        A = np.asarray(self.A, dtype=float).reshape(-1, n) if n else np.zeros((0, 0))
        b = np.asarray(self.b, dtype=float).ravel()
        if H.shape != (n, n):
            raise ValueError(f"H must be {n}x{n}, got {H.shape}")
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        if not np.array_equal(H, H.T):
            raise ValueError("H must be exactly symmetric")
        for name, v in (("H", H), ("p", p), ("A", A), ("b", b)):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite entries")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.H @ x) + self.p @ x)


@dataclass(frozen=True)
class QpSolution:
    pi: np.ndarray
    ineq_multipliers: np.ndarray
    bound_multipliers: np.ndarray
    kkt_residual: float
    objective: float
    converged: bool
    iterations: int
    min_eigenvalue: float

    @property
    def convex(self) -> bool:
        return self.min_eigenvalue >= -1e-10


def kkt_components(qp: QpProblem, x, mu, nu) -> dict[str, float]:
    """Infinity-norm violations of each KKT condition at ``(x, mu, nu)``."""
    x, mu, nu = (np.asarray(v, dtype=float) for v in (x, mu, nu))
    slack = qp.A @ x - qp.b if qp.m else np.zeros(0)

    def inf(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    return {
        "stationarity": inf(qp.H @ x + qp.p + qp.A.T @ mu - nu),
        "primal": max(inf(np.maximum(slack, 0.0)), inf(np.maximum(-x, 0.0))),
        "dual": max(inf(np.maximum(-mu, 0.0)), inf(np.maximum(-nu, 0.0))),
        "complementarity": max(inf(mu * slack), inf(nu * x)),
    }


def kkt_residual(qp: QpProblem, x, mu, nu) -> float:
    return max(kkt_components(qp, x, mu, nu).values())


def min_eigenvalue(H) -> float:
    H = np.asarray(H, dtype=float)
    if H.size == 0:
        return 0.0
    return float(sla.eigvalsh(H, subset_by_index=[0, 0])[0])


def _feasible_start(qp: QpProblem) -> np.ndarray:
    x = np.zeros(qp.n)
    if qp.m == 0 or np.all(qp.b >= 0):
        return x
    res = linprog(
        np.zeros(qp.n), A_ub=qp.A, b_ub=qp.b, bounds=[(0, None)] * qp.n, method="highs"
    )
    if res.status == 2:
        raise QpInfeasibleError("constraint system A x <= b, x >= 0 is infeasible")
    if not res.success:
        raise QpError(f"phase-1 feasibility search failed: {res.message}")
    x = np.asarray(res.x, dtype=float)
    x[x < 1e-12] = 0.0
    return x


class _ActiveSet:
    """Working-set bookkeeping and the main loop; one instance per solve."""

    def __init__(self, qp: QpProblem, tol: float, max_iter: int, max_norm: float | None = None):
        self.qp = qp
        self.max_norm = max_norm
        self.tol = tol
        self.max_iter = max_iter
        self.H, self.p, self.A, self.b = qp.H, qp.p, qp.A, qp.b
        self.n, self.m = qp.n, qp.m
        self.x = _feasible_start(qp)
        self.bound = self.x == 0.0  # variables held at their zero bound
        self.rows: list[int] = []  # inequality rows held at equality
        hnorm = float(np.max(np.abs(self.H))) if self.n else 0.0
        self.curv_tol = 1e-11 * max(1.0, hnorm)
        self.step_tol = 1e-14
        self.zero_steps = 0
        self.iterations = 0

    # constraint ids: ("x", i) is the bound x_i >= 0, ("r", j) is row j of A
    def _normal_dot(self, cid, d):
        kind, i = cid
        return -d[i] if kind == "x" else float(self.A[i] @ d)

    def _subspace(self):
        free = np.flatnonzero(~self.bound)
        aw = self.A[np.ix_(self.rows, free)] if self.rows else np.zeros((0, free.size))
        if aw.shape[0] == 0:
            z = np.eye(free.size)
        elif aw.shape[0] >= free.size:
            z = np.zeros((free.size, 0))
        else:
            _, _, vt = np.linalg.svd(aw, full_matrices=True)
            z = vt[aw.shape[0]:].T
        return free, aw, z

    def multipliers(self, g, free, aw):
        """Least-squares multipliers for the working set (rows, bounds)."""
        if self.rows:
            mu_w = np.linalg.lstsq(aw.T, -g[free], rcond=None)[0]
        else:
            mu_w = np.zeros(0)
        mu = np.zeros(self.m)
        mu[self.rows] = mu_w
        nu = g + self.A.T @ mu if self.m else g.copy()
        nu[free] = 0.0
        return mu, nu

    def ratio_test(self, d, max_step):
        """Largest feasible step along d (capped) and the constraint that blocks it."""
        step, blocker = max_step, None
        dn = float(np.max(np.abs(d))) if d.size else 0.0
        thresh = self.step_tol * max(1.0, dn)
        cand = np.flatnonzero((~self.bound) & (d < -thresh))
        if cand.size:
            t = self.x[cand] / -d[cand]
            j = int(np.argmin(t))
            if t[j] < step:
                step, blocker = float(max(t[j], 0.0)), ("x", int(cand[j]))
        if self.m:
            ad = self.A @ d
            inactive = np.ones(self.m, dtype=bool)
            inactive[self.rows] = False
            cand = np.flatnonzero(inactive & (ad > thresh))
            if cand.size:
                t = np.maximum(self.b[cand] - self.A[cand] @ self.x, 0.0) / ad[cand]
                j = int(np.argmin(t))
                if t[j] < step:
                    step, blocker = float(t[j]), ("r", int(cand[j]))
        return step, blocker

    def add(self, cid):
        kind, i = cid
        if kind == "x":
            self.bound[i] = True
            self.x[i] = 0.0
        else:
            self.rows.append(i)

    def drop(self, cid):
        kind, i = cid
        if kind == "x":
            self.bound[i] = False
        else:
            self.rows.remove(i)

    def steepest(self, g, free, z):
        d = np.zeros(self.n)
        d[free] = -z @ (z.T @ g[free])
        return d

    def move(self, d, g, max_step):
        """Exact line search on the quadratic along d, limited by feasibility."""
        curv = float(d @ (self.H @ d))
        slope = float(g @ d)
        if not np.isfinite(max_step) and curv > self.curv_tol * float(d @ d):
            max_step = -slope / curv
        step, blocker = self.ratio_test(d, max_step)
        if not np.isfinite(step):
            raise QpUnboundedError("objective is unbounded below on the feasible set")
        self.x = self.x + step * d
        self.x[self.bound] = 0.0
        np.maximum(self.x, 0.0, out=self.x)
        if self.max_norm is not None and float(np.max(self.x)) > self.max_norm:
            raise QpUnboundedError(
                f"iterates exceeded {self.max_norm:.3g}; objective is numerically unbounded below"
            )
        if blocker is not None:
            self.add(blocker)
        self.zero_steps = self.zero_steps + 1 if step == 0.0 else 0
        return step, blocker

    def _direction(self, g, free, z, just_dropped):
        """Search direction on the working-set subspace, or None when stationary."""
        hr = z.T @ self.H[np.ix_(free, free)] @ z
        hr = 0.5 * (hr + hr.T)
        gr = z.T @ g[free]
        lam, vec = np.linalg.eigh(hr)
        gscale = max(1.0, float(np.max(np.abs(g))))
        d = np.zeros(self.n)
        if lam[0] < -self.curv_tol:
            v = vec[:, 0]
            s = float(gr @ v)
            d[free] = z @ (-v if s > 0 else v)
            if abs(s) <= 1e-12 * gscale and just_dropped is not None:
                # pure negative curvature descends either way: prefer the interior side
                if self._normal_dot(just_dropped, d) > 0:
                    d = -d
            return d, np.inf, False
        pos = lam > self.curv_tol
        coef = vec.T @ gr
        null_part = vec[:, ~pos] @ coef[~pos]
        if np.max(np.abs(null_part), initial=0.0) > 1e-12 * gscale:
            d[free] = -z @ null_part
            return d, np.inf, False
        v = -vec[:, pos] @ (coef[pos] / lam[pos])
        if not np.any(v):
            return None, 0.0, False
        d[free] = z @ v
        return d, 1.0, True

    def _release_candidate(self, mu, nu):
        """Working-set constraint with a negative multiplier to release, if any."""
        cands = [(mu[j], ("r", j)) for j in self.rows]
        cands += [(nu[i], ("x", int(i))) for i in np.flatnonzero(self.bound)]
        cands = [c for c in cands if c[0] < -0.5 * self.tol]
        if not cands:
            return None
        if self.zero_steps > self.n + self.m:
            # long run of degenerate steps: smallest-index rule against cycling
            return min(cands, key=lambda c: c[1])[1]
        return min(cands, key=lambda c: c[0])[1]

    def run(self) -> bool:
        just_dropped = None
        newton_done = False
        while self.iterations < self.max_iter:
            self.iterations += 1
            g = self.H @ self.x + self.p
            free, aw, z = self._subspace()
            if z.shape[1] and not newton_done:
                d, max_step, newton = self._direction(g, free, z, just_dropped)
                if d is not None:
                    if just_dropped is not None and self._normal_dot(just_dropped, d) >= 0:
                        d, max_step, newton = self.steepest(g, free, z), np.inf, False
                    dn = float(np.max(np.abs(d)))
                    if dn > 0 and float(g @ d) <= 1e-12 * dn * max(1.0, float(np.max(np.abs(g)))):
                        step, blocker = self.move(d, g, max_step)
                        just_dropped = None
                        newton_done = newton and blocker is None and step == max_step
                        continue
            newton_done = False
            mu, nu = self.multipliers(g, free, aw)
            release = self._release_candidate(mu, nu)
            if release is None:
                self.mu, self.nu = mu, nu
                return True
            self.drop(release)
            just_dropped = release
        g = self.H @ self.x + self.p
        free, aw, _ = self._subspace()
        self.mu, self.nu = self.multipliers(g, free, aw)
        return False

    def polish(self):
        """Newton corrections on the equality-constrained KKT system of the final working set."""
        free = np.flatnonzero(~self.bound)
        r = len(self.rows)
        if free.size == 0:
            return
        hff = self.H[np.ix_(free, free)]
        aw = self.A[np.ix_(self.rows, free)] if r else np.zeros((0, free.size))
        kkt = np.block([[hff, aw.T], [aw, np.zeros((r, r))]])
        x = self.x.copy()
        for _ in range(3):
            g = self.H @ x + self.p
            rhs = np.concatenate([-g[free], self.b[self.rows] - self.A[self.rows] @ x if r else np.zeros(0)])
            x[free] += np.linalg.lstsq(kkt, rhs, rcond=None)[0][: free.size]
        if np.any(x < 0) or (self.m and np.any(self.A @ x - self.b > self.tol)):
            return
        old = self._certificate()
        saved = self.x, self.mu, self.nu
        self.x = x
        g = self.H @ x + self.p
        self.mu, self.nu = self.multipliers(g, free, aw)
        if self._certificate() > old:
            self.x, self.mu, self.nu = saved

    def _certificate(self):
        mu, nu = np.maximum(self.mu, 0.0), np.maximum(self.nu, 0.0)
        return kkt_residual(self.qp, self.x, mu, nu)


def solve_qp(
    qp: QpProblem, tol: float = 1e-8, max_iter: int | None = None, max_norm: float | None = None
) -> QpSolution:
    """Find a KKT point of ``qp`` and certify it.

    Returns a solution whose ``kkt_residual`` is recomputed from the returned
    ``(pi, ineq_multipliers, bound_multipliers)``. ``converged`` is False when
    the iteration limit was hit or the residual exceeds ``tol``; the best
    iterate is still returned. ``min_eigenvalue`` records the smallest
    eigenvalue of H: when it is nonnegative the point is a global minimizer.

    Raises :class:`QpUnboundedError` on a feasible ray of descent, or when any
    iterate exceeds ``max_norm`` (if given) in the infinity norm.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 20 * (qp.n + qp.m) + 100
    lam_min = qp.min_eigenvalue if qp.min_eigenvalue is not None else min_eigenvalue(qp.H)
    if qp.n == 0:
        return QpSolution(np.zeros(0), np.zeros(qp.m), np.zeros(0), 0.0, 0.0, True, 0, lam_min)
    solver = _ActiveSet(qp, tol, max_iter, max_norm)
    finished = solver.run()
    if solver._certificate() > tol:
        solver.polish()
    x = solver.x
    mu = np.maximum(solver.mu, 0.0)
    nu = np.maximum(solver.nu, 0.0)
    res = kkt_residual(qp, x, mu, nu)
    converged = finished and res <= tol
    if not converged:
        log.warning(
            "QP solve not converged after %d iterations (kkt residual %.3g)", solver.iterations, res
        )
    return QpSolution(
        pi=x,
        ineq_multipliers=mu,
        bound_multipliers=nu,
        kkt_residual=res,
        objective=qp.objective(x),
        converged=converged,
        iterations=solver.iterations,
        min_eigenvalue=float(lam_min),
    )
