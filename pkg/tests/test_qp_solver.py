import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpwtsvm.qp import (
    QpInfeasibleError, QpProblem, QpUnboundedError, kkt_components, kkt_residual, min_eigenvalue, solve_qp,
)


def test_scalar_unconstrained_interior():
    sol = solve_qp(QpProblem([[1.0]], [-1.0], np.zeros((0, 1)), []))
    assert sol.pi == pytest.approx([1.0], abs=1e-12)
    assert sol.converged and sol.convex


def test_scalar_active_row():
    sol = solve_qp(QpProblem([[1.0]], [-1.0], [[1.0]], [0.5]))
    assert sol.pi == pytest.approx([0.5], abs=1e-12)
    assert sol.ineq_multipliers == pytest.approx([0.5], abs=1e-12)


def test_scalar_active_bound():
    sol = solve_qp(QpProblem([[1.0]], [1.0], np.zeros((0, 1)), []))
    assert sol.pi == pytest.approx([0.0], abs=1e-15)
    assert sol.bound_multipliers == pytest.approx([1.0], abs=1e-12)


def grid_oracle(qp, hi, step):
    """Smallest objective over the grid points of [0, hi]^n that satisfy A x <= b."""
    ticks = np.arange(0.0, hi + step / 2, step)
    best = np.inf
    rest = np.array(list(itertools.product(ticks, repeat=qp.n - 1))) if qp.n > 1 else np.zeros((1, 0))
    for t in ticks:
        pts = np.hstack([np.full((rest.shape[0], 1), t), rest])
        ok = np.all(pts @ qp.A.T <= qp.b + 1e-12, axis=1) if qp.m else np.ones(pts.shape[0], bool)
        if not ok.any():
            continue
        pts = pts[ok]
        f = 0.5 * np.einsum("ij,jk,ik->i", pts, qp.H, pts) + pts @ qp.p
        best = min(best, float(f.min()))
    return best


def test_two_variable_grid_oracle():
    qp = QpProblem([[2.0, 0.0], [0.0, 2.0]], [-2.0, -6.0], [[1.0, 1.0]], [2.0])
    sol = solve_qp(qp)
    oracle = grid_oracle(qp, 2.0, 1e-3)
    assert sol.objective <= oracle + 1e-4
    assert sol.pi == pytest.approx([0.0, 2.0], abs=1e-10)
    assert sol.objective == pytest.approx(-8.0, abs=1e-10)


def random_psd_qp(rng, n, m, rank=None):
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank))
    H = g @ g.T
    H = 0.5 * (H + H.T)
    p = rng.standard_normal(n) * 2
    # coefficients >= 1 keep the feasible region inside [0, max b]^n
    A = rng.uniform(1.0, 2.0, (m, n))
    b = rng.uniform(0.2, 1.0, m)
    return QpProblem(H, p, A, b)


def enumerate_kkt(qp):
    """Best KKT point over all working sets: exact global minimum for small convex problems."""
    n, m = qp.n, qp.m
    best = np.inf
    for nb in range(n + 1):
        for bounds in itertools.combinations(range(n), nb):
            free = [i for i in range(n) if i not in bounds]
            for nr in range(min(m, len(free)) + 1):
                for rows in itertools.combinations(range(m), nr):
                    kf = len(free)
                    aw = qp.A[np.ix_(list(rows), free)]
                    kkt = np.block([[qp.H[np.ix_(free, free)], aw.T], [aw, np.zeros((nr, nr))]])
                    rhs = np.concatenate([-qp.p[free], qp.b[list(rows)]])
                    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
                    x = np.zeros(n)
                    x[free] = sol[:kf]
                    if not np.allclose(kkt @ sol, rhs, atol=1e-9):
                        continue
                    if np.all(x >= -1e-10) and (m == 0 or np.all(qp.A @ x <= qp.b + 1e-10)):
                        best = min(best, qp.objective(np.maximum(x, 0)))
    return best


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 2))
def test_random_psd_matches_enumeration(seed, n, m):
    rng = np.random.default_rng(seed)
    # a singular H is only bounded below once some row caps the variables
    rank = int(rng.integers(1, n + 1)) if m else n
    qp = random_psd_qp(rng, n, m, rank=rank)
    sol = solve_qp(qp)
    assert sol.converged
    assert sol.kkt_residual <= 1e-8
    oracle = enumerate_kkt(qp)
    assert sol.objective <= oracle + 1e-9 * max(1.0, abs(oracle))


@pytest.mark.parametrize("seed", range(4))
def test_random_psd_grid_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    qp = random_psd_qp(rng, 3, 2)
    sol = solve_qp(qp)
    assert sol.objective <= grid_oracle(qp, float(qp.b.max()), 1e-2) + 1e-4


@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(0, 4))
def test_certificate_reproduces_and_holds_for_indefinite(seed, n, m):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n))
    H = 0.5 * (g + g.T)
    A = rng.uniform(0.5, 2.0, (m, n))
    A = np.vstack([A, np.eye(n)])  # box keeps the indefinite problem bounded
    b = np.concatenate([rng.uniform(0.5, 2.0, m), np.full(n, 3.0)])
    qp = QpProblem(H, rng.standard_normal(n), A, b)
    sol = solve_qp(qp)
    again = kkt_residual(qp, sol.pi, sol.ineq_multipliers, sol.bound_multipliers)
    assert abs(again - sol.kkt_residual) <= 1e-12
    assert sol.kkt_residual <= 1e-8
    assert np.all(sol.pi >= 0) and np.all(qp.A @ sol.pi <= qp.b + 1e-8)
    assert np.all(sol.ineq_multipliers >= 0) and np.all(sol.bound_multipliers >= 0)
    assert sol.min_eigenvalue == pytest.approx(np.linalg.eigvalsh(H)[0], abs=1e-10)


def test_negative_curvature_reaches_a_vertex():
    # min -x^2 on [0, 1]: x = 0 is a KKT point too, but the solver must leave the saddle
    sol = solve_qp(QpProblem([[-2.0]], [-1e-3], [[1.0]], [1.0]))
    assert sol.pi == pytest.approx([1.0])
    assert not sol.convex


def test_determinism():
    rng = np.random.default_rng(7)
    qp = random_psd_qp(rng, 6, 2, rank=3)
    a, b = solve_qp(qp), solve_qp(qp)
    assert np.array_equal(a.pi, b.pi)
    assert np.array_equal(a.ineq_multipliers, b.ineq_multipliers)


def test_infeasible():
    with pytest.raises(QpInfeasibleError):
        solve_qp(QpProblem([[1.0]], [0.0], [[1.0]], [-1.0]))


def test_infeasible_start_needs_phase_one():
    # x0 + x1 >= 1 written as -x0 - x1 <= -1: zero is infeasible but the system is not
    sol = solve_qp(QpProblem(np.eye(2), [0.0, 0.0], [[-1.0, -1.0]], [-1.0]))
    assert sol.pi == pytest.approx([0.5, 0.5], abs=1e-9)


def test_unbounded_ray():
    with pytest.raises(QpUnboundedError):
        solve_qp(QpProblem([[0.0]], [-1.0], np.zeros((0, 1)), []))
    with pytest.raises(QpUnboundedError):
        solve_qp(QpProblem([[-1.0]], [-1e-3], np.zeros((0, 1)), []))


def test_degenerate_stationary_point_is_returned():
    # x = 0 is a KKT point of min -x^2/2 with a zero bound multiplier; it is certified, not a ray
    sol = solve_qp(QpProblem([[-1.0]], [0.0], np.zeros((0, 1)), []))
    assert sol.pi.tolist() == [0.0] and sol.kkt_residual == 0.0 and not sol.convex


def test_divergence_bound():
    # bounded, but the minimizer lies far beyond the allowed norm
    qp = QpProblem([[1e-6]], [-1.0], np.zeros((0, 1)), [])
    assert solve_qp(qp).pi == pytest.approx([1e6])
    with pytest.raises(QpUnboundedError):
        solve_qp(qp, max_norm=1e3)


def test_iteration_limit_flags_unconverged():
    rng = np.random.default_rng(3)
    qp = random_psd_qp(rng, 10, 2)
    sol = solve_qp(qp, max_iter=1)
    assert not sol.converged
    assert sol.kkt_residual == kkt_residual(qp, sol.pi, sol.ineq_multipliers, sol.bound_multipliers)


def test_problem_validation():
    with pytest.raises(ValueError, match="symmetric"):
        QpProblem([[1.0, 2.0], [0.0, 1.0]], [0.0, 0.0], np.zeros((0, 2)), [])
    with pytest.raises(ValueError):
        QpProblem(np.eye(2), [0.0, 0.0], np.ones((1, 2)), [1.0, 2.0])
    with pytest.raises(ValueError):
        solve_qp(QpProblem([[1.0]], [0.0], np.zeros((0, 1)), []), tol=0.0)


def test_kkt_components_hand_values():
    qp = QpProblem([[1.0]], [-1.0], [[1.0]], [0.5])
    comp = kkt_components(qp, [0.75], [0.1], [0.0])
    assert comp["stationarity"] == pytest.approx(0.15)
    assert comp["primal"] == pytest.approx(0.25)
    assert comp["complementarity"] == pytest.approx(0.025)
    assert comp["dual"] == 0.0


def test_min_eigenvalue():
    assert min_eigenvalue(np.diag([3.0, -2.0, 1.0])) == pytest.approx(-2.0)
