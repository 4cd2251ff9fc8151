from .solver import (
    QpError,
    QpInfeasibleError,
    QpProblem,
    QpSolution,
    QpUnboundedError,
    kkt_components,
    kkt_residual,
    min_eigenvalue,
    solve_qp,
)

__all__ = [
    "QpError",
    "QpInfeasibleError",
    "QpProblem",
    "QpSolution",
    "QpUnboundedError",
    "kkt_components",
    "kkt_residual",
    "min_eigenvalue",
    "solve_qp",
]
