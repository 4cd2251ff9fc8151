"""Linear and Gaussian RBF kernels, and the bias-augmented kernel block."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

KINDS = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "rbf" and not self.sigma > 0:
            raise ValueError("rbf kernel needs sigma > 0")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(kind=d["kind"], sigma=float(d["sigma"]))


def kernel_value(x, y, spec: KernelSpec) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.kind == "linear":
        return float(x @ y)
    diff = x - y
    return float(np.exp(-(diff @ diff) / spec.sigma**2))


def gram(x, c, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix with entries K(x_i, c_j)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if x.shape[1] != c.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {c.shape[1]} features")
    if spec.kind == "linear":
        return x @ c.T
    sq = cdist(x, c, "sqeuclidean")
    return np.exp(-sq / spec.sigma**2)


def augmented_kernel_block(x, c, spec: KernelSpec) -> np.ndarray:
    """``[K(X, C), 1]``: kernel rows against the reference set plus a ones column."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c.shape[0] == 0 or c.size == 0:
        raise ValueError("reference set is empty")
    k = gram(x, c, spec)
    return np.hstack([k, np.ones((k.shape[0], 1))])


def augment(x) -> np.ndarray:
    """Append the constant 1 feature that carries the bias."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.hstack([x, np.ones((x.shape[0], 1))])
