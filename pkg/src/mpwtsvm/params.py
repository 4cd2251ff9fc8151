from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .kernels import KernelSpec


@dataclass(frozen=True)
class Hyperparameters:
    """Penalties, trade-offs and neighborhood size for the two dual problems.

    ``c_a, c_b, c`` and ``gamma`` belong to the positive-class problem,
    ``c_a2, c_b2, c_2`` and ``gamma2`` to the negative-class one. ``gamma2``
    defaults to ``gamma``. ``kernel=None`` selects the linear formulation on
    bias-augmented features; a :class:`KernelSpec` selects the kernel
    formulation. ``kernel_b`` overrides the view-B kernel; by default both
    views share ``kernel``.
    """

    c_a: float = 1.0
    c_b: float = 1.0
    c: float = 1.0
    c_a2: float = 1.0
    c_b2: float = 1.0
    c_2: float = 1.0
    gamma: float = 1.0
    gamma2: float | None = None
    k: int = 5
    eps_reg: float = 1e-6
    kernel: KernelSpec | None = None
    kernel_b: KernelSpec | None = None
    convexify: bool = False
    tol: float = 1e-7
    max_iter: int | None = None
    prune: bool = True

    def __post_init__(self):
        for name in ("c_a", "c_b", "c", "c_a2", "c_b2", "c_2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not self.gamma > 0 or (self.gamma2 is not None and not self.gamma2 > 0):
            raise ValueError("gamma and gamma2 must be positive")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.eps_reg < 0:
            raise ValueError("eps_reg must be nonnegative")
        if self.kernel is None and self.kernel_b is not None:
            raise ValueError("kernel_b needs a kernel for view A as well")
        object.__setattr__(self, "k", int(self.k))

    @property
    def gamma_negative(self) -> float:
        return self.gamma if self.gamma2 is None else self.gamma2

    def kernel_for(self, view: str) -> KernelSpec | None:
        if view == "B" and self.kernel_b is not None:
            return self.kernel_b
        return self.kernel

    @classmethod
    def tied(cls, penalty: float, gamma: float, k: int, kernel: KernelSpec | None = None, **kw):
        """All six penalties equal, gamma2 = gamma, one kernel for both views."""
        return cls(
            c_a=penalty, c_b=penalty, c=penalty, c_a2=penalty, c_b2=penalty, c_2=penalty,
            gamma=gamma, k=k, kernel=kernel, **kw,
        )

    def with_(self, **changes) -> "Hyperparameters":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kernel"] = None if self.kernel is None else self.kernel.to_dict()
        d["kernel_b"] = None if self.kernel_b is None else self.kernel_b.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparameters":
        d = dict(d)
        if d.get("kernel") is not None:
            d["kernel"] = KernelSpec.from_dict(d["kernel"])
        if d.get("kernel_b") is not None:
            d["kernel_b"] = KernelSpec.from_dict(d["kernel_b"])
        return cls(**d)
