"""Admissible weights: C^2 functions on C with uniform real-Hessian bounds.

All evaluators are vectorized over complex numpy arrays.  The complex
gradient follows the holomorphic convention d/dz = (d/dx - i d/dy)/2, so
for the Gaussian weight (alpha/2)|z|^2 the gradient is (alpha/2)*conj(z).
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class WeightEvaluationError(RuntimeError):
    """Non-finite weight data at a probe point."""


@dataclass(frozen=True)
class WeightModel:
    """Weight phi with declared ellipticity bounds 0 < m <= M."""

    dimension: int
    phi: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]       # complex gradient
    hessian: Callable[[complex], np.ndarray]       # real 2x2 at a point
    m: float
    M: float
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.m <= self.M):
            raise ValueError("bounds must satisfy 0 < m <= M")
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")

    @property
    def alpha(self) -> float:
        """Gaussian decay rate for quadrature sizing (uses the lower bound)."""
        if self.kind == "gaussian":
            return self.params["alpha"]
        return self.m


@dataclass(frozen=True)
class CertificationReport:
    passed: bool
    eig_min: float
    eig_max: float
    worst_violation: float
    worst_point: complex


def gaussian_weight(alpha: float = 1.0) -> WeightModel:
    """phi(z) = (alpha/2)|z|^2 with m = M = alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def phi(z):
        return 0.5 * alpha * np.abs(z) ** 2

    def grad(z):
        return 0.5 * alpha * np.conj(z)

    def hessian(z):
        return alpha * np.eye(2)

    return WeightModel(1, phi, grad, hessian, m=alpha, M=alpha,
                       kind="gaussian", params={"alpha": alpha})


def perturbed_gaussian_weight(eps: float = 0.1) -> WeightModel:
    """phi(z) = |z|^2/2 + eps*sin(Re z); Hessian diag(1 - eps*sin(x), 1)."""
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")

    def phi(z):
        return 0.5 * np.abs(z) ** 2 + eps * np.sin(np.real(z))

    def grad(z):
        return 0.5 * np.conj(z) + 0.5 * eps * np.cos(np.real(z))

    def hessian(z):
        x = np.real(z)
        return np.array([[1.0 - eps * np.sin(x), 0.0], [0.0, 1.0]])

    return WeightModel(1, phi, grad, hessian, m=1.0 - eps, M=1.0 + eps,
                       kind="perturbed-gaussian", params={"eps": eps})


def certify_weight(w: WeightModel, probes, tol: float) -> CertificationReport:
    """Check the Hessian spectrum lies in [m - tol, M + tol] at every probe."""
    probes = np.atleast_1d(np.asarray(probes, dtype=complex))
    if probes.size == 0:
        raise ValueError("probe set must be non-empty")
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = np.inf, -np.inf
    worst, worst_pt = 0.0, probes[0]
    for z in probes:
        val = w.phi(np.asarray(z))
        H = np.asarray(w.hessian(complex(z)), dtype=float)
        if not (np.all(np.isfinite(H)) and np.isfinite(val)):
            raise WeightEvaluationError(f"non-finite weight data at z={z}")
        eigs = np.linalg.eigvalsh(0.5 * (H + H.T))
        lo = min(lo, eigs[0])
        hi = max(hi, eigs[-1])
        viol = max(w.m - eigs[0], eigs[-1] - w.M, 0.0)
        if viol > worst:
            worst, worst_pt = viol, complex(z)
    return CertificationReport(passed=worst <= tol, eig_min=float(lo),
                               eig_max=float(hi), worst_violation=float(worst),
                               worst_point=worst_pt)


def finite_difference_check(w: WeightModel, z: complex, h: float = 1e-4) -> float:
    """Max deviation of declared gradient/Hessian from central differences."""
    if h <= 0:
        raise ValueError("step must be positive")
    z = complex(z)

    def p(x, y):
        return float(w.phi(np.asarray(complex(x, y))))

    x, y = z.real, z.imag
    fx = (p(x + h, y) - p(x - h, y)) / (2 * h)
    fy = (p(x, y + h) - p(x, y - h)) / (2 * h)
    grad_fd = 0.5 * (fx - 1j * fy)
    dev = abs(grad_fd - complex(w.grad(np.asarray(z))))

    f0 = p(x, y)
    hxx = (p(x + h, y) - 2 * f0 + p(x - h, y)) / h ** 2
    hyy = (p(x, y + h) - 2 * f0 + p(x, y - h)) / h ** 2
    hxy = (p(x + h, y + h) - p(x + h, y - h)
           - p(x - h, y + h) + p(x - h, y - h)) / (4 * h ** 2)
    H_fd = np.array([[hxx, hxy], [hxy, hyy]])
    dev_h = np.max(np.abs(H_fd - np.asarray(w.hessian(z), dtype=float)))
    return float(max(dev, dev_h))
