"""Mean oscillation and integral-distance-to-analytic functionals.

The distance functional at a point is the normalized L^q(B(z, r))
distance from f to holomorphic functions on the ball, approximated from
above by least squares over polynomials of degree <= d in (w - z).
q = 2 is an exact projection; q != 2 uses iteratively reweighted least
squares, which converges since the problem is convex for q >= 1.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .quadrature import BallRule, ball_rule
from .symbols import Symbol

IRLS_ITERS = 25
IRLS_TOL = 1e-8
COND_CAP = 1e12


class DegreeCapError(RuntimeError):
    """Local polynomial basis too ill-conditioned at the requested degree."""


@dataclass(frozen=True)
class LocalApproximation:
    center: complex
    radius: float
    degree: int
    coeffs: np.ndarray         # coefficients of (w - center)^j
    residual: float            # approximates G_{q,r}(f)(center) from above

    def evaluate(self, z) -> np.ndarray:
        u = np.asarray(z, dtype=complex) - self.center
        return np.polynomial.polynomial.polyval(u, self.coeffs)


@dataclass(frozen=True)
class RadialProfile:
    sample_points: np.ndarray
    values: np.ndarray
    functional: str
    meta: dict

    @property
    def shell_radii(self) -> np.ndarray:
        return np.unique(np.round(np.abs(self.sample_points), 9))

    def shell_max(self, radius: float) -> float:
        mask = np.isclose(np.abs(self.sample_points), radius)
        return float(np.max(self.values[mask]))

    def final_shell_max(self) -> float:
        return self.shell_max(self.shell_radii[-1])

    def trend_slope(self) -> float:
        """Least-squares slope of shell maxima against shell radius."""
        radii = self.shell_radii
        maxima = np.array([self.shell_max(r) for r in radii])
        if len(radii) < 2:
            return 0.0
        return float(np.polyfit(radii, maxima, 1)[0])


def mean_oscillation(f: Symbol, z: complex, r: float, q: float,
                     rule: BallRule | None = None) -> float:
    """( |B(z,r)|^{-1} integral_B |f|^q dA )^{1/q}."""
    if q < 1:
        raise ValueError("q must be >= 1")
    rule = _rule_at(z, r, rule)
    vals = np.abs(f(rule.nodes)) ** q
    return float((np.real(rule.integrate(vals)) / rule.area) ** (1.0 / q))


def _rule_at(z: complex, r: float, rule: BallRule | None) -> BallRule:
    if rule is None:
        return ball_rule(z, r)
    if rule.radius != r or rule.center != z:
        return rule.shifted(z) if rule.radius == r else ball_rule(z, r)
    return rule


def ida_distance(f: Symbol, z: complex, r: float, q: float = 2.0,
                 d: int = 6, rule: BallRule | None = None) -> LocalApproximation:
    """Best degree-d holomorphic polynomial fit to f on B(z, r)."""
    if d < 0:
        raise ValueError("degree must be >= 0")
    if q < 1:
        raise ValueError("q must be >= 1")
    rule = _rule_at(z, r, rule)
    u = rule.nodes - z
    # columns (u/r)^j keep the Vandermonde well conditioned
    V = (u[:, None] / r) ** np.arange(d + 1)[None, :]
    fv = f(rule.nodes)
    area = rule.area
    sw = np.sqrt(rule.weights)

    def solve(weights_extra):
        A = (sw * weights_extra)[:, None] * V
        if np.linalg.cond(A) > COND_CAP:
            raise DegreeCapError(
                f"disk Vandermonde ill-conditioned at degree {d}")
        sol, *_ = np.linalg.lstsq(A, sw * weights_extra * fv, rcond=None)
        return sol

    ones = np.ones_like(sw)
    coeffs = solve(ones)
    if q != 2.0:
        prev = np.inf
        for _ in range(IRLS_ITERS):
            res = np.abs(fv - V @ coeffs)
            wq = np.maximum(res, 1e-12) ** ((q - 2.0) / 2.0)
            coeffs = solve(wq)
            cur = _q_residual(fv, V, coeffs, rule.weights, area, q)
            if abs(prev - cur) <= IRLS_TOL * max(cur, 1e-30):
                break
            prev = cur
    residual = _q_residual(fv, V, coeffs, rule.weights, area, q)
    scaled = coeffs / r ** np.arange(d + 1)
    return LocalApproximation(center=complex(z), radius=float(r), degree=d,
                              coeffs=scaled, residual=residual)


def _q_residual(fv, V, coeffs, weights, area, q) -> float:
    res = np.abs(fv - V @ coeffs) ** q
    return float((np.real(np.sum(weights * res)) / area) ** (1.0 / q))


def g_functional(f: Symbol, z, r: float, q: float = 2.0, d: int = 6) -> np.ndarray:
    """G_{q,r}(f) sampled at points z (vector convenience wrapper)."""
    pts = np.atleast_1d(np.asarray(z, dtype=complex))
    base = ball_rule(0.0, r)
    return np.array([ida_distance(f, p, r, q, d, base.shifted(p)).residual
                     for p in pts])


def ida_norm(f: Symbol, s: float, q: float, r: float, L: Lattice,
             d: int = 6) -> float:
    """||G_{q,r}(f)||_{L^s} over the lattice (max for s = inf)."""
    if s != np.inf and s < 1:
        raise ValueError("s must be in [1, inf]")
    G = g_functional(f, L.points, r, q, d)
    if s == np.inf:
        return float(np.max(G))
    total = np.sum(G ** s) * L.cell_area
    # boundary ring check: outermost cells should not carry the mass
    margin = 2 * L.step
    interior = np.array([L.window.contains(p, margin) for p in L.points])
    boundary_part = np.sum(G[~interior] ** s) * L.cell_area
    if total > 0 and boundary_part / total > 0.01:
        warnings.warn("window too small: boundary cells contribute > 1% "
                      "of the IDA norm", stacklevel=2)
    return float(total ** (1.0 / s))


def vda_profile(f: Symbol, q: float, r: float, d: int, shells,
                n_angles: int = 12) -> RadialProfile:
    """Per-shell samples of G_{q,r}(f); the limsup surrogate."""
    shells = np.asarray(shells, dtype=float)
    if np.any(np.diff(shells) <= 0):
        raise ValueError("shells must be strictly increasing")
    angles = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    pts = (shells[:, None] * angles[None, :]).ravel()
    vals = g_functional(f, pts, r, q, d)
    return RadialProfile(sample_points=pts, values=vals, functional="G",
                         meta={"q": q, "r": r, "d": d})


def m_profile(f: Symbol, q: float, r: float, shells,
              n_angles: int = 12) -> RadialProfile:
    """Per-shell samples of the mean oscillation M_{q,r}(f)."""
    shells = np.asarray(shells, dtype=float)
    angles = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    pts = (shells[:, None] * angles[None, :]).ravel()
    base = ball_rule(0.0, r)
    vals = np.array([mean_oscillation(f, p, r, q, base.shifted(p))
                     for p in pts])
    return RadialProfile(sample_points=pts, values=vals, functional="M",
                         meta={"q": q, "r": r})
