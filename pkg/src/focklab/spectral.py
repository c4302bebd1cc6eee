"""Truncated Hankel operators, singular spectra, and the Berezin layer.

The Gram of the Hankel images is
    G_{jk} = <f e_j, f e_k>_{2phi} - sum_{m<=D'} <f e_j, e_m> conj(<f e_k, e_m>),
with the projection truncated at D' = D + margin.  Singular values are
square roots of its eigenvalues; compactness and essential-norm questions
are read off the tail of the spectrum.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fock import FockBasis, KernelEval, build_basis, \
    default_rule_for_degree, evaluate_projection, lp_norm, \
    normalized_kernel, project
from .lattice import Lattice
from .oscillation import g_functional
from .quadrature import BallRule, PlaneRule, ball_rule
from .symbols import Symbol
from .weights import WeightModel

PSD_TOL = 1e-10


class NumericalConsistencyError(RuntimeError):
    """PSD violation beyond tolerance in a Gram matrix."""


@dataclass(frozen=True)
class HankelGram:
    symbol_name: str
    basis: FockBasis
    matrix: np.ndarray
    margin: int
    stability_shift: float     # top-10 singular move when margin grows by 5


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray         # non-increasing, nonnegative
    degree: int
    projection_degree: int
    stability_shift: float = np.nan


@dataclass(frozen=True)
class SchattenGauge:
    """Gauge h; h(0) = 0 and monotonicity are enforced on a grid.

    Midpoint convexity of h(sqrt(.)) is recorded in `sqrt_convex` rather
    than enforced: the gauges p < 2 are still useful as comparison
    functionals even though they sit outside the theorem's hypothesis.
    """
    h: Callable[[np.ndarray], np.ndarray]
    scale: float = 1.0
    name: str = "gauge"
    sqrt_convex: bool = field(init=False, default=True)

    def __post_init__(self):
        t = np.linspace(0.0, 4.0, 41)
        vals = self.h(t)
        if abs(float(self.h(np.asarray(0.0)))) > 1e-12:
            raise ValueError("gauge must satisfy h(0) = 0")
        if np.any(np.diff(vals) < -1e-12):
            raise ValueError("gauge must be increasing")
        g = self.h(np.sqrt(t))
        mid = self.h(np.sqrt((t[:-2] + t[2:]) / 2.0))
        convex = not np.any(mid > (g[:-2] + g[2:]) / 2.0 + 1e-10)
        object.__setattr__(self, "sqrt_convex", bool(convex))


def power_gauge(p: float) -> SchattenGauge:
    if p <= 0:
        raise ValueError("power gauge needs p > 0")
    return SchattenGauge(h=lambda t: np.asarray(t, dtype=float) ** p,
                         name=f"power-{p}")


@dataclass(frozen=True)
class MeasureModel:
    kind: str                                   # density | atomic
    density: Optional[Callable] = None
    atoms: tuple = field(default_factory=tuple)  # ((point, mass), ...)

    def __post_init__(self):
        if self.kind not in ("density", "atomic"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "atomic" and any(m <= 0 for _, m in self.atoms):
            raise ValueError("atomic masses must be positive")


def _gram_once(f: Symbol, big: FockBasis, hankel_degree: int,
               proj_degree: int, rule: PlaneRule,
               fvals: np.ndarray | None = None) -> np.ndarray:
    nodes = rule.nodes
    fv = f(nodes) if fvals is None else fvals
    if not np.all(np.isfinite(fv)):
        raise ValueError("symbol evaluation failed on the plane rule")
    decay = np.exp(-2.0 * big.weight.phi(nodes))
    wE = rule.weights * decay
    E = big.evaluate(nodes, kmax=proj_degree)
    FE = fv[:, None] * E[:, :hankel_degree + 1]
    # residual form of (I - P): Gram of pointwise residuals is PSD by
    # construction and avoids the cancellation of <fe_j, fe_k> - M M^H
    M = np.conj(E).T @ (wE[:, None] * FE)        # (Dp+1, D+1)
    R = FE - E @ M
    G = np.conj(R).T @ (wE[:, None] * R)
    return 0.5 * (G + np.conj(G).T)


def build_hankel_gram(f: Symbol, basis: FockBasis, margin: int = 10,
                      rule: PlaneRule | None = None,
                      fvals: np.ndarray | None = None,
                      stability_check: bool = True) -> HankelGram:
    """Hankel Gram matrix with a margin-stability certificate."""
    Dp = basis.degree + margin
    if rule is None:
        # sized for the largest Gram integrand (degree ~ 2*(Dp+5) plus
        # low-order symbol growth)
        rule = default_rule_for_degree(Dp + 5, basis.weight.alpha, margin=8)
    big = build_basis(basis.weight, Dp + 5, rule)
    G = _gram_once(f, big, basis.degree, Dp, rule, fvals)
    shift = np.nan
    if stability_check:
        G2 = _gram_once(f, big, basis.degree, Dp + 5, rule, fvals)
        s1 = _singular_from_gram(G)
        s2 = _singular_from_gram(G2)
        shift = float(np.max(np.abs(s1[:10] - s2[:10])))
    return HankelGram(symbol_name=f.name, basis=basis, matrix=G,
                      margin=margin, stability_shift=shift)


def _singular_from_gram(G: np.ndarray) -> np.ndarray:
    eigs = np.linalg.eigvalsh(G)
    trace = float(np.trace(np.real(G)))
    if eigs[0] < -PSD_TOL * max(trace, 1.0):
        raise NumericalConsistencyError(
            f"Gram not PSD: min eigenvalue {eigs[0]:.3e} vs trace {trace:.3e}")
    return np.sqrt(np.clip(eigs, 0.0, None))[::-1]


def singular_spectrum(G: HankelGram) -> SingularSpectrum:
    return SingularSpectrum(values=_singular_from_gram(G.matrix),
                            degree=G.basis.degree,
                            projection_degree=G.basis.degree + G.margin,
                            stability_shift=G.stability_shift)


@dataclass(frozen=True)
class SchattenSums:
    partial_sums: np.ndarray
    total: float
    tail_ratio: float          # last-quartile increment / total
    convergent: bool


_ZERO_TOTAL = 1e-8


def schatten_sum(S: SingularSpectrum, gauge: SchattenGauge,
                 tail_threshold: float = 1e-3) -> SchattenSums:
    """Partial sums of h(c * s_k) with a tail-convergence flag."""
    terms = gauge.h(gauge.scale * S.values)
    sums = np.cumsum(terms)
    total = float(sums[-1])
    k = len(terms)
    tail = float(np.sum(terms[3 * k // 4:]))
    ratio = tail / total if total > 0 else 0.0
    # a numerically-zero total is trivially summable, whatever its tail
    convergent = total <= _ZERO_TOTAL or ratio < tail_threshold
    return SchattenSums(partial_sums=sums, total=total, tail_ratio=ratio,
                        convergent=convergent)


def hankel_on_kernel(f: Symbol, z: complex, q: float, K: KernelEval,
                     rule: PlaneRule | None = None) -> float:
    """||H_f(k_z)||_{q,phi} via projection of f * k_z."""
    rule = K.basis.rule if rule is None else rule
    kz = normalized_kernel(K, z)
    g = f(rule.nodes) * kz(rule.nodes)
    coeffs = project(K, g, rule)
    resid = g - evaluate_projection(K, coeffs, rule.nodes)
    return lp_norm(resid, q, rule, K.basis.weight)


@dataclass(frozen=True)
class EssentialNormEstimate:
    estimate: float
    slope: float
    window: tuple
    reliable: bool


def essential_norm_tail(S: SingularSpectrum,
                        window: tuple | None = None,
                        slope_threshold: float = 0.05) -> EssentialNormEstimate:
    """Plateau (median) of s_k over the window [D/2, 3D/4]."""
    D = S.degree
    if window is None:
        window = (D // 2, 3 * D // 4 + 1)
    lo, hi = window
    if hi - lo < 2 or hi > len(S.values):
        raise ValueError("spectrum too short for the plateau window")
    seg = S.values[lo:hi]
    est = float(np.median(seg))
    slope = float(np.polyfit(np.arange(lo, hi), seg, 1)[0])
    reliable = abs(slope) * (hi - lo) <= max(slope_threshold * est,
                                             slope_threshold * 1e-2)
    return EssentialNormEstimate(estimate=est, slope=slope,
                                 window=(lo, hi), reliable=reliable)


def smooth_cutoff(t: float) -> Symbol:
    """Radial cutoff: 1 on |z| <= t, cubic ramp to 0 at |z| = t + 1."""
    if t <= 0:
        raise ValueError("t must be positive")

    def sigma(z):
        rho = np.abs(z)
        u = np.clip(rho - t, 0.0, 1.0)
        return (1.0 - 3.0 * u ** 2 + 2.0 * u ** 3).astype(complex)

    def dbar(z):
        rho = np.abs(z)
        u = np.clip(rho - t, 0.0, 1.0)
        ds = -6.0 * u + 6.0 * u ** 2           # d sigma / d rho
        safe = np.where(rho > 0, rho, 1.0)
        return (0.5 * ds * z / safe).astype(complex)

    return Symbol(evaluator=sigma, dbar=dbar, support_radius=t + 1.0,
                  smoothness="C1", name=f"cutoff-{t}", params={"t": t})


@dataclass(frozen=True)
class ApproximantResult:
    t: float
    gap: float                 # top singular value of H_{f - h_t}
    h_t_values: np.ndarray     # on the plane-rule nodes
    solver_c0: complex


def compact_approximant(f: Symbol, decomp, solver, t: float,
                        basis: FockBasis, margin: int = 10,
                        rule: PlaneRule | None = None) -> ApproximantResult:
    """Build h_t = psi_t + sigma_t f_2 and the gap ||H_f - H_{h_t}||.

    psi_t = A_phi(sigma_t dbar f_1) so that dbar psi_t = sigma_t dbar f_1;
    the gap is the top singular value of the Hankel Gram of f - h_t.
    """
    from .dbar import ZeroOneForm                 # local: avoid cycle
    rule = basis.rule if rule is None else rule
    sigma = smooth_cutoff(t)
    nodes = rule.nodes

    def masked(xi, field):
        """sigma_t * field, evaluating field only inside supp(sigma_t)."""
        xi = np.asarray(xi, dtype=complex)
        s = sigma(xi)
        out = np.zeros(xi.shape, dtype=complex)
        mask = s != 0
        if np.any(mask):
            out[mask] = s[mask] * field(xi[mask])
        return out

    omega = ZeroOneForm(lambda xi: masked(xi, decomp.dbar_f1),
                        decay="compact", support_radius=t + 1.0)
    psi_vals = solver.apply(omega, nodes)
    h_vals = psi_vals + masked(nodes, decomp.f2)
    diff_vals = f(nodes) - h_vals
    diff = Symbol(evaluator=lambda z: np.full(np.shape(z), np.nan),
                  name=f"{f.name}-minus-ht")
    G = build_hankel_gram(diff, basis, margin, rule, fvals=diff_vals,
                          stability_check=False)
    S = singular_spectrum(G)
    return ApproximantResult(t=float(t), gap=float(S.values[0]),
                             h_t_values=h_vals, solver_c0=solver.c0)


def berezin_transform(mu: MeasureModel, K: KernelEval, z: complex,
                      rule: PlaneRule | None = None) -> float:
    """mu~(z) = integral |k_z|^2 e^{-2phi} dmu."""
    phi = K.basis.weight.phi
    kz = normalized_kernel(K, z)
    if mu.kind == "atomic":
        pts = np.array([a for a, _ in mu.atoms], dtype=complex)
        masses = np.array([m for _, m in mu.atoms])
        vals = np.abs(kz(pts)) ** 2 * np.exp(-2.0 * phi(pts))
        return float(np.sum(masses * vals))
    rule = K.basis.rule if rule is None else rule
    dens = (np.ones(rule.nodes.shape) if mu.density is None
            else np.asarray(mu.density(rule.nodes), dtype=float))
    if np.any(dens < 0):
        raise ValueError("measure density must be nonnegative")
    integrand = np.abs(kz(rule.nodes)) ** 2 * np.exp(
        -2.0 * phi(rule.nodes)) * dens
    return float(np.real(rule.integrate(integrand)))


def measure_average(mu: MeasureModel, z: complex, r: float,
                    rule: BallRule | None = None) -> float:
    """mu^_r(z) = mu(B(z, r)) / |B(z, r)|."""
    if r <= 0:
        raise ValueError("r must be positive")
    area = np.pi * r ** 2
    if mu.kind == "atomic":
        total = sum(m for a, m in mu.atoms if abs(a - z) < r)
        return float(total / area)
    if rule is None:
        rule = ball_rule(z, r)
    elif rule.center != z or rule.radius != r:
        rule = ball_rule(z, r)
    dens = (np.ones(rule.nodes.shape) if mu.density is None
            else np.asarray(mu.density(rule.nodes), dtype=float))
    return float(np.real(rule.integrate(dens)) / area)


@dataclass(frozen=True)
class SchattenVerdict:
    c: float
    integral_value: float
    integral_convergent: bool
    sum_value: float
    sum_convergent: bool

    @property
    def agree(self) -> bool:
        return self.integral_convergent == self.sum_convergent


def schatten_h_criterion(f: Symbol, gauge: SchattenGauge, r: float, d: int,
                         L: Lattice, S: SingularSpectrum,
                         c_grid=(0.5, 1.0, 2.0),
                         tail_threshold: float = 1e-3) -> list[SchattenVerdict]:
    """Compare finiteness proxies of the G-integral and the s_k-sum.

    The integral side is a lattice Riemann sum of h(c G_{2,r}(f)); its
    convergence flag looks at the contribution of the outer radial
    quartile of lattice cells, mirroring the tail flag of the sum side.
    """
    G = g_functional(f, L.points, r, 2.0, d)
    radii = np.abs(L.points)
    order = np.argsort(radii)
    verdicts = []
    for c in c_grid:
        terms = np.asarray(gauge.h(c * G)) * L.cell_area
        total = float(np.sum(terms))
        sorted_terms = terms[order]
        k = len(sorted_terms)
        tail = float(np.sum(sorted_terms[3 * k // 4:]))
        int_ratio = tail / total if total > 0 else 0.0
        int_conv = total <= _ZERO_TOTAL or int_ratio < tail_threshold
        ssum = schatten_sum(S, SchattenGauge(h=gauge.h, scale=c,
                                             name=gauge.name),
                            tail_threshold)
        verdicts.append(SchattenVerdict(
            c=float(c), integral_value=total, integral_convergent=int_conv,
            sum_value=ssum.total, sum_convergent=ssum.convergent))
    return verdicts
