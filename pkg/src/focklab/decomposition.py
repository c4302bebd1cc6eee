"""Lattice-subordinate partition of unity and the f = f1 + f2 splitting.

Each lattice point a_j carries a radial quartic bump supported in
B(a_j, 2r); the normalized bumps psi_j sum to one on the window interior.
f1 glues the local least-squares holomorphic approximants h_j (fitted on
B(a_j, 2r)) through the partition, and f2 = f - f1.  Since each h_j is
holomorphic, dbar f1 = sum_j h_j dbar psi_j in closed form.
"""

from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .oscillation import LocalApproximation, g_functional, ida_distance, \
    mean_oscillation
from .quadrature import ball_rule
from .symbols import Symbol


class InvalidProfileError(ValueError):
    """Bump profile not strictly positive on B(0, r)."""


@dataclass(frozen=True)
class PartitionOfUnity:
    lattice: Lattice
    support_radius: float      # 2r

    def _bump_data(self, z: np.ndarray):
        """Raw bumps b_j(z) and dbar b_j(z); shapes (npts, nz)."""
        z = np.asarray(z, dtype=complex).ravel()
        a = self.lattice.points
        u = z[None, :] - a[:, None]
        s = np.abs(u) ** 2 / self.support_radius ** 2
        inside = s < 1.0
        b = np.where(inside, (1.0 - s) ** 2, 0.0)
        db = np.where(inside, -2.0 * (1.0 - s) * u / self.support_radius ** 2,
                      0.0)
        return b, db

    def members(self, z) -> np.ndarray:
        """psi_j(z); shape (npts, nz)."""
        b, _ = self._bump_data(z)
        total = b.sum(axis=0)
        if np.any(total <= 0):
            raise InvalidProfileError(
                "partition denominator vanishes inside the window; "
                "lattice does not cover the query points")
        return b / total

    def members_dbar(self, z) -> np.ndarray:
        """dbar psi_j(z) from the closed-form bump derivative."""
        b, db = self._bump_data(z)
        total = b.sum(axis=0)
        if np.any(total <= 0):
            raise InvalidProfileError("partition denominator vanishes")
        dtotal = db.sum(axis=0)
        return (db * total - b * dtotal) / total ** 2


@dataclass(frozen=True)
class Decomposition:
    symbol: Symbol
    partition: PartitionOfUnity
    approximants: list[LocalApproximation]
    q: float
    degree: int

    def _h_matrix(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex).ravel()
        return np.stack([h.evaluate(z) for h in self.approximants])

    def f1(self, z) -> np.ndarray:
        zf = np.asarray(z, dtype=complex)
        psi = self.partition.members(zf)
        vals = np.sum(self._h_matrix(zf) * psi, axis=0)
        return vals.reshape(zf.shape)

    def f2(self, z) -> np.ndarray:
        zf = np.asarray(z, dtype=complex)
        return self.symbol(zf) - self.f1(zf)

    def dbar_f1(self, z) -> np.ndarray:
        zf = np.asarray(z, dtype=complex)
        dpsi = self.partition.members_dbar(zf)
        vals = np.sum(self._h_matrix(zf) * dpsi, axis=0)
        return vals.reshape(zf.shape)

    def f2_symbol(self) -> Symbol:
        return Symbol(evaluator=self.f2, name=f"{self.symbol.name}-f2")


def build_partition(L: Lattice, support_factor: float = 2.0) -> PartitionOfUnity:
    """Partition of unity with bumps supported in B(a_j, support_factor*r)."""
    if support_factor <= 1.0:
        raise InvalidProfileError(
            "bump support must exceed the covering radius r")
    return PartitionOfUnity(lattice=L, support_radius=support_factor * L.r)


def decompose(f: Symbol, P: PartitionOfUnity, q: float = 2.0,
              d: int = 6) -> Decomposition:
    """Fit h_j on B(a_j, 2r) and assemble f1 = sum h_j psi_j."""
    t = P.support_radius
    base = ball_rule(0.0, t)
    approx = [ida_distance(f, a, t, q, d, base.shifted(a))
              for a in P.lattice.points]
    return Decomposition(symbol=f, partition=P, approximants=approx,
                         q=q, degree=d)


@dataclass(frozen=True)
class ControlReport:
    sup_dbar_f1: float
    sup_m_f2: float
    max_ratio_dbar: float
    max_ratio_m: float
    g_values: np.ndarray
    probes: np.ndarray


def verify_controls(D: Decomposition, probes, r: float,
                    q: float = 2.0) -> ControlReport:
    """Empirical constants for |dbar f1| <~ G and M_{q,r}(f2) <~ G."""
    probes = np.atleast_1d(np.asarray(probes, dtype=complex))
    G = g_functional(D.symbol, probes, r, q, D.degree)
    dbar_vals = np.abs(D.dbar_f1(probes))
    f2s = D.f2_symbol()
    base = ball_rule(0.0, r)
    m_vals = np.array([mean_oscillation(f2s, p, r, q, base.shifted(p))
                       for p in probes])
    floor = max(1e-12, 1e-6 * float(np.max(G, initial=0.0)))
    denom = np.maximum(G, floor)
    return ControlReport(
        sup_dbar_f1=float(np.max(dbar_vals)),
        sup_m_f2=float(np.max(m_vals)),
        max_ratio_dbar=float(np.max(dbar_vals / denom)),
        max_ratio_m=float(np.max(m_vals / denom)),
        g_values=G, probes=probes)
