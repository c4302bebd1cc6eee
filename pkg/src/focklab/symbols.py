"""Built-in symbol families with their analytic dbar data.

Every evaluator is vectorized over complex arrays.  Families without a
classical dbar derivative (the disk indicator) carry dbar=None and only
exercise the mean-oscillation machinery.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class Symbol:
    evaluator: Callable[[np.ndarray], np.ndarray]
    dbar: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support_radius: Optional[float] = None   # None => entire plane
    smoothness: str = "C2"                   # measurable | C1 | C2
    name: str = "symbol"
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=complex))

    def shifted(self, a: complex) -> "Symbol":
        ev = self.evaluator
        db = self.dbar
        return Symbol(
            evaluator=lambda z: ev(z - a),
            dbar=None if db is None else (lambda z: db(z - a)),
            support_radius=None if self.support_radius is None
            else self.support_radius + abs(a),
            smoothness=self.smoothness,
            name=f"{self.name}-shift",
            params=dict(self.params, shift=a))


FAMILY_IDS = ("holo-poly", "conj-linear", "conj-gaussian",
              "bump", "step", "mixed")


def _bump_parts(R: float):
    def f(z):
        rho2 = np.abs(z) ** 2
        body = (1.0 - rho2 / R ** 2) ** 2
        return np.where(rho2 < R ** 2, body, 0.0).astype(complex)

    def db(z):
        rho2 = np.abs(z) ** 2
        body = (-2.0 / R ** 2) * (1.0 - rho2 / R ** 2) * z
        return np.where(rho2 < R ** 2, body, 0.0).astype(complex)

    return f, db


def make(family_id: str, **params) -> Symbol:
    """Construct a symbol from one of the built-in families."""
    if family_id == "holo-poly":
        coeffs = np.asarray(params.get("coeffs", [0.0, 1.0]), dtype=complex)
        return Symbol(
            evaluator=lambda z: np.polynomial.polynomial.polyval(z, coeffs),
            dbar=lambda z: np.zeros(np.shape(z), dtype=complex),
            smoothness="C2", name="holo-poly",
            params={"coeffs": tuple(coeffs.tolist())})
    if family_id == "conj-linear":
        return Symbol(
            evaluator=lambda z: np.conj(z),
            dbar=lambda z: np.ones(np.shape(z), dtype=complex),
            smoothness="C2", name="conj-linear")
    if family_id == "conj-gaussian":
        beta = float(params.get("beta", 1.0))
        return Symbol(
            evaluator=lambda z: np.conj(z) * np.exp(-beta * np.abs(z) ** 2),
            dbar=lambda z: (1.0 - beta * np.abs(z) ** 2)
            * np.exp(-beta * np.abs(z) ** 2),
            smoothness="C2", name="conj-gaussian", params={"beta": beta})
    if family_id == "bump":
        R = float(params.get("radius", 1.0))
        f, db = _bump_parts(R)
        return Symbol(evaluator=f, dbar=db, support_radius=R,
                      smoothness="C1", name="bump", params={"radius": R})
    if family_id == "step":
        R = float(params.get("radius", 1.0))
        return Symbol(
            evaluator=lambda z: (np.abs(z) < R).astype(complex),
            dbar=None, support_radius=R, smoothness="measurable",
            name="step", params={"radius": R})
    if family_id == "mixed":
        R = float(params.get("radius", 1.0))
        f, db = _bump_parts(R)
        return Symbol(
            evaluator=lambda z: np.conj(z) + f(z),
            dbar=lambda z: 1.0 + db(z),
            smoothness="C1", name="mixed", params={"radius": R})
    raise ValueError(f"unknown symbol family {family_id!r}")
