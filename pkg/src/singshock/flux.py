"""Keyfitz-Kranzer flux, characteristic speeds and Riemann-data analysis.

Every derived shock constant used downstream (speed, w-states, singular
shock strength) is produced here and nowhere else.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DegenerateData


@dataclass(frozen=True)
class State2:
    u1: float
    u2: float

    def __post_init__(self):
        if not (np.isfinite(self.u1) and np.isfinite(self.u2)):
            raise ValueError(f"non-finite state ({self.u1}, {self.u2})")

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2], dtype=float)

    @classmethod
    def of(cls, value) -> "State2":
        if isinstance(value, State2):
            return value
        u1, u2 = value
        return cls(float(u1), float(u2))


@dataclass(frozen=True)
class RiemannData:
    uL: State2
    uR: State2

    def __post_init__(self):
        object.__setattr__(self, "uL", State2.of(self.uL))
        object.__setattr__(self, "uR", State2.of(self.uR))
        if self.uL == self.uR:
            raise ValueError("left and right states coincide")


@dataclass(frozen=True)
class RiemannAnalysis:
    data: RiemannData
    s: float
    wL: tuple[float, float]
    wR: tuple[float, float]
    e0: float
    h1_holds: bool
    h2_holds: bool

    @property
    def uL(self) -> np.ndarray:
        return self.data.uL.as_array()

    @property
    def uR(self) -> np.ndarray:
        return self.data.uR.as_array()

    @property
    def wL_array(self) -> np.ndarray:
        return np.array(self.wL)

    @property
    def wR_array(self) -> np.ndarray:
        return np.array(self.wR)


def flux(u) -> tuple[float, float]:
    """(u1^2 - u2, u1^3/3 - u1)."""
    u = State2.of(u)
    return (u.u1 * u.u1 - u.u2, u.u1**3 / 3.0 - u.u1)


def flux_array(u: np.ndarray) -> np.ndarray:
    """Vectorised flux on an array whose leading axis is the component axis."""
    u1, u2 = u[0], u[1]
    return np.stack([u1 * u1 - u2, u1**3 / 3.0 - u1])


def jacobian(u) -> np.ndarray:
    u = State2.of(u)
    return np.array([[2.0 * u.u1, -1.0], [u.u1 * u.u1 - 1.0, 0.0]])


def eigenvalues(u) -> tuple[float, float]:
    """Characteristic speeds (lambda_-, lambda_+) = (u1 - 1, u1 + 1)."""
    u1 = State2.of(u).u1
    return (u1 - 1.0, u1 + 1.0)


FluxFn = Callable[[State2], tuple[float, float]]


def _speeds(u: State2, flux_fn: FluxFn) -> tuple[float, float]:
    if flux_fn is flux:
        return eigenvalues(u)
    # finite-difference Jacobian for test fluxes; only real spectra are used
    h = 1e-6
    a = np.empty((2, 2))
    base = np.array([u.u1, u.u2])
    for j in range(2):
        dp, dm = base.copy(), base.copy()
        dp[j] += h
        dm[j] -= h
        a[:, j] = (np.array(flux_fn(State2.of(dp))) - np.array(flux_fn(State2.of(dm)))) / (2 * h)
    lam = np.sort(np.linalg.eigvals(a).real)
    return (float(lam[0]), float(lam[1]))


def _exact_constants(uL: State2, uR: State2):
    # Inputs are read as the shortest decimals that print as the given
    # floats, so data such as (2, 6), (-1.6, 4.56) give s = 0 with no
    # rounding residue; results are rounded once at the end.
    a1, a2, b1, b2 = (Fraction(repr(float(v))) for v in (uL.u1, uL.u2, uR.u1, uR.u2))

    def f(x1, x2):
        return (x1 * x1 - x2, x1**3 / 3 - x1)

    fL, fR = f(a1, a2), f(b1, b2)
    s = (fL[0] - fR[0]) / (a1 - b1)
    wL = (fL[0] - s * a1, fL[1] - s * a2)
    wR = (fR[0] - s * b1, fR[1] - s * b2)
    return s, wL, wR


def analyze(rd: RiemannData, flux_fn: FluxFn = flux) -> RiemannAnalysis:
    """Shock speed, w-states, singular-shock strength and hypothesis flags.

    ``s`` balances the first flux component, ``w = f(u) - s u`` on each side
    and ``e0 = w2L - w2R``. H1 is ``lambda_+(uR) < s < lambda_-(uL)``, H2 is
    ``e0 > 0``; both strict with no margin.
    """
    uL, uR = rd.uL, rd.uR
    if uL.u1 == uR.u1:
        raise DegenerateData("u1L == u1R: shock speed undefined")
    if flux_fn is flux:
        s, wL, wR = _exact_constants(uL, uR)
        e0 = float(wL[1] - wR[1])
        s, wL, wR = float(s), tuple(map(float, wL)), tuple(map(float, wR))
        h1 = eigenvalues(uR)[1] < s < eigenvalues(uL)[0]
        return RiemannAnalysis(rd, s, wL, wR, e0, bool(h1), bool(e0 > 0.0))
    fL = np.array(flux_fn(uL), dtype=float)
    fR = np.array(flux_fn(uR), dtype=float)
    s = (fL[0] - fR[0]) / (uL.u1 - uR.u1)
    wL = fL - s * uL.as_array()
    wR = fR - s * uR.as_array()
    e0 = float(wL[1] - wR[1])
    h1 = _speeds(uR, flux_fn)[1] < s < _speeds(uL, flux_fn)[0]
    return RiemannAnalysis(
        data=rd,
        s=float(s),
        wL=(float(wL[0]), float(wL[1])),
        wR=(float(wR[0]), float(wR[1])),
        e0=e0,
        h1_holds=bool(h1),
        h2_holds=bool(e0 > 0.0),
    )


SAMPLE_DATA = RiemannData(State2(2.0, 6.0), State2(-1.6, 4.56))
