"""Layer integrals and distributional pairings of computed profiles.

Inside the computed xi-range the profile is integrated by the trapezoid
rule on its own orbit grid, in the orbit time sigma with d xi = kappa r^2
d sigma: u2 d xi = kappa d sigma and u1 d xi = beta kappa r d sigma are
smooth in sigma even where u2 ~ eps^-2 lives on an eps^2-wide xi window.
Outside the computed range the profile equals its end states and those
pieces are done by adaptive quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .flux import RiemannAnalysis
from .output import write_csv
from .numerics import quad
from .profile import ProfileSolution


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported function; ``support`` is (a, b) in 1D or
    ((x0, x1), (t0, t1)) in 2D. Evaluators must accept numpy arrays."""

    __test__ = False  # not a pytest class

    evaluator: Callable
    support: tuple

    def __call__(self, *args):
        return self.evaluator(*args)


def _bump_profile(z):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    m = np.abs(z) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - z[m] ** 2))
    return out


def bump(center: float, radius: float, height: float = 1.0) -> TestFunction:
    """C-infinity bump equal to ``height`` at ``center``, vanishing beyond ``radius``."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    return TestFunction(lambda x: height * _bump_profile((np.asarray(x) - center) / radius),
                        (center - radius, center + radius))


def separable(fx: TestFunction, ft: TestFunction) -> TestFunction:
    """phi(x, t) = fx(x) ft(t); the time support must lie in t > 0."""
    if ft.support[0] <= 0.0:
        raise ValueError("time support must lie in t > 0")
    return TestFunction(lambda x, t: fx(x) * ft(t), (fx.support, ft.support))


@dataclass(frozen=True)
class LayerIntegrals:
    I_u1: float
    I_u2: float
    I_abs_u1: float
    tail_L: float
    tail_R: float
    w2_drop: float  # w2(xi_in) - w2(xi_out), equal to I_u2 in exact arithmetic


def _trapz(y, x) -> float:
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))


def layer_integrals(profile: ProfileSolution, analysis: RiemannAnalysis) -> LayerIntegrals:
    xi_in, xi_out = profile.layer
    if not (math.isfinite(xi_in) and math.isfinite(xi_out)):
        raise ValueError("profile has no layer markers at this epsilon")
    x, u1, u2 = profile.xi_grid, profile.u1, profile.u2
    sg, v1, v2, _ = _sigma_window(profile, xi_in, xi_out)
    left = x <= xi_in
    right = x >= xi_out
    dL = np.abs(u1 - analysis.uL[0]) + np.abs(u2 - analysis.uL[1])
    dR = np.abs(u1 - analysis.uR[0]) + np.abs(u2 - analysis.uR[1])
    w2 = profile.w2
    return LayerIntegrals(
        I_u1=_trapz(v1, sg),
        I_u2=_trapz(v2, sg),
        I_abs_u1=_trapz(np.abs(v1), sg),
        tail_L=_trapz(dL[left], x[left]),
        tail_R=_trapz(dR[right], x[right]),
        w2_drop=float(np.interp(xi_in, x, w2) - np.interp(xi_out, x, w2)),
    )


@dataclass(frozen=True)
class PairingReport:
    computed: np.ndarray
    predicted: np.ndarray
    discrepancy: float
    epsilon: float

    @property
    def component_discrepancy(self) -> np.ndarray:
        return np.abs(self.computed - self.predicted)


def _sigma_window(profile: ProfileSolution, a: float, b: float):
    """sigma nodes covering xi in [a, b] with u1 dxi/dsigma and u2 dxi/dsigma."""
    x, sig = profile.xi_grid, profile.sigma
    sa, sb = np.interp([a, b], x, sig)
    m = (sig > sa) & (sig < sb)
    sg = np.concatenate([[sa], sig[m], [sb]])
    st = np.column_stack([np.interp(sg, sig, profile.states[:, j]) for j in range(6)])
    st[1:-1] = profile.states[m]
    beta, r, kappa = st[:, 0], st[:, 1], st[:, 2]
    dxi = kappa * r * r
    g1 = beta * kappa * r
    g2 = kappa - profile.shift * dxi
    return sg, g1, g2, st[:, 5]


def _pair_profile(profile: ProfileSolution, psi: Callable, a: float, b: float) -> np.ndarray:
    """int_a^b psi(xi) u_eps(xi) d xi, vector valued."""
    x = profile.xi_grid
    lo, hi = x[0], x[-1]
    total = np.zeros(2)
    uL = np.array([profile.u1[0], profile.u2[0]])
    uR = np.array([profile.u1[-1], profile.u2[-1]])
    if a < lo:
        total += uL * quad(lambda t: float(psi(t)), a, min(lo, b))
    if b > hi:
        total += uR * quad(lambda t: float(psi(t)), max(hi, a), b)
    if lo < b and hi > a:
        sg, g1, g2, xs = _sigma_window(profile, max(a, lo), min(b, hi))
        p = np.asarray(psi(xs), dtype=float)
        total += np.array([_trapz(p * g1, sg), _trapz(p * g2, sg)])
    return total


def predicted_1d(analysis: RiemannAnalysis, psi: TestFunction) -> np.ndarray:
    a, b = psi.support
    s = analysis.s
    f = lambda t: float(psi(t))  # noqa: E731
    left = quad(f, a, min(s, b)) if a < s else 0.0
    right = quad(f, max(a, s), b) if b > s else 0.0
    return (analysis.uL * left + analysis.uR * right
            + np.array([0.0, analysis.e0]) * float(psi(s)))


def pair_1d(profile: ProfileSolution, psi: TestFunction, analysis: RiemannAnalysis) -> PairingReport:
    a, b = psi.support
    comp = _pair_profile(profile, psi, a, b)
    pred = predicted_1d(analysis, psi)
    return PairingReport(comp, pred, float(np.max(np.abs(comp - pred))), profile.epsilon)


def _gauss(a: float, b: float, n: int):
    z, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * z + 0.5 * (a + b), 0.5 * (b - a) * w


def pair_2d(profile: ProfileSolution, phi: TestFunction, analysis: RiemannAnalysis,
            nodes: int = 48) -> PairingReport:
    """int int phi(x, t) u_eps(x / t) dx dt against the step-plus-moving-delta limit.

    With x = t xi the inner integral is a 1D pairing of xi -> t phi(t xi, t);
    the outer t-integral uses Gauss-Legendre nodes.
    """
    (x0, x1), (t0, t1) = phi.support
    if t0 <= 0.0:
        raise ValueError("phi must be supported in t > 0")
    ts, ws = _gauss(t0, t1, nodes)
    s = analysis.s
    comp = np.zeros(2)
    pred = np.zeros(2)
    for t, w in zip(ts, ws):
        comp += w * _pair_profile(profile, lambda xi: t * phi(t * np.asarray(xi), t), x0 / t, x1 / t)
        g = lambda x: float(phi(x, t))  # noqa: E731
        st = s * t
        left = quad(g, x0, min(st, x1)) if st > x0 else 0.0
        right = quad(g, max(st, x0), x1) if st < x1 else 0.0
        pred += w * (analysis.uL * left + analysis.uR * right)
        pred[1] += w * analysis.e0 * t * float(phi(st, t))
    return PairingReport(comp, pred, float(np.max(np.abs(comp - pred))), profile.epsilon)


def write_pairing_csv(path: str | Path, rows: list[tuple[str, PairingReport]]) -> None:
    write_csv(path, ["label", "epsilon", "component", "computed", "predicted", "discrepancy"],
              ([label, rep.epsilon, c + 1, rep.computed[c], rep.predicted[c],
                abs(rep.computed[c] - rep.predicted[c])] for label, rep in rows for c in range(2)))
