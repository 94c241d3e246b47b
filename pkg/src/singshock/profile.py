"""Viscous profiles for eps > 0 by two-sided shooting from the section beta = 0.

Unknowns are the point (kappa, w1, w2, xi) on the section {beta = 0} (r is
implied by r kappa = eps). From there the orbit is integrated backward until
it settles on the fast equilibrium over its (w, xi), and forward likewise.
The four residuals are the differences between those equilibria and the
prescribed end states u_L, u_R. Launching from the section keeps both legs
short and the Newton matrix well conditioned; the classical unknowns
(position along the lines of left/right equilibria and approach angles) are
recovered afterwards as diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import HypothesisViolated, NoConvergence, SectionMiss, SingShockError
from .flux import RiemannAnalysis, jacobian
from .inner import InnerConstants
from .output import write_csv
from .numerics import EventSpec, IntegratorConfig, Trajectory, integrate, solve_root
from .outer import (
    CompactPoint, brk_field, compactify, default_r0, default_shift, shift_slow, unshift_slow,
)


@dataclass(frozen=True)
class ProfileConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    land_tol: float = 1e-9
    newton_tol: float = 1e-10
    max_iter: int = 40
    horizon: float = 1e4
    r0: float | None = None
    per_step: int = 32
    surface_tol: float = 1e-6

    @property
    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol)


@dataclass(frozen=True)
class SectionPoint:
    """Matching unknowns on the section beta = 0 (shifted coordinates)."""

    kappa: float
    w1: float
    w2: float
    xi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.kappa, self.w1, self.w2, self.xi])

    @classmethod
    def singular_guess(cls, analysis: RiemannAnalysis, constants: InnerConstants) -> "SectionPoint":
        M = default_shift(analysis)
        wL = shift_slow(analysis.wL, analysis.s, M)
        wR = shift_slow(analysis.wR, analysis.s, M)
        return cls(constants.kappa0, wL[0], 0.5 * (wL[1] + wR[1]), analysis.s)


@dataclass(frozen=True)
class ShootingUnknowns:
    """Position along the equilibrium lines and approach angles at the ends.

    alpha is xi at landing minus s; the angle is the direction from which
    the orbit approaches the end state, measured in the eigenbasis of
    Df(u) - xi I there.
    """

    alpha1: float
    theta: float
    alpha2: float
    phi: float


@dataclass(frozen=True)
class Maxima:
    max_u2: float
    xi_max_u2: float
    beta_at_max_u2: float
    max_u1: float
    xi_max_u1: float
    beta_at_max_u1: float
    min_u1: float
    xi_min_u1: float
    beta_at_min_u1: float


@dataclass
class ProfileSolution:
    epsilon: float
    section: SectionPoint
    sigma: np.ndarray
    states: np.ndarray  # compact (beta, r, kappa, w1, w2, xi) along sigma, shifted coordinates
    xi_grid: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    layer: tuple[float, float]
    T1: float
    T2: float
    beta_unit_xi: tuple[float, float]
    match_residual: float
    surface_deviation: float
    shooting: ShootingUnknowns
    evaluations: int
    shift: float = 0.0
    maxima: Maxima | None = field(default=None)

    @property
    def xi_width(self) -> float:
        """xi distance between the beta = +1 and beta = -1 crossings of the inner layer."""
        return self.beta_unit_xi[1] - self.beta_unit_xi[0]

    @property
    def layer_width(self) -> float:
        return self.layer[1] - self.layer[0]

    @property
    def T_layer(self) -> float:
        return self.T1 + self.T2

    @property
    def beta(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def r(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def kappa(self) -> np.ndarray:
        return self.states[:, 2]

    def u(self, xi: float) -> np.ndarray:
        """Profile value at xi, constant end states outside the computed range."""
        if xi <= self.xi_grid[0]:
            return np.array([self.u1[0], self.u2[0]])
        if xi >= self.xi_grid[-1]:
            return np.array([self.u1[-1], self.u2[-1]])
        return np.array([np.interp(xi, self.xi_grid, self.u1), np.interp(xi, self.xi_grid, self.u2)])

    def write_csv(self, path: str | Path) -> None:
        write_csv(path, ["xi", "u1", "u2", "w1", "w2"], zip(self.xi_grid, self.u1, self.u2, self.w1, self.w2))


def equilibrium(w, xi: float, u0, iters: int = 8) -> np.ndarray:
    """Fast equilibrium f(u) - xi u = w nearest to u0 (plain Newton)."""
    u = np.array(u0, dtype=float)
    for _ in range(iters):
        g = np.array([u[0] ** 2 - u[1] - xi * u[0] - w[0], u[0] ** 3 / 3.0 - u[0] - xi * u[1] - w[1]])
        J = np.array([[2.0 * u[0] - xi, -1.0], [u[0] ** 2 - 1.0, -xi]])
        u = u - np.linalg.solve(J, g)
    return u


def _fast_residual(y) -> float:
    b, r, _, w1, w2, x = y
    u1, u2 = b / r, 1.0 / (r * r)
    return math.hypot(u1 * u1 - u2 - x * u1 - w1, u1**3 / 3.0 - u1 - x * u2 - w2)


@dataclass
class Leg:
    trajectory: Trajectory
    landed: np.ndarray
    surface_deviation: float


def _leg(z: np.ndarray, eps: float, direction: int, cfg: ProfileConfig, r0: float) -> Leg:
    k, w1, w2, x = z
    if k <= 0.0:
        raise SectionMiss(f"kappa = {k} on the section is not positive")
    y0 = np.array([0.0, eps / k, k, w1, w2, x])
    worst = [0.0]

    def watch(_t, y):
        worst[0] = max(worst[0], abs(y[1] * y[2] / eps - 1.0))

    events = [
        EventSpec(lambda _t, y: _fast_residual(y) - cfg.land_tol, direction=-1, terminal=True, name="land"),
        EventSpec(lambda _t, y: y[1] - r0, direction=1, name="r0"),
        EventSpec(lambda _t, y: y[0] - 1.0, name="beta+1"),
        EventSpec(lambda _t, y: y[0] + 1.0, name="beta-1"),
        EventSpec(lambda _t, y: y[1], direction=-1, terminal=True, name="r<0"),
    ]
    traj = integrate(brk_field, y0, (0.0, direction * cfg.horizon), cfg.integrator, events, watch)
    if traj.status != "event:land":
        raise NoConvergence(f"leg ({'+' if direction > 0 else '-'}) did not settle: {traj.status}")
    return Leg(traj, traj.y_final.copy(), worst[0])


def match_residual_vector(z, eps: float, analysis: RiemannAnalysis, cfg: ProfileConfig,
                          r0: float, shift: float) -> np.ndarray:
    uL = analysis.uL + np.array([0.0, shift])
    uR = analysis.uR + np.array([0.0, shift])
    yl = _leg(np.asarray(z), eps, -1, cfg, r0).landed
    yr = _leg(np.asarray(z), eps, +1, cfg, r0).landed
    el = equilibrium(yl[3:5], yl[5], (yl[0] / yl[1], 1.0 / yl[1] ** 2))
    er = equilibrium(yr[3:5], yr[5], (yr[0] / yr[1], 1.0 / yr[1] ** 2))
    return np.concatenate([el - uL, er - uR])


def launch_state(analysis: RiemannAnalysis, side: str, alpha: float, angle: float,
                 delta_launch: float, epsilon: float) -> CompactPoint:
    """Compactified point delta_launch away from u_side in the 2D eigenplane.

    The base is (u_side, w_side - alpha u_side, s + alpha); both eigenvalues
    of Df(u_side) - (s + alpha) I must be positive on the left and negative
    on the right.
    """
    u = analysis.uL if side == "L" else analysis.uR
    w = (analysis.wL_array if side == "L" else analysis.wR_array) - alpha * u
    xi = analysis.s + alpha
    lam, vec = np.linalg.eig(jacobian(u) - xi * np.eye(2))
    lam = lam.real
    if side == "L" and not np.all(lam > 0.0):
        raise HypothesisViolated(f"eigenvalues {lam} at u_L are not both positive")
    if side == "R" and not np.all(lam < 0.0):
        raise HypothesisViolated(f"eigenvalues {lam} at u_R are not both negative")
    order = np.argsort(lam)
    v = vec[:, order].real
    v /= np.linalg.norm(v, axis=0)
    p = u + delta_launch * (math.cos(angle) * v[:, 0] + math.sin(angle) * v[:, 1])
    M = default_shift(analysis)
    beta, r = compactify(p, M)
    ws = shift_slow(w, xi, M)
    return CompactPoint(beta, r, epsilon / r, ws[0], ws[1], xi)


def _approach_angle(traj: Trajectory, u_end: np.ndarray, xi: float, shift: float) -> float:
    # direction of u - u_end a few steps before landing, in the eigenbasis
    y = traj.states[max(0, len(traj.states) - 4)]
    d = np.array([y[0] / y[1], 1.0 / y[1] ** 2 - shift]) - u_end
    lam, vec = np.linalg.eig(jacobian(u_end) - xi * np.eye(2))
    vec = vec[:, np.argsort(lam.real)].real
    c = np.linalg.solve(vec / np.linalg.norm(vec, axis=0), d)
    return float(math.atan2(c[1], c[0]))


def _first(traj: Trajectory, name: str):
    ev = traj.first_event(name)
    if ev is None:
        raise SectionMiss(f"no '{name}' crossing on a profile leg")
    return ev


def _crossing(traj: Trajectory, name: str) -> tuple[float, float]:
    """(sigma, xi) of the first crossing, NaN if the leg never crosses."""
    ev = traj.first_event(name)
    if ev is None:
        return math.nan, math.nan
    return float(ev.t), float(ev.y[5])


def shoot_match(analysis: RiemannAnalysis, constants: InnerConstants, epsilon: float,
                guess: SectionPoint | None = None, cfg: ProfileConfig | None = None) -> ProfileSolution:
    """Solve for the viscous profile at ``epsilon``."""
    cfg = cfg or ProfileConfig()
    if not (analysis.h1_holds and analysis.h2_holds):
        raise HypothesisViolated("profile construction needs H1 and H2")
    if not (0.0 < epsilon <= 0.05):
        raise ValueError(f"epsilon = {epsilon} outside (0, 0.05]")
    M = default_shift(analysis)
    r0 = cfg.r0 if cfg.r0 is not None else default_r0(analysis, M)
    z0 = (guess or SectionPoint.singular_guess(analysis, constants)).as_array()
    if epsilon / z0[0] >= 2.0 * r0:
        raise SectionMiss(f"section point r = {epsilon / z0[0]:.3g} lies outside the end states")

    count = [0]

    def F(z):
        count[0] += 1
        return match_residual_vector(z, epsilon, analysis, cfg, r0, M)

    z = solve_root(F, z0, tol=cfg.newton_tol, max_iter=cfg.max_iter, central=False)
    res = float(np.linalg.norm(F(z)))
    left = _leg(z, epsilon, -1, cfg, r0)
    right = _leg(z, epsilon, +1, cfg, r0)
    return assemble(analysis, epsilon, SectionPoint(*map(float, z)), left, right, res, r0, M, cfg, count[0])


def assemble(analysis, epsilon, section, left: Leg, right: Leg, residual, r0, shift, cfg, evaluations):
    tl, yl = left.trajectory.refined(cfg.per_step)
    tr, yr = right.trajectory.refined(cfg.per_step)
    sigma = np.concatenate([tl[::-1], tr[1:]])
    states = np.vstack([yl[::-1], yr[1:]])
    b, r, _, w1, w2, x = states.T
    u1 = b / r
    u2 = 1.0 / (r * r) - shift
    w = unshift_slow((w1, w2), x, shift)

    # at large eps the section itself may sit above r = r0; markers are then NaN
    t_in, xi_in = _crossing(left.trajectory, "r0")
    t_out, xi_out = _crossing(right.trajectory, "r0")
    b_plus = _first(left.trajectory, "beta+1")
    b_minus = _first(right.trajectory, "beta-1")

    uL, uR = analysis.uL, analysis.uR
    yl_end, yr_end = left.landed, right.landed
    shooting = ShootingUnknowns(
        alpha1=float(yl_end[5] - analysis.s),
        theta=_approach_angle(left.trajectory, uL, yl_end[5], shift),
        alpha2=float(yr_end[5] - analysis.s),
        phi=_approach_angle(right.trajectory, uR, yr_end[5], shift),
    )
    sol = ProfileSolution(
        epsilon=float(epsilon),
        section=section,
        sigma=sigma,
        states=states,
        xi_grid=x.copy(),
        u1=u1,
        u2=u2,
        w1=np.asarray(w[0], dtype=float),
        w2=np.asarray(w[1], dtype=float),
        layer=(xi_in, xi_out),
        T1=-t_in,
        T2=t_out,
        beta_unit_xi=(float(b_plus.y[5]), float(b_minus.y[5])),
        match_residual=float(residual),
        surface_deviation=max(left.surface_deviation, right.surface_deviation),
        shooting=shooting,
        evaluations=evaluations,
        shift=shift,
    )
    sol.maxima = max_argmax(sol)
    return sol


def max_argmax(profile: ProfileSolution) -> Maxima:
    i2 = int(np.argmax(profile.u2))
    ip = int(np.argmax(profile.u1))
    im = int(np.argmin(profile.u1))
    b = profile.beta
    x = profile.xi_grid
    return Maxima(
        float(profile.u2[i2]), float(x[i2]), float(b[i2]),
        float(profile.u1[ip]), float(x[ip]), float(b[ip]),
        float(profile.u1[im]), float(x[im]), float(b[im]),
    )


def geometric_eps(start: float, ratio: float, stop: float) -> list[float]:
    """start, start*ratio, ... while >= stop (with a small slack on the last)."""
    if not (0.0 < ratio < 1.0) or start <= 0.0 or stop <= 0.0:
        raise ValueError("need 0 < ratio < 1 and positive endpoints")
    out = []
    e = start
    while e >= stop * (1.0 - 1e-9) or (out and e >= 0.95 * stop):
        out.append(e)
        e *= ratio
    return out


def continuation(analysis: RiemannAnalysis, constants: InnerConstants, eps_list: Iterable[float],
                 cfg: ProfileConfig | None = None, guess: SectionPoint | None = None):
    """Yield (epsilon, solution or exception) along a decreasing eps list.

    Each solve starts from the previous section point; the sweep stops at
    the first failure.
    """
    for eps in eps_list:
        try:
            sol = shoot_match(analysis, constants, eps, guess, cfg)
        except SingShockError as exc:
            yield eps, exc
            return
        guess = sol.section
        yield eps, sol


@dataclass
class ScalingReport:
    epsilons: np.ndarray
    eps2_max_u2: np.ndarray
    eps_max_u1: np.ndarray
    eps_min_u1: np.ndarray
    T_layer: np.ndarray
    xi_widths: np.ndarray
    layer_widths: np.ndarray
    match_residuals: np.ndarray
    kappa0_sq_ref: float
    omega0_ref: float
    solutions: list[ProfileSolution]
    failure: str | None = None

    def write_csv(self, path: str | Path) -> None:
        cols = ["epsilon", "eps2_max_u2", "eps_max_u1", "eps_min_u1", "T_layer", "xi_width",
                "layer_width", "match_residual", "kappa0_sq", "omega0"]
        rows = ([self.epsilons[i], self.eps2_max_u2[i], self.eps_max_u1[i], self.eps_min_u1[i],
                 self.T_layer[i], self.xi_widths[i], self.layer_widths[i], self.match_residuals[i],
                 self.kappa0_sq_ref, self.omega0_ref] for i in range(len(self.epsilons)))
        write_csv(path, cols, rows)


def scaling_from_solutions(solutions: list[ProfileSolution], constants: InnerConstants,
                           failure: str | None = None) -> ScalingReport:
    eps = np.array([p.epsilon for p in solutions])
    return ScalingReport(
        epsilons=eps,
        eps2_max_u2=np.array([p.epsilon**2 * p.maxima.max_u2 for p in solutions]),
        eps_max_u1=np.array([p.epsilon * p.maxima.max_u1 for p in solutions]),
        eps_min_u1=np.array([p.epsilon * p.maxima.min_u1 for p in solutions]),
        T_layer=np.array([p.T_layer for p in solutions]),
        xi_widths=np.array([p.xi_width for p in solutions]),
        layer_widths=np.array([p.layer_width for p in solutions]),
        match_residuals=np.array([p.match_residual for p in solutions]),
        kappa0_sq_ref=constants.kappa0**2,
        omega0_ref=constants.omega0,
        solutions=list(solutions),
        failure=failure,
    )


def measure_scaling(analysis: RiemannAnalysis, constants: InnerConstants, eps_list: Iterable[float],
                    cfg: ProfileConfig | None = None) -> ScalingReport:
    """Continuation sweep; partial results are kept if a solve fails."""
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    sols, failure = [], None
    for eps, out in continuation(analysis, constants, eps_list, cfg):
        if isinstance(out, Exception):
            failure = f"eps={eps:.6g}: {type(out).__name__}: {out}"
            break
        sols.append(out)
    return scaling_from_solutions(sols, constants, failure)


def section_beta_check(profile: ProfileSolution) -> float:
    """beta at the matching point; zero by construction."""
    i = int(np.argmin(np.abs(profile.sigma)))
    return float(profile.beta[i])


def log_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept of y against x."""
    A = np.column_stack([x, np.ones_like(x)])
    (m, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(m), float(c)


def width_halving_factors(eps: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """width(e) / width(e/2) by log-log interpolation along the sweep."""
    le, lw = np.log(eps[::-1]), np.log(widths[::-1])
    out = []
    for e in eps:
        h = math.log(e / 2.0)
        if h < le[0]:
            continue
        out.append(math.exp(np.interp(math.log(e), le, lw) - np.interp(h, le, lw)))
    return np.array(out)


__all__ = [
    "ProfileConfig", "SectionPoint", "ShootingUnknowns", "Maxima", "ProfileSolution", "ScalingReport",
    "equilibrium", "launch_state", "shoot_match", "max_argmax", "geometric_eps", "continuation",
    "measure_scaling", "scaling_from_solutions", "width_halving_factors", "log_fit",
]
