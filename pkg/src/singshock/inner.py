"""Inner (blown-up) dynamics on {r = 0}.

With r = 0 the compactified system decouples into

    beta'  = -(beta^4 - 6 beta^2 + 6) / 6
    kappa' = beta^3 kappa / 6
    w2'    = -kappa

and w1, xi frozen. ``iota1`` is the beta-orbit through beta(0) = 0, ``iota2``
the normalised kappa-factor and ``iota3`` its integral from -infinity; the
connecting orbit gamma0 is assembled from these with amplitude kappa0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import HypothesisViolated, MatchFailure, TailNotConverged
from .flux import RiemannAnalysis
from .output import write_csv
from .numerics import IntegratorConfig, Trajectory, integrate, solve_root

SQRT3 = math.sqrt(3.0)
RHO = (
    -math.sqrt(3.0 + SQRT3),
    -math.sqrt(3.0 - SQRT3),
    math.sqrt(3.0 - SQRT3),
    math.sqrt(3.0 + SQRT3),
)
RHO3 = RHO[2]
# asymptotic decay rate of iota2 as sigma -> -infinity (beta -> rho3)
TAIL_RATE = RHO3**3 / 6.0


def beta_field(beta):
    return -(beta**4 - 6.0 * beta**2 + 6.0) / 6.0


def _iota_field(_t, y):
    b, i2, _ = y
    return np.array([beta_field(b), b**3 * i2 / 6.0, i2])


@dataclass(frozen=True)
class IotaTable:
    grid: np.ndarray
    iota1: np.ndarray
    iota2: np.ndarray
    iota3: np.ndarray
    sigma0: float
    iota3_at_0: float
    span: float
    _left: Trajectory
    _right: Trajectory

    def _eval(self, sigma: float) -> np.ndarray:
        """(iota1, iota2, iota3) at one sigma in [-span, span] from dense output."""
        if sigma <= 0.0:
            b, i2, j = self._left(sigma)
        else:
            b, i2, j = self._right(sigma)
        return np.array([b, i2, self.iota3_at_0 + j])

    def at(self, sigma: float) -> np.ndarray:
        if abs(sigma) > self.span:
            return self._extend(sigma)
        return self._eval(sigma)

    def _extend(self, sigma: float) -> np.ndarray:
        # beyond the table iota1 is saturated; iota2 decays exponentially
        if sigma < 0.0:
            b, i2, _ = self._eval(-self.span)
            i2s = i2 * math.exp(TAIL_RATE * (sigma + self.span))
            return np.array([RHO3, i2s, i2s / TAIL_RATE])
        b, i2, i3 = self._eval(self.span)
        i2s = i2 * math.exp(-TAIL_RATE * (sigma - self.span))
        return np.array([RHO[1], i2s, i3 + (i2 - i2s) / TAIL_RATE])

    def iota1_at(self, sigma: float) -> float:
        return float(self.at(sigma)[0])

    def iota2_at(self, sigma: float) -> float:
        return float(self.at(sigma)[1])

    def iota3_at(self, sigma: float) -> float:
        return float(self.at(sigma)[2])

    def write_csv(self, path: str | Path) -> None:
        write_csv(path, ["sigma", "iota1", "iota2", "iota3"],
                  zip(self.grid, self.iota1, self.iota2, self.iota3))


def build_iota_table(span: float = 25.0, tol: float = 1e-10, spacing: float = 1e-3,
                     cfg: IntegratorConfig | None = None) -> IotaTable:
    """Integrate iota1 with iota2 and int_0^sigma iota2 carried alongside.

    iota3(0) is the backward integral to -span plus the closed-form tail of
    the exponential iota2(-span) * exp(TAIL_RATE (sigma + span)).
    """
    cfg = cfg or IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15)
    y0 = np.array([0.0, 1.0, 0.0])
    left = integrate(_iota_field, y0, (0.0, -span), cfg)
    right = integrate(_iota_field, y0, (0.0, span), cfg)
    bL, i2L, jL = left.y_final
    bR = right.y_final[0]
    miss = max(abs(bL - RHO3), abs(bR - RHO[1]))
    if miss > tol:
        raise TailNotConverged(f"|iota1(+-{span}) - rho| = {miss:.2e} > {tol:.1e}")
    iota3_0 = -jL + i2L / TAIL_RATE

    n = int(round(span / spacing))
    half = np.linspace(0.0, span, n + 1)
    grid = np.concatenate([-half[:0:-1], half])
    vals = np.empty((grid.size, 3))
    # dense-output evaluation, vectorised per step
    for traj, mask in ((left, grid <= 0.0), (right, grid > 0.0)):
        g = grid[mask]
        ts = traj.times
        out = np.empty((g.size, 3))
        if ts[-1] < ts[0]:
            idx = np.clip(np.searchsorted(-ts, -g, side="right") - 1, 0, len(traj.interpolants) - 1)
        else:
            idx = np.clip(np.searchsorted(ts, g, side="right") - 1, 0, len(traj.interpolants) - 1)
        for k in np.unique(idx):
            sel = idx == k
            out[sel] = traj.interpolants[k](g[sel]).T
        vals[mask] = out
    vals[:, 2] += iota3_0
    vals[grid == 0.0] = (0.0, 1.0, iota3_0)

    # sigma0: iota1(sigma0) = 1 on the left branch
    k = int(np.argmin(np.abs(vals[: n + 1, 0] - 1.0)))
    sigma0 = float(solve_root(lambda s: left(float(s))[0] - 1.0, grid[k], tol=1e-13))

    return IotaTable(grid, vals[:, 0].copy(), vals[:, 1].copy(), vals[:, 2].copy(),
                     sigma0, float(iota3_0), float(span), left, right)


@dataclass(frozen=True)
class InnerConstants:
    rho: tuple[float, float, float, float]
    kappa0: float
    omega0: float
    iota3_at_0: float
    iota2_at_sigma0: float
    sigma0: float


def matching_constants(analysis: RiemannAnalysis, table: IotaTable) -> InnerConstants:
    """kappa0 = e0 / (2 iota3(0)) and omega0 = kappa0 iota2(sigma0).

    kappa0 is taken with the sign that makes w2 drop by e0 along gamma0 under
    w2' = -kappa. e0 = 0 gives the degenerate kappa0 = 0 (no inner layer).
    """
    if analysis.e0 < 0.0:
        raise HypothesisViolated(f"e0 = {analysis.e0} < 0 (H2 fails)")
    if table.iota3_at_0 <= 0.0:
        raise HypothesisViolated("iota3(0) must be positive")
    kappa0 = analysis.e0 / (2.0 * table.iota3_at_0)
    i2s0 = table.iota2_at(table.sigma0)
    return InnerConstants(RHO, kappa0, kappa0 * i2s0, table.iota3_at_0, i2s0, table.sigma0)


@dataclass(frozen=True)
class Gamma0Trajectory:
    sigma: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray
    w2: np.ndarray
    w1: float
    xi: float
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    match_gap: float

    @property
    def w2_limits(self) -> tuple[float, float]:
        """w2 at -infinity and +infinity: table ends plus closed-form tails."""
        return (float(self.w2[0] + self.kappa[0] / TAIL_RATE),
                float(self.w2[-1] - self.kappa[-1] / TAIL_RATE))

    @property
    def total_w2_drop(self) -> float:
        lo, hi = self.w2_limits
        return lo - hi

    def write_csv(self, path: str | Path) -> None:
        write_csv(path, ["sigma", "beta", "kappa", "w2"], zip(self.sigma, self.beta, self.kappa, self.w2))


def half_solution(table: IotaTable, side: str, kappa_bar: float, w2_bar: float):
    """The r = 0 half-orbits through beta = 0 with kappa(0) = kappa_bar.

    ``side='-'`` is pinned to ``w2_bar`` at sigma = -infinity, ``'+'`` at
    +infinity. Returns (beta, kappa, w2) callables of sigma.
    """
    if side == "-":
        return (table.iota1_at,
                lambda s: kappa_bar * table.iota2_at(s),
                lambda s: w2_bar - kappa_bar * table.iota3_at(s))
    if side == "+":
        return (table.iota1_at,
                lambda s: kappa_bar * table.iota2_at(s),
                lambda s: w2_bar + kappa_bar * table.iota3_at(-s))
    raise ValueError(side)


def build_gamma0(analysis: RiemannAnalysis, constants: InnerConstants, table: IotaTable,
                 tol: float = 1e-10) -> Gamma0Trajectory:
    """Assemble gamma0 from the two half-solutions sharing kappa0."""
    k0 = constants.kappa0
    w2L, w2R = analysis.wL[1], analysis.wR[1]
    g = table.grid
    left = g <= 0.0
    w2 = np.where(left, w2L - k0 * table.iota3, 0.0)
    # iota2 is even, so int_sigma^inf iota2 = iota3(-sigma)
    w2[~left] = w2R + k0 * table.iota3[::-1][~left]
    gap = abs((w2L - k0 * table.iota3_at_0) - (w2R + k0 * table.iota3_at_0))
    if gap > tol * max(1.0, abs(w2L)):
        raise MatchFailure(f"half-solutions disagree at sigma=0 by {gap:.3e}")
    return Gamma0Trajectory(
        sigma=g.copy(),
        beta=table.iota1.copy(),
        kappa=k0 * table.iota2,
        w2=w2,
        w1=analysis.wL[0],
        xi=analysis.s,
        start=(RHO3, 0.0, w2L),
        end=(RHO[1], 0.0, w2R),
        match_gap=gap,
    )
