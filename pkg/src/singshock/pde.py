"""Lax-Friedrichs solver for the undiffused conservation law with Riemann data."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InsufficientData, UnstableBlowup
from .output import write_csv
from .flux import RiemannData, analyze, flux_array


@dataclass(frozen=True)
class GridConfig:
    """Uniform cell grid and time stepping.

    ``dt_mode='adaptive'`` takes dt = cfl dx / lambda_max with lambda_max the
    current max |u1| + 1. ``'fixed'`` takes dt = cfl dx / lam_ref for the
    whole run (the mesh ratio dt/dx is then cfl / lam_ref).
    """

    x_min: float = -2.0
    x_max: float = 2.0
    cells: int = 2000
    cfl: float = 0.05
    steps: int = 50_000
    snapshot_every: int = 500
    dt_mode: str = "adaptive"
    lam_ref: float = 1.0
    boundary: str = "outflow"
    window_frac: float = 0.1

    def __post_init__(self):
        if self.cells < 100:
            raise ValueError("cells must be >= 100")
        if not (0.0 < self.cfl <= 0.5):
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.x_max <= self.x_min:
            raise ValueError("empty domain")
        if self.dt_mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown dt_mode {self.dt_mode!r}")
        if self.boundary not in ("outflow", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.steps < 1 or self.snapshot_every < 1 or self.lam_ref <= 0.0:
            raise ValueError("steps, snapshot_every and lam_ref must be positive")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.cells) + 0.5) * self.dx


@dataclass(frozen=True)
class FieldSnapshot:
    step: int
    t: float
    x: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    spike_mass_u2: float

    @property
    def max_u1(self) -> float:
        return float(self.u1.max())

    @property
    def max_u2(self) -> float:
        return float(self.u2.max())


def _ghost(a: np.ndarray, boundary: str) -> np.ndarray:
    if boundary == "periodic":
        return np.concatenate([a[-1:], a, a[:1]])
    return np.concatenate([a[:1], a, a[-1:]])


def lf_step(u: np.ndarray, ratio: float, boundary: str = "outflow") -> np.ndarray:
    """One Lax-Friedrichs update of the (2, n) cell array; ratio = dt/dx."""
    f = flux_array(u)
    U = np.stack([_ghost(u[0], boundary), _ghost(u[1], boundary)])
    F = np.stack([_ghost(f[0], boundary), _ghost(f[1], boundary)])
    return 0.5 * (U[:, :-2] + U[:, 2:]) - 0.5 * ratio * (F[:, 2:] - F[:, :-2])


def spike_mass(x: np.ndarray, u2: np.ndarray, t: float, rd: RiemannData, s: float, half_width: float,
               dx: float) -> float:
    """int (u2 - step background) over |x - s t| <= half_width."""
    xs = s * t
    bg = np.where(x < xs, rd.uL.u2, rd.uR.u2)
    m = np.abs(x - xs) <= half_width
    return float(np.sum(u2[m] - bg[m]) * dx)


def run_lf(rd: RiemannData, cfg: GridConfig, initial: np.ndarray | None = None) -> list[FieldSnapshot]:
    """Evolve Riemann data (or a supplied (2, cells) array) and snapshot periodically.

    Snapshots include t = 0 and the final step.
    """
    x = cfg.centers
    dx = cfg.dx
    if initial is None:
        u = np.stack([np.where(x < 0.0, rd.uL.u1, rd.uR.u1), np.where(x < 0.0, rd.uL.u2, rd.uR.u2)])
    else:
        u = np.array(initial, dtype=float)
    try:
        s = analyze(rd).s
    except ValueError:
        s = 0.0
    W = cfg.window_frac * (cfg.x_max - cfg.x_min)
    snaps = [FieldSnapshot(0, 0.0, x, u[0].copy(), u[1].copy(), spike_mass(x, u[1], 0.0, rd, s, W, dx))]
    t = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, cfg.steps + 1):
            if cfg.dt_mode == "fixed":
                lam = cfg.lam_ref
            else:
                lam = float(np.max(np.abs(u[0]))) + 1.0
            dt = cfg.cfl * dx / lam
            u = lf_step(u, dt / dx, cfg.boundary)
            t += dt
            if not np.all(np.isfinite(u)):
                raise UnstableBlowup(f"non-finite cell value at step {n} (t={t:.6g})")
            if n % cfg.snapshot_every == 0 or n == cfg.steps:
                snaps.append(FieldSnapshot(n, t, x, u[0].copy(), u[1].copy(),
                                           spike_mass(x, u[1], t, rd, s, W, dx)))
    return snaps


def fit_spike_growth(snapshots: list[FieldSnapshot], min_points: int = 5) -> tuple[float, float]:
    """Least-squares slope of spike mass against t over the last half of the run, and r^2."""
    if not snapshots:
        raise InsufficientData("no snapshots")
    t_end = snapshots[-1].t
    late = [sn for sn in snapshots if sn.t >= 0.5 * t_end]
    if len(late) < min_points:
        raise InsufficientData(f"{len(late)} late-time snapshots, need {min_points}")
    t = np.array([sn.t for sn in late])
    m = np.array([sn.spike_mass_u2 for sn in late])
    A = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, m, rcond=None)
    fit = A @ coef
    ss_res = float(np.sum((m - fit) ** 2))
    ss_tot = float(np.sum((m - m.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), r2


def waves_reach_boundary(snapshots: list[FieldSnapshot], rd: RiemannData, tol: float = 1e-6) -> bool:
    """True if the last snapshot differs from the end states at either boundary cell."""
    last = snapshots[-1]
    return bool(abs(last.u1[0] - rd.uL.u1) > tol or abs(last.u2[0] - rd.uL.u2) > tol
                or abs(last.u1[-1] - rd.uR.u1) > tol or abs(last.u2[-1] - rd.uR.u2) > tol)


def write_snapshot_csv(path: str | Path, snap: FieldSnapshot) -> None:
    write_csv(path, ["x", "u1", "u2"], zip(snap.x, snap.u1, snap.u2))


def write_summary_csv(path: str | Path, snapshots: list[FieldSnapshot]) -> None:
    write_csv(path, ["step", "t", "max_u1", "max_u2", "spike_mass"],
              ([sn.step, sn.t, sn.max_u1, sn.max_u2, sn.spike_mass_u2] for sn in snapshots))


def classical_shock_partner(uL, s_branch: str = "1", a: float = 0.5) -> tuple[tuple[float, float], float]:
    """Right state joined to uL by a Lax shock of this flux with u1 jump a = u1L - u1R.

    The Rankine-Hugoniot conditions reduce to
    s^2 - (u1L + u1R) s + (u1L^2 + u1L u1R + u1R^2)/3 - 1 = 0 and
    u2L - u2R = a (u1L + u1R - s); the root is picked by ``s_branch``.
    """
    u1L, u2L = float(uL[0]), float(uL[1])
    u1R = u1L - a
    b = u1L + u1R
    c = (u1L**2 + u1L * u1R + u1R**2) / 3.0 - 1.0
    disc = b * b - 4.0 * c
    if disc < 0.0:
        raise ValueError("no real shock speed for this jump")
    s = 0.5 * (b - math.sqrt(disc)) if s_branch == "1" else 0.5 * (b + math.sqrt(disc))
    u2R = u2L - a * (b - s)
    return (u1R, u2R), s
