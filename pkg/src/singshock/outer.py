"""Compactified phase space and the outer heteroclinic layers.

Coordinates are (beta, r, kappa, w1, w2, xi) with beta = u1/sqrt(u2),
r = 1/sqrt(u2) and kappa = eps/r. The desingularised field below is the
self-similar viscous system written in these variables; its time sigma is
related to the fast time tau of the physical system by d tau = r d sigma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MissedTarget, NonpositiveU2
from .flux import RiemannAnalysis, State2
from .inner import RHO, RHO3, TAIL_RATE, IotaTable, InnerConstants, beta_field
from .numerics import EventSpec, IntegratorConfig, Trajectory, fd_jacobian, integrate

STATE_NAMES = ("beta", "r", "kappa", "w1", "w2", "xi")


@dataclass(frozen=True)
class CompactPoint:
    beta: float
    r: float
    kappa: float
    w1: float
    w2: float
    xi: float

    def __post_init__(self):
        if self.r < 0.0 or self.kappa < 0.0:
            raise ValueError("r and kappa must be nonnegative")

    def as_array(self) -> np.ndarray:
        return np.array([self.beta, self.r, self.kappa, self.w1, self.w2, self.xi])

    @classmethod
    def from_array(cls, y) -> "CompactPoint":
        return cls(*(float(v) for v in y))


def default_shift(analysis: RiemannAnalysis) -> float:
    """u2 shift M making both end states have u2 + M >= 1."""
    return max(0.0, 1.0 - min(analysis.uL[1], analysis.uR[1]))


def compactify(u, shift: float = 0.0) -> tuple[float, float]:
    u = State2.of(u)
    v2 = u.u2 + shift
    if v2 <= 0.0:
        raise NonpositiveU2(f"u2 + shift = {v2} <= 0")
    q = math.sqrt(v2)
    return u.u1 / q, 1.0 / q


def decompactify(beta: float, r: float, shift: float = 0.0) -> State2:
    if r <= 0.0:
        raise NonpositiveU2("r must be positive to decompactify")
    return State2(beta / r, 1.0 / (r * r) - shift)


def shift_slow(w, xi: float, shift: float) -> np.ndarray:
    """(w1, w2) in shifted coordinates: (w1 - M, w2 - xi M)."""
    return np.array([w[0] - shift, w[1] - xi * shift])


def unshift_slow(w, xi, shift: float) -> np.ndarray:
    return np.array([np.asarray(w[0]) + shift, np.asarray(w[1]) + np.asarray(xi) * shift])


def brk_field(_t, y):
    b, r, k, w1, w2, x = y
    return np.array([
        beta_field(b) + r * (-b * x / 2.0 + r * (b * b / 2.0 - w1) + r * r * b * w2 / 2.0),
        -b**3 * r / 6.0 + r * r / 2.0 * (x + r * b + r * r * w2),
        b**3 * k / 6.0 - r / 2.0 * (k * x + r * b * k + r * r * k * w2),
        -k * b * r,
        -k,
        k * r * r,
    ])


def fast_field_2d(point, frozen) -> tuple[float, float]:
    b, r = point
    w1, w2, x = frozen
    d = brk_field(0.0, np.array([b, r, 0.0, w1, w2, x]))
    return float(d[0]), float(d[1])


def sf_u12(u, w, xi: float) -> np.ndarray:
    """Physical fast field du/dtau = f(u) - xi u - w."""
    u1, u2 = u
    return np.array([u1 * u1 - u2 - xi * u1 - w[0], u1**3 / 3.0 - u1 - xi * u2 - w[1]])


@dataclass(frozen=True)
class EquilibriumLinearization:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    point: np.ndarray


def jacobian_at_P(which: str, xi: float, w=(0.0, 0.0)) -> EquilibriumLinearization:
    """Finite-difference linearisation of the (beta, r, kappa) block at P_L or P_R."""
    beta = {"P_L": RHO3, "P_R": RHO[1]}[which]
    p = np.array([beta, 0.0, 0.0])

    def F(z):
        return brk_field(0.0, np.array([z[0], z[1], z[2], w[0], w[1], xi]))[:3]

    J = fd_jacobian(F, p, step=1e-5)
    lam, vec = np.linalg.eig(J)
    order = np.argsort(-lam.real)
    return EquilibriumLinearization(J, lam[order].real, vec[:, order].real, p)


def closed_form_eigenvalues_PL() -> np.ndarray:
    return np.array([2.0 * math.sqrt(3.0) * RHO3 / 3.0, TAIL_RATE, -TAIL_RATE])


@dataclass(frozen=True)
class HeteroclinicResult:
    trajectory: Trajectory
    launch_point: CompactPoint
    section_point: CompactPoint
    endpoint_error: float
    target: tuple[float, float]


def default_r0(analysis: RiemannAnalysis, shift: float | None = None) -> float:
    M = default_shift(analysis) if shift is None else shift
    return 0.5 * min(compactify(analysis.uL, M)[1], compactify(analysis.uR, M)[1])


def _saddle_direction(beta_p: float, xi: float, lam_r: float) -> np.ndarray:
    # (beta, r) eigenvector for the r-direction eigenvalue lam_r at (beta_p, 0)
    a_beta = -(4.0 * beta_p**3 - 12.0 * beta_p) / 6.0
    v = np.array([beta_p * xi / 2.0, a_beta - lam_r])
    v /= np.linalg.norm(v)
    return v if v[1] > 0.0 else -v


def _heteroclinic(analysis, side: str, r0, delta_launch, end_tol, horizon, cfg):
    M = default_shift(analysis)
    if side == "L":
        beta_p, lam_r, sign = RHO3, -TAIL_RATE, -1.0
        u, w = analysis.uL, analysis.wL_array
    else:
        beta_p, lam_r, sign = RHO[1], TAIL_RATE, 1.0
        u, w = analysis.uR, analysis.wR_array
    xi = analysis.s
    ws = shift_slow(w, xi, M)
    target = compactify(u, M)
    if r0 is None:
        r0 = default_r0(analysis, M)
    v = _saddle_direction(beta_p, xi, lam_r)
    y0 = np.array([beta_p + delta_launch * v[0], delta_launch * v[1], 0.0, ws[0], ws[1], xi])
    tb, tr = target

    def near(_t, y):
        return math.hypot(y[0] - tb, y[1] - tr) - end_tol

    def escape(_t, y):
        return max(abs(y[0]), abs(y[1])) - 50.0

    events = [
        EventSpec(near, direction=-1, terminal=True, name="target"),
        EventSpec(lambda _t, y: y[1] - r0, name="section"),
        EventSpec(escape, direction=1, terminal=True, name="escape"),
        EventSpec(lambda _t, y: y[1], direction=-1, terminal=True, name="escape"),
    ]
    traj = integrate(brk_field, y0, (0.0, sign * horizon), cfg, events)
    if traj.status != "event:target":
        raise MissedTarget(f"gamma{1 if side == 'L' else 2} did not reach its end state ({traj.status})")
    hits = traj.events_named("section")
    if len(hits) != 1:
        raise MissedTarget(f"r = {r0} crossed {len(hits)} times, expected once")
    err = math.hypot(traj.y_final[0] - tb, traj.y_final[1] - tr)
    return HeteroclinicResult(traj, CompactPoint.from_array(y0), CompactPoint.from_array(hits[0].y),
                              err, target)


def compute_gamma1(analysis: RiemannAnalysis, r0: float | None = None, delta_launch: float = 1e-7,
                   end_tol: float = 1e-10, horizon: float = 1e4,
                   cfg: IntegratorConfig | None = None) -> HeteroclinicResult:
    """Stable manifold of the saddle P_L traced backward to compactify(u_L)."""
    return _heteroclinic(analysis, "L", r0, delta_launch, end_tol, horizon, cfg)


def compute_gamma2(analysis: RiemannAnalysis, r0: float | None = None, delta_launch: float = 1e-7,
                   end_tol: float = 1e-10, horizon: float = 1e4,
                   cfg: IntegratorConfig | None = None) -> HeteroclinicResult:
    """Unstable manifold of the saddle P_R traced forward to compactify(u_R)."""
    return _heteroclinic(analysis, "R", r0, delta_launch, end_tol, horizon, cfg)


def inner_w2_drop(kappa: float, w1: float, xi: float, side: str, span: float = 60.0,
                  cfg: IntegratorConfig | None = None) -> float:
    """Change of w2 along the r = 0 orbit from beta = 0 to its saturated end.

    ``side='L'`` runs backward (towards beta = rho3), ``'R'`` forward.
    """
    y0 = np.array([0.0, 0.0, kappa, w1, 0.0, xi])
    sign = -1.0 if side == "L" else 1.0
    traj = integrate(brk_field, y0, (0.0, sign * span), cfg or IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14))
    tail = traj.y_final[2] / TAIL_RATE
    # remaining exponential tail of int kappa, added in closed form
    return float(traj.y_final[4] - sign * tail)


@dataclass(frozen=True)
class TransversalityReport:
    frame_L: np.ndarray  # rows are tangent vectors in (beta, r, kappa, w1, w2, xi)
    frame_R: np.ndarray
    q0: np.ndarray
    combined_rank: int
    intersection_dim: int
    singular_values: np.ndarray
    dw2_dK_L: float
    dw2_dK_R: float


def transversality_frames(analysis: RiemannAnalysis, constants: InnerConstants,
                          table: IotaTable | None = None, h: float = 1e-4,
                          rank_tol: float = 1e-6) -> TransversalityReport:
    """Tangent frames of the two flow-outs at q0 and their combined rank on {r = 0}.

    Each frame holds the flow direction, the derivative with respect to the
    kappa amplitude K at beta = 0 (its w2 entry computed by finite
    differences of integrated orbits) and the base-point direction along
    the line of equilibria.
    """
    k0 = constants.kappa0
    w1 = analysis.wL[0]
    xi = analysis.s
    drop = constants.iota3_at_0 if table is None else table.iota3_at_0
    q0 = np.array([0.0, 0.0, k0, w1, analysis.wL[1] - k0 * drop, xi])
    flow = brk_field(0.0, q0)

    # w2(beta=0) = w2_end - (w2 change from 0 to the end)
    def w2_at_gamma(K, side):
        return -inner_w2_drop(K, w1, xi, side)

    dL = (w2_at_gamma(k0 + h, "L") - w2_at_gamma(k0 - h, "L")) / (2 * h)
    dR = (w2_at_gamma(k0 + h, "R") - w2_at_gamma(k0 - h, "R")) / (2 * h)
    uL, uR = analysis.uL, analysis.uR
    frame_L = np.array([flow, [0, 0, 1, 0, dL, 0], [0, 0, 0, -uL[0], -uL[1], 1]], dtype=float)
    frame_R = np.array([flow, [0, 0, 1, 0, dR, 0], [0, 0, 0, -uR[0], -uR[1], 1]], dtype=float)
    keep = [0, 2, 3, 4, 5]  # drop r: restriction to {r = 0}
    A, B = frame_L[:, keep], frame_R[:, keep]
    stacked = np.vstack([A, B])
    sv = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(sv > rank_tol * sv[0]))
    rA = np.linalg.matrix_rank(A, tol=rank_tol)
    rB = np.linalg.matrix_rank(B, tol=rank_tol)
    return TransversalityReport(frame_L, frame_R, q0, rank, int(rA + rB - rank), sv, dL, dR)
