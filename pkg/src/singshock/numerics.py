"""Numerical kernels: adaptive ODE integration with events, quadrature, roots.

The stepper itself is scipy's embedded Dormand-Prince 8(5,3) pair; the step
loop, event location, step budget and blow-up guard live here so that every
accepted step is visible to callers (several invariants are checked per step).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy.optimize import brentq

from .errors import BlowUp, NoConvergence, SingularJacobian, StepLimitExceeded

Field = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_step: float = math.inf
    max_steps: int = 200_000
    blowup_norm: float = 1e12

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-2):
                raise ValueError(f"{name}={v} outside (0, 1e-2]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class EventSpec:
    """Zero crossing of ``function(t, y)``.

    ``direction`` is +1 (rising), -1 (falling) or 0 (any), measured along the
    direction of integration.
    """

    function: Callable[[float, np.ndarray], float]
    direction: int = 0
    terminal: bool = False
    name: str = ""


@dataclass(frozen=True)
class EventRecord:
    t: float
    y: np.ndarray
    event_id: int
    name: str = ""


@dataclass
class Trajectory:
    """Accepted integration steps plus per-step dense interpolants."""

    times: np.ndarray
    states: np.ndarray  # shape (n_points, dim)
    events: list[EventRecord] = field(default_factory=list)
    interpolants: list = field(default_factory=list, repr=False)
    status: str = "completed"

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.states[-1]

    def events_named(self, name: str) -> list[EventRecord]:
        return [e for e in self.events if e.name == name]

    def first_event(self, name: str) -> EventRecord | None:
        hits = self.events_named(name)
        return hits[0] if hits else None

    def __call__(self, t: float) -> np.ndarray:
        """Dense-output evaluation at a single time inside the trajectory."""
        ts = self.times
        forward = ts[-1] >= ts[0]
        if forward:
            k = int(np.searchsorted(ts, t, side="right")) - 1
        else:
            k = int(np.searchsorted(-ts, -t, side="right")) - 1
        k = min(max(k, 0), len(self.interpolants) - 1)
        return self.interpolants[k](t)

    def refined(self, per_step: int) -> tuple[np.ndarray, np.ndarray]:
        """Times/states with ``per_step`` dense samples inside each step.

        The native step endpoints are kept exactly; no uniform re-gridding.
        """
        if per_step <= 1 or not self.interpolants:
            return self.times.copy(), self.states.copy()
        ts = [self.times[:1]]
        ys = [self.states[:1]]
        frac = np.arange(1, per_step + 1) / per_step
        for k, interp in enumerate(self.interpolants):
            t0, t1 = self.times[k], self.times[k + 1]
            tk = t0 + (t1 - t0) * frac
            yk = interp(tk[:-1]).T if per_step > 1 else np.empty((0, self.states.shape[1]))
            ts.append(tk)
            ys.append(np.vstack([yk, self.states[k + 1][None, :]]))
        return np.concatenate(ts), np.vstack(ys)


def _locate(ev: EventSpec, interp, t0: float, t1: float, g0: float, g1: float) -> float:
    if g0 == 0.0:
        return t0
    if g1 == 0.0:
        return t1
    return brentq(lambda t: ev.function(t, interp(t)), t0, t1, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _crosses(direction: int, g0: float, g1: float) -> bool:
    if g0 == 0.0 or not (g1 == 0.0 or np.sign(g0) != np.sign(g1)):
        return False
    if direction > 0:
        return g0 < 0.0
    if direction < 0:
        return g0 > 0.0
    return True


def integrate(
    field: Field,
    y0: Sequence[float],
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    events: Sequence[EventSpec] = (),
    step_callback: Callable[[float, np.ndarray], None] | None = None,
) -> Trajectory:
    """Integrate ``y' = field(t, y)`` over ``t_span`` (forward or backward).

    Events are located on the dense output of each accepted step. A terminal
    event truncates the trajectory at the event point. Raises
    :class:`StepLimitExceeded` past ``cfg.max_steps`` and :class:`BlowUp`
    when the state norm exceeds ``cfg.blowup_norm`` or becomes non-finite.
    """
    cfg = cfg or IntegratorConfig()
    t0, tf = float(t_span[0]), float(t_span[1])
    y0 = np.asarray(y0, dtype=float)
    solver = _spi.DOP853(
        field, t0, y0, tf,
        rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step,
    )
    times = [t0]
    states = [y0.copy()]
    interps = []
    records: list[EventRecord] = []
    g_prev = [float(ev.function(t0, y0)) for ev in events]
    status = "completed"
    n = 0
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise NoConvergence(f"integrator failed at t={solver.t}: {msg}")
        n += 1
        if n > cfg.max_steps:
            raise StepLimitExceeded(f"more than {cfg.max_steps} steps (t={solver.t})")
        t_new, y_new = solver.t, solver.y.copy()
        if not np.all(np.isfinite(y_new)) or np.linalg.norm(y_new) > cfg.blowup_norm:
            raise BlowUp(f"state norm {np.linalg.norm(y_new):.3e} at t={t_new}")
        interp = solver.dense_output()
        t_old = solver.t_old
        terminal_hit: tuple[float, int] | None = None
        step_records = []
        for i, ev in enumerate(events):
            g_new = float(ev.function(t_new, y_new))
            if _crosses(ev.direction, g_prev[i], g_new):
                te = _locate(ev, interp, t_old, t_new, g_prev[i], g_new)
                step_records.append(EventRecord(te, interp(te), i, ev.name))
                if ev.terminal:
                    if terminal_hit is None or abs(te - t_old) < abs(terminal_hit[0] - t_old):
                        terminal_hit = (te, i)
            g_prev[i] = g_new
        if terminal_hit is not None:
            te = terminal_hit[0]
            step_records = [r for r in step_records if abs(r.t - t_old) <= abs(te - t_old)]
            t_new, y_new = te, interp(te)
            status = f"event:{events[terminal_hit[1]].name or terminal_hit[1]}"
        step_records.sort(key=lambda r: abs(r.t - t_old))
        records.extend(step_records)
        if t_new != t_old:
            times.append(t_new)
            states.append(y_new)
            interps.append(interp)
        if step_callback is not None:
            step_callback(t_new, y_new)
        if terminal_hit is not None:
            break
    return Trajectory(np.array(times), np.array(states), records, interps, status)


def quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    tail: Callable[[float], float] | None = None,
    cut: float | None = None,
) -> float:
    """Adaptive quadrature of ``f`` over ``[a, b]``.

    For a semi-infinite interval a caller may supply ``cut`` (finite
    truncation point) and ``tail(cut)``, the analytic value of the integral
    beyond it. Without them the interval is mapped to a finite one.
    """
    infinite = math.isinf(a) or math.isinf(b)
    if infinite and cut is not None and tail is not None:
        lo, hi = (cut, b) if math.isinf(a) else (a, cut)
        return quad(f, lo, hi, tol) + tail(cut)
    val, err = _spi.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=500)
    if err > tol:
        raise NoConvergence(f"quadrature error estimate {err:.2e} > {tol:.2e}")
    return float(val)


def fd_jacobian(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray, fx: np.ndarray | None = None,
                central: bool = True, step: float | None = None) -> np.ndarray:
    """Finite-difference Jacobian; step sqrt(eps) scaled by |x_j| (>= 1).

    ``step`` overrides the base step (useful where round-off dominates).
    """
    x = np.asarray(x, dtype=float)
    h0 = math.sqrt(np.finfo(float).eps) if step is None else step
    if not central and fx is None:
        fx = np.asarray(F(x), dtype=float)
    cols = []
    for j in range(x.size):
        h = h0 * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        if central:
            xm = x.copy()
            xm[j] -= h
            cols.append((np.asarray(F(xp)) - np.asarray(F(xm))) / (2 * h))
        else:
            cols.append((np.asarray(F(xp)) - fx) / h)
    return np.column_stack(cols)


def solve_root(
    F: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-10,
    max_iter: int = 50,
    central: bool = True,
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Damped Newton iteration until ``|F(x)| < tol``.

    Full Newton steps are halved (down to 2**-12) until the residual norm
    decreases; evaluation failures during the line search count as no
    decrease.
    """
    scalar = np.ndim(x0) == 0
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()

    def G(z):
        return np.atleast_1d(np.asarray(F(z[0] if scalar else z), dtype=float))

    fx = G(x)
    norm = float(np.linalg.norm(fx))
    for _ in range(max_iter):
        if norm < tol:
            return x[0] if scalar else x
        J = jacobian(x) if jacobian is not None else fd_jacobian(G, x, fx, central=central)
        J = np.atleast_2d(J)
        try:
            dx = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(dx)) or np.linalg.cond(J) > 1e14:
            raise SingularJacobian(f"Jacobian condition {np.linalg.cond(J):.2e}")
        lam = 1.0
        while True:
            xn = x + lam * dx
            try:
                fn = G(xn)
                nn = float(np.linalg.norm(fn))
            except (NoConvergence, BlowUp, StepLimitExceeded, FloatingPointError, ArithmeticError):
                nn = math.inf
            if np.isfinite(nn) and nn < norm:
                break
            lam *= 0.5
            if lam < 2.0**-12:
                raise NoConvergence(f"line search stalled at |F|={norm:.3e}")
        x, fx, norm = xn, fn, nn
    if norm < tol:
        return x[0] if scalar else x
    raise NoConvergence(f"|F|={norm:.3e} after {max_iter} iterations")
