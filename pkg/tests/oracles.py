"""Independent reference computations used only by the tests."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

SQ3 = math.sqrt(3.0)
A = 3.0 - SQ3  # rho3^2
B = 3.0 + SQ3  # rho4^2
RHO3 = math.sqrt(A)
RHO4 = math.sqrt(B)


def sigma_of_beta(beta):
    """Inverse of iota1 by separation of variables: iota1(sigma_of_beta(b)) = b."""
    return SQ3 * (np.arctanh(beta / RHO4) / RHO4 - np.arctanh(beta / RHO3) / RHO3)


def iota2_of_beta(beta):
    """iota2 along the orbit as a function of beta = iota1."""
    b2 = np.asarray(beta) ** 2
    return (1.0 - b2 / A) ** (A / (4 * SQ3)) * (1.0 - b2 / B) ** (-B / (4 * SQ3))


def iota3_at_0() -> float:
    """int_{-inf}^0 iota2 d sigma as a beta-integral with its algebraic endpoint weight."""
    p = A / (4 * SQ3)

    def g(b):
        # 6 iota2 / ((A - b^2)(B - b^2)) with (RHO3 - b)^(p - 1) taken out
        return 6.0 * (RHO3 + b) ** (p - 1.0) * A ** (-p) * (1.0 - b * b / B) ** (-B / (4 * SQ3)) / (B - b * b)

    val, err = integrate.quad(g, 0.0, RHO3, weight="alg", wvar=(0.0, p - 1.0), epsabs=1e-14, epsrel=1e-14)
    return val


def rk4(field, y0, t0, t1, n):
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / n
    t = t0
    for _ in range(n):
        k1 = field(t, y)
        k2 = field(t + h / 2, y + h / 2 * k1)
        k3 = field(t + h / 2, y + h / 2 * k2)
        k4 = field(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def fast_velocity(y):
    """(du/d tau) from the compact field at y, via the chain rule and d tau = r d sigma."""
    from singshock.outer import brk_field

    b, r = y[0], y[1]
    d = brk_field(0.0, y)
    du1 = d[0] / r - b * d[1] / r**2
    du2 = -2.0 * d[1] / r**3
    return np.array([du1, du2]) / r
