"""Independent reference implementations used only by the tests.

None of these import the package internals they check: roots come from a
dense sign-change scan refined with brentq, dynamics from a hand-written
fixed-step RK4, and rates from mpmath at high precision.
"""

import math

import mpmath
import numpy as np
from scipy.optimize import brentq

H_PLANCK = 6.62607015e-34  # exact SI
E_CHARGE = 1.602176634e-19  # exact SI
PHI0 = H_PLANCK / (2 * E_CHARGE)
KB = 1.380649e-23
HBAR = 1.054571817e-34


def beta_e(Ic, L):
    return 2 * math.pi * Ic * L / PHI0


def stable_roots(beta_e, xe=0.0, pad=2.0, per_unit=400):
    """All stable solutions of xe = x + k sin(2 pi x) by brute-force scanning."""
    k = beta_e / (2 * math.pi)
    f = lambda x: x + k * math.sin(2 * math.pi * x) - xe  # noqa: E731
    lo, hi = xe - k - pad, xe + k + pad
    grid = np.linspace(lo, hi, int((hi - lo) * per_unit) + 1)
    vals = grid + k * np.sin(2 * np.pi * grid) - xe
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-14, rtol=1e-15))
    return [r for r in roots if 1 + beta_e * math.cos(2 * math.pi * r) > 0]


def exact_threshold_offset(beta_e):
    """Edge of branch 0 from 1 + beta_e cos(2 pi x) = 0, mapped through the equilibrium."""
    g = lambda x: 1 + beta_e * math.cos(2 * math.pi * x)  # noqa: E731
    x_edge = brentq(g, 0.0, 0.5, xtol=1e-15)
    return x_edge + beta_e / (2 * math.pi) * math.sin(2 * math.pi * x_edge)


def trapezoid(t, amplitude, duration, rise):
    if t <= 0 or t >= duration:
        return 0.0
    if rise > 0 and t < rise:
        return amplitude * t / rise
    if rise > 0 and t > duration - rise:
        return amplitude * (duration - t) / rise
    return amplitude


def rk4_final_flux(beta, beta_e, x0, amplitude, duration=50.0, rise=5.0, t_end=400.0, dt=1e-3):
    """Fixed-step RK4 integration of the RCSJ equation; returns (x, v) at t_end."""
    k = beta_e / (2 * math.pi)
    tp = 2 * math.pi
    sin = math.sin

    def acc(t, x, v):
        return -beta * v - k * sin(tp * x) + (trapezoid(t, amplitude, duration, rise) - x)

    x, v, t = x0, 0.0, 0.0
    for _ in range(int(round(t_end / dt))):
        a1 = acc(t, x, v)
        x2, v2 = x + 0.5 * dt * v, v + 0.5 * dt * a1
        a2 = acc(t + 0.5 * dt, x2, v2)
        x3, v3 = x + 0.5 * dt * v2, v + 0.5 * dt * a2
        a3 = acc(t + 0.5 * dt, x3, v3)
        x4, v4 = x + dt * v3, v + dt * a3
        a4 = acc(t + dt, x4, v4)
        x += dt / 6 * (v + 2 * v2 + 2 * v3 + v4)
        v += dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        t += dt
    return x, v


def log10_escape_rate(i, T, Ic, C):
    """log10 Gamma with every step in 50-digit arithmetic."""
    with mpmath.workdps(50):
        i = mpmath.mpf(i)
        w0 = mpmath.sqrt(2 * mpmath.pi * Ic / (PHI0 * C))
        w = w0 * (1 - i**2) ** mpmath.mpf(0.25)
        H = Ic * PHI0 / mpmath.pi * (mpmath.sqrt(1 - i**2) - i * mpmath.acos(i)) - HBAR * w / 2
        rate = w / (2 * mpmath.pi) * mpmath.exp(-H / (KB * T))
        return float(mpmath.log10(rate))


def f01_inverse(f, fmax):
    return math.acos((f / fmax) ** 2) / math.pi
