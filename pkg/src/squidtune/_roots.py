"""Safeguarded Newton iteration with bisection fallback."""

from __future__ import annotations

import math


def newton_bisect(f, fprime, lo, hi, x0=None, xtol=1e-12, maxiter=200):
    """Root of ``f`` inside the sign-change bracket ``[lo, hi]``.

    Newton steps are taken from ``x0`` (default: bracket midpoint) and
    replaced by bisection whenever they would leave the current bracket or
    fail to halve the previous step.  The bracket shrinks on every iteration,
    so the method cannot diverge.  Convergence is declared when a step falls
    below ``xtol * max(1, |x|)``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f={flo:g}, {fhi:g}")
    # a: negative side, b: positive side
    a, b = (lo, hi) if flo < 0 else (hi, lo)
    left, right = min(lo, hi), max(lo, hi)
    x = 0.5 * (left + right) if x0 is None else min(max(x0, left), right)
    dx_old = right - left
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0:
            return x
        if fx < 0:
            a = x
        else:
            b = x
        tol = xtol * max(1.0, abs(x))
        dfx = fprime(x)
        step = fx / dfx if dfx != 0 and math.isfinite(dfx) else math.inf
        if abs(step) < tol:
            x_new = x - step
            return x_new if min(a, b) <= x_new <= max(a, b) else x
        x_new = x - step
        if min(a, b) < x_new < max(a, b) and 2 * abs(step) <= dx_old:
            dx_old = abs(step)
            x = x_new
        else:
            mid = 0.5 * (a + b)
            dx_old = abs(mid - x)
            x = mid
            if abs(b - a) < tol:
                return x
    raise RuntimeError(f"newton_bisect did not converge in {maxiter} iterations")
