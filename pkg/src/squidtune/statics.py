"""Static rf-SQUID model: potential, metastable wells, thresholds, hysteresis.

Fluxes are in units of the flux quantum.  ``x`` is the total loop flux and
``xe`` the applied flux; the equilibrium condition is

    xe = x + (beta_e / 2 pi) sin(2 pi x)

and the potential (in units of E_J = Ic phi0 / 2 pi) is

    u(x) = (2 pi^2 / beta_e) (x - xe)^2 - cos(2 pi x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._roots import newton_bisect
from .core import PHI0
from .errors import InvalidParameterError, WellIndexError

TWO_PI = 2 * math.pi

METASTABLE = "metastable"
SINGLE_VALUED = "single-valued"


def beta_e_of(params) -> float:
    """Accept a bare beta_e or any record exposing ``beta_e``."""
    beta_e = float(params) if isinstance(params, (int, float)) else float(params.beta_e)
    if not beta_e > 0:
        raise InvalidParameterError(f"beta_e must be positive, got {beta_e}")
    return beta_e


def potential(x, xe, beta_e):
    x = np.asarray(x, dtype=float)
    return (2 * math.pi**2 / beta_e) * (x - xe) ** 2 - np.cos(TWO_PI * x)


def potential_slope(x, xe, beta_e):
    x = np.asarray(x, dtype=float)
    return (4 * math.pi**2 / beta_e) * (x - xe) + TWO_PI * np.sin(TWO_PI * x)


def potential_curvature(x, beta_e):
    x = np.asarray(x, dtype=float)
    return 4 * math.pi**2 * (1 / beta_e + np.cos(TWO_PI * x))


def applied_flux(x, beta_e):
    """Applied flux that holds the loop at total flux ``x`` in equilibrium."""
    x = np.asarray(x, dtype=float)
    return x + beta_e / TWO_PI * np.sin(TWO_PI * x)


def equilibrium_residual(x, xe, beta_e):
    return applied_flux(x, beta_e) - xe


def _half_width(beta_e: float) -> float:
    """Distance from n to the edge of branch n, where 1 + beta_e cos(2 pi x) = 0."""
    return math.acos(-1.0 / beta_e) / TWO_PI


def threshold_offset(beta_e: float) -> float:
    """Exact value of (Phi_e,c - n) at the upper edge of branch n."""
    if beta_e <= 1:
        raise InvalidParameterError("thresholds exist only in the hysteretic regime beta_e > 1")
    a = _half_width(beta_e)
    return a + beta_e / TWO_PI * math.sin(TWO_PI * a)


def threshold_offset_approx(beta_e: float) -> float:
    return beta_e / TWO_PI + 0.25


def max_well_index(params) -> int:
    """N = floor(beta_e / 2 pi + 1/4): stable wells at zero bias have |n| <= N."""
    return math.floor(threshold_offset_approx(beta_e_of(params)))


def census_limit(params) -> int:
    """Largest |n| counted in the well census (the outermost pair is left out)."""
    N = max_well_index(params)
    return N - 1 if N >= 1 else 0


def census_count(params) -> int:
    return 2 * census_limit(params) + 1


@dataclass(frozen=True)
class Threshold:
    n: int
    sign: int
    approx: float
    exact: float


def _exact_threshold(n: int, beta_e: float, sign: int) -> float:
    return n + sign * threshold_offset(beta_e)


def critical_threshold(n: int, params, sign: int = +1) -> Threshold:
    """Applied flux at which well ``n`` loses its barrier when driven in direction ``sign``.

    ``approx`` is n +/- (beta_e/2pi + 1/4); ``exact`` puts the equilibrium
    branch edge, where d(xe)/dx vanishes, into the equilibrium condition.
    """
    if sign not in (1, -1):
        raise InvalidParameterError(f"sign must be +1 or -1, got {sign}")
    beta_e = beta_e_of(params)
    N = max_well_index(beta_e)
    if beta_e <= 1 or abs(n) > N:
        raise WellIndexError(f"well index {n} outside the range |n| <= {N}")
    return Threshold(n, sign, n + sign * threshold_offset_approx(beta_e), _exact_threshold(n, beta_e, sign))


def stable_indices(params, xe: float = 0.0) -> range:
    """Indices of all stable equilibria at applied flux ``xe`` (hysteretic regime)."""
    beta_e = beta_e_of(params)
    c = threshold_offset(beta_e)
    return range(math.floor(xe - c) + 1, math.ceil(xe + c))


def _solve_branch(n: int, xe: float, beta_e: float) -> float | None:
    a = _half_width(beta_e)
    k = beta_e / TWO_PI
    f = lambda x: x + k * math.sin(TWO_PI * x) - xe  # noqa: E731
    df = lambda x: 1 + beta_e * math.cos(TWO_PI * x)  # noqa: E731
    lo, hi = n - a, n + a
    if not (f(lo) < 0 < f(hi)):
        return None
    return newton_bisect(f, df, lo, hi, x0=float(n))


def _solve_single_valued(xe: float, beta_e: float) -> float:
    k = beta_e / TWO_PI
    f = lambda x: x + k * math.sin(TWO_PI * x) - xe  # noqa: E731
    df = lambda x: 1 + beta_e * math.cos(TWO_PI * x)  # noqa: E731
    return newton_bisect(f, df, xe - k - 1, xe + k + 1, x0=xe)


def _barrier_top(n: int, side: int, xe: float, beta_e: float) -> float | None:
    """Unstable equilibrium between branch n and branch n + side, if present."""
    a = _half_width(beta_e)
    k = beta_e / TWO_PI
    f = lambda x: x + k * math.sin(TWO_PI * x) - xe  # noqa: E731
    df = lambda x: 1 + beta_e * math.cos(TWO_PI * x)  # noqa: E731
    if side > 0:
        lo, hi = n + a, n + 1 - a
    else:
        lo, hi = n - 1 + a, n - a
    flo, fhi = f(lo), f(hi)
    if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
        return None
    return newton_bisect(f, df, lo, hi)


def barrier_depth(n: int, x_min: float, xe: float, beta_e: float) -> float:
    """Height of the lower of the two barriers around the minimum, E_J units."""
    u_min = float(potential(x_min, xe, beta_e))
    heights = []
    for side in (-1, 1):
        top = _barrier_top(n, side, xe, beta_e)
        if top is not None:
            heights.append(float(potential(top, xe, beta_e)) - u_min)
    return min(heights) if heights else math.inf


@dataclass(frozen=True)
class WellState:
    n: int
    flux: float  # Phi_0
    current: float | None  # A; None when only beta_e is known
    depth: float  # E_J
    xe: float = 0.0
    status: str = METASTABLE


def _current(params, flux: float, xe: float) -> float | None:
    L = getattr(params, "L", None)
    if L is None:
        return None
    return (flux - xe) * PHI0 / L


def solve_well(n: int, params, xe: float = 0.0) -> WellState | None:
    """The stable equilibrium on branch ``n`` at ``xe``, or None if it does not exist."""
    beta_e = beta_e_of(params)
    if beta_e <= 1:
        raise InvalidParameterError("branches are defined only in the hysteretic regime beta_e > 1")
    x = _solve_branch(n, xe, beta_e)
    if x is None:
        return None
    return WellState(n, x, _current(params, x, xe), barrier_depth(n, x, xe, beta_e), xe)


def well_flux(n: int, params, xe: float = 0.0) -> float:
    state = solve_well(n, params, xe)
    if state is None:
        raise WellIndexError(f"no stable well with index {n} at applied flux {xe}")
    return state.flux


def enumerate_wells(params, xe: float = 0.0, include_edge: bool = False) -> list[WellState]:
    """All metastable wells at applied flux ``xe``, ordered by index.

    Every well is found by safeguarded Newton iteration on its own branch,
    seeded at x = n.  By default the outermost stable pair (lowest and highest
    index) is dropped: those edge wells are extremely shallow and the census
    of 2 floor(beta_e/2pi + 1/4) - 1 wells at zero bias excludes them.

    For beta_e <= 1 the relation is single valued and one state with
    ``status == "single-valued"`` is returned.
    """
    beta_e = beta_e_of(params)
    if beta_e <= 1:
        x = _solve_single_valued(xe, beta_e)
        return [WellState(round(x), x, _current(params, x, xe), math.inf, xe, SINGLE_VALUED)]
    indices = stable_indices(beta_e, xe)
    if not include_edge and len(indices) > 1:
        indices = range(indices.start + 1, indices.stop - 1)
    wells = []
    for n in indices:
        state = solve_well(n, params, xe)
        if state is not None:
            wells.append(state)
    return wells


# ----------------------------------------------------------------------------
# quasi-static hysteresis sweeps

JumpPolicy = Callable[[object, float, int, int], int]


def adjacent_jump(params, xe: float, n: int, direction: int) -> int:
    """Land in the nearest well that is stable at ``xe`` in the sweep direction."""
    beta_e = beta_e_of(params)
    stable = stable_indices(beta_e, xe)
    if direction > 0:
        candidates = [m for m in stable if m > n]
        return min(candidates)
    candidates = [m for m in stable if m < n]
    return max(candidates)


@dataclass
class HysteresisBranch:
    direction: str  # "up" or "down"
    xe: np.ndarray
    flux: np.ndarray
    wells: np.ndarray
    jumps: list[tuple[float, int, int]] = field(default_factory=list)

    @property
    def jump_locations(self) -> list[float]:
        return [j[0] for j in self.jumps]


def _sweep(params, grid, env_offset, direction, start_well, jump_policy):
    beta_e = beta_e_of(params)
    c = threshold_offset(beta_e)
    flux = np.empty(len(grid))
    wells = np.empty(len(grid), dtype=int)
    jumps = []
    first = grid[0] + env_offset
    stable = stable_indices(beta_e, first)
    if start_well is not None and start_well in stable:
        n = start_well
    else:
        n = stable.start if direction > 0 else stable.stop - 1
    for j, xe in enumerate(grid):
        eff = xe + env_offset
        for _ in range(len(grid) + 2 * int(c) + 4):
            if n - c < eff < n + c:
                break
            edge = n + direction * c
            new = jump_policy(params, eff, n, direction)
            jumps.append((edge - env_offset, n, new))
            n = new
        else:
            raise RuntimeError("jump policy failed to reach a stable well")
        x = _solve_branch(n, eff, beta_e)
        flux[j] = x
        wells[j] = n
    return HysteresisBranch("up" if direction > 0 else "down", np.asarray(grid, float), flux, wells, jumps)


def hysteresis_curve(params, xe_range, points: int = 2001, env_offset: float = 0.0,
                     jump_policy: JumpPolicy = adjacent_jump, start_well: int | None = None):
    """Quasi-static up and down sweeps of the applied flux.

    Args:
        params: SquidParams or bare beta_e (> 1).
        xe_range: (low, high) pair, or an explicit increasing numpy grid.
        points: grid size when a pair is given.
        env_offset: constant environmental flux added to the applied flux.
        jump_policy: chooses the landing well when the occupied well vanishes;
            called as ``policy(params, xe_effective, n, direction)``.
        start_well: well occupied at the start of each sweep.  Defaults to
            the lowest stable well for the up sweep and the highest for the
            down sweep, which traces the outer loop.

    Returns:
        (up, down) HysteresisBranch pair.  Jump locations are exact threshold
        values in commanded (offset-free) units.
    """
    if not isinstance(xe_range, np.ndarray):
        lo, hi = (float(v) for v in xe_range)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise InvalidParameterError(f"xe_range must be a finite increasing pair, got {xe_range}")
        grid = np.linspace(lo, hi, points)
    else:
        grid = np.asarray(xe_range, dtype=float)
    beta_e = beta_e_of(params)
    if beta_e <= 1:
        flux = np.array([_solve_single_valued(xe + env_offset, beta_e) for xe in grid])
        wells = np.rint(flux).astype(int)
        return (HysteresisBranch("up", grid, flux, wells), HysteresisBranch("down", grid[::-1].copy(), flux[::-1].copy(), wells[::-1].copy()))
    up = _sweep(params, grid, env_offset, +1, start_well, jump_policy)
    down = _sweep(params, grid[::-1].copy(), env_offset, -1, start_well, jump_policy)
    return up, down


def hysteresis_rows(up: HysteresisBranch, down: HysteresisBranch):
    """Rows for the CSV header ``phi_e_phi0,phi_phi0,branch``."""
    for branch in (up, down):
        for xe, x in zip(branch.xe, branch.flux):
            yield float(xe), float(x), branch.direction


def well_rows(wells: list[WellState]):
    """Rows for the CSV header ``n,phi_phi0,current_uA,depth_ej``."""
    for w in wells:
        current = math.nan if w.current is None else w.current / 1e-6
        yield w.n, w.flux, current, w.depth
