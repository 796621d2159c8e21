"""Numerov shooting solver for the radial equation.

The radial equation

    psi'' + psi'/r + k^2(r) psi = 0,
    k^2(r) = 2M(E - V(r)) - ell'^2/r^2 - (M omega_c/alpha)^2 r^2 - 2 M omega_c ell'/alpha,

is assembled here from the potential coefficients and the field terms, not
from the closed-form spectrum, and integrated outward from the origin.
Two grids are supported:

* ``spacing="uniform"``: uniform in r for u = sqrt(r) psi, which obeys
  u'' + (k^2 + 1/(4 r^2)) u = 0.  The 1/(4 r^2) term limits accuracy when
  j is small, so this grid is mainly a cross-check;
* ``spacing="log"``: uniform in x = ln r, where y(x) = psi(e^x) obeys
  y'' = -r^2 k^2 y.  The centrifugal singularity disappears and the scheme
  keeps its fourth order for any j.

Levels are isolated by node counting and polished with Brent's method on
the end-point amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import BracketingFailure, CaseDNeedsField, DegenerateConfinement, DomainError, GridTooCoarse
from .model import PotentialSpec, SystemConfig

__all__ = ["RadialGrid", "RadialEquation", "numerov_eigenvalue", "default_grid", "convergence_order"]

_RESCALE = 1e100
_MAX_AUTO_POINTS = 128001


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    num_points: int = 8000
    spacing: str = "log"

    def __post_init__(self):
        if not 0.0 < self.r_min < self.r_max:
            raise DomainError(f"need 0 < r_min < r_max, got {self.r_min}, {self.r_max}")
        if self.num_points < 1000:
            raise DomainError(f"num_points must be >= 1000, got {self.num_points}")
        if self.spacing not in ("uniform", "log"):
            raise DomainError(f"spacing must be 'uniform' or 'log', got {self.spacing!r}")

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.r_min, self.r_max, factor * (self.num_points - 1) + 1, self.spacing)

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.exp(np.linspace(math.log(self.r_min), math.log(self.r_max), self.num_points))
        return np.linspace(self.r_min, self.r_max, self.num_points)


@dataclass(frozen=True)
class RadialEquation:
    """Coefficients of k^2(r) = kappa(E) - j2 / r^2 - w2 r^2."""

    mass: float
    c: float
    flux_shift: float  # 2 M omega_c ell' / alpha
    j2: float          # ell'^2 + 2 M b
    w2: float          # 2 M a + (M omega_c / alpha)^2

    @classmethod
    def build(cls, config: SystemConfig, potential: PotentialSpec, ell: int) -> "RadialEquation":
        M, alpha = config.mass, config.alpha
        a, b, c = potential.coefficients(M)
        omega_c = config.charge * config.B / (2.0 * M)
        ell_prime = abs(ell - config.phi) / alpha
        w2 = 2.0 * M * a + (M * omega_c / alpha) ** 2
        if w2 <= 0.0:
            if potential.kind == "inverse_square":
                raise CaseDNeedsField("inverse-square potential has no bound states without B")
            raise DegenerateConfinement("no confining r^2 term")
        return cls(
            mass=M,
            c=c,
            flux_shift=2.0 * M * omega_c * ell_prime / alpha,
            j2=ell_prime ** 2 + 2.0 * M * b,
            w2=w2,
        )

    def kappa(self, E: float) -> float:
        return 2.0 * self.mass * (E - self.c) - self.flux_shift

    def energy_of_kappa(self, kappa: float) -> float:
        return self.c + (kappa + self.flux_shift) / (2.0 * self.mass)

    def k2(self, r, E):
        return self.kappa(E) - self.j2 / r ** 2 - self.w2 * r ** 2


def default_grid(eq: RadialEquation, n: int, num_points: int = 8000, spacing: str = "log") -> RadialGrid:
    """r_max such that Omega r_max^2 / 2 >= 40 beyond the n-th turning point."""
    omega = math.sqrt(eq.w2)
    j = math.sqrt(eq.j2)
    r_max = math.sqrt(2.0 * (40.0 + 2.0 * n + j + 1.0) / omega)
    # psi ~ r^j: start where (r / r_max)^(j + 1) is far below double precision
    log_ratio = min(math.log(1e6), 40.0 / (j + 1.0))
    return RadialGrid(r_min=r_max * math.exp(-log_ratio), r_max=r_max,
                      num_points=num_points, spacing=spacing)


def _shoot(eq: RadialEquation, grid: RadialGrid, E: float, rs: np.ndarray):
    """Integrate outward; return (node count, end amplitude with a fixed sign convention)."""
    kappa = eq.kappa(E)
    j = math.sqrt(eq.j2)
    npts = rs.size
    if grid.spacing == "log":
        h = (math.log(grid.r_max) - math.log(grid.r_min)) / (npts - 1)
        q = -(rs ** 2) * eq.k2(rs, E)  # y'' = q y
        # psi ~ r^j (1 - kappa r^2 / (4 (j + 1)))
        y0 = rs[0] ** j * (1.0 - kappa * rs[0] ** 2 / (4.0 * (j + 1.0)))
        y1 = rs[1] ** j * (1.0 - kappa * rs[1] ** 2 / (4.0 * (j + 1.0)))
    else:
        h = (grid.r_max - grid.r_min) / (npts - 1)
        q = -(eq.k2(rs, E) + 0.25 / rs ** 2)  # u'' = q u
        y0 = rs[0] ** (j + 0.5) * (1.0 - kappa * rs[0] ** 2 / (4.0 * (j + 1.0)))
        y1 = rs[1] ** (j + 0.5) * (1.0 - kappa * rs[1] ** 2 / (4.0 * (j + 1.0)))
    f = (1.0 - (h * h / 12.0) * q).tolist()
    q_list = q.tolist()
    c5 = 5.0 * h * h / 6.0
    nodes = 0
    prev, cur = y0, y1
    f_prev, f_cur = f[0], f[1]
    for k in range(1, npts - 1):
        f_next = f[k + 1]
        nxt = ((2.0 + c5 * q_list[k]) * cur - f_prev * prev) / f_next
        if (nxt < 0.0) != (cur < 0.0) and nxt != 0.0:
            nodes += 1
        prev, cur = cur, nxt
        f_prev, f_cur = f_cur, f_next
        if abs(cur) > _RESCALE:
            prev /= _RESCALE
            cur /= _RESCALE
    return nodes, cur


def _solve_on_grid(eq, n, grid, tol, bracket=None, max_iter=200):
    rs = grid.points()
    if bracket is None:
        # kappa <= 0 gives k^2 < 0 everywhere: no oscillation, zero nodes
        lo = eq.energy_of_kappa(0.0)
        scale = math.sqrt(eq.w2)
        # e * Omega is not of the form 2 Omega (2n + j + 1) for the usual j
        hi_kappa = math.e * scale
        hi = eq.energy_of_kappa(hi_kappa)
        for _ in range(80):
            if _shoot(eq, grid, hi, rs)[0] >= n + 1:
                break
            lo_candidate = hi
            if _shoot(eq, grid, lo_candidate, rs)[0] <= n:
                lo = lo_candidate
            hi_kappa *= 2.0
            hi = eq.energy_of_kappa(hi_kappa)
        else:
            raise BracketingFailure(f"could not find an energy with more than {n} nodes")
        n_lo = _shoot(eq, grid, lo, rs)[0]
        n_hi = _shoot(eq, grid, hi, rs)[0]
        if n_lo > n:
            raise BracketingFailure("lower bracket already has too many nodes")
        for _ in range(max_iter):
            if n_lo == n and n_hi == n + 1:
                break
            mid = 0.5 * (lo + hi)
            n_mid = _shoot(eq, grid, mid, rs)[0]
            if n_mid <= n:
                lo, n_lo = mid, n_mid
            else:
                hi, n_hi = mid, n_mid
            if hi - lo <= 1e-14 * max(1.0, abs(hi)):
                break
        else:
            raise BracketingFailure(f"node-count bisection did not isolate level {n}")
        if not (n_lo == n and n_hi == n + 1):
            raise BracketingFailure(f"node-count bisection did not isolate level {n}")
    else:
        lo, hi = bracket
    def end(E):
        return _shoot(eq, grid, E, rs)[1]

    f_lo, f_hi = end(lo), end(hi)
    for _ in range(20):
        if (f_lo < 0) != (f_hi < 0):
            break
        # a bracket end sitting on the level itself has an end amplitude of arbitrary sign
        hi += 1e-6 * (hi - lo)
        f_hi = end(hi)
    if f_lo == 0.0:
        return lo, (lo, hi)
    if f_hi == 0.0:
        return hi, (lo, hi)
    if (f_lo < 0) == (f_hi < 0):
        raise BracketingFailure("end-point amplitude does not change sign across the bracket")
    E = brentq(end, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return E, (lo, hi)


def numerov_eigenvalue(
    config: SystemConfig,
    potential: PotentialSpec,
    ell: int,
    n: int,
    grid: Optional[RadialGrid] = None,
    tol: float = 1e-8,
) -> float:
    """The (n+1)-th lowest energy for orbital number ``ell``.

    The level is computed on ``grid`` and on a twice-refined grid; if they
    disagree by more than 10 * tol, or node counting on ``grid`` fails,
    :class:`GridTooCoarse` is raised.  The
    refined value is returned.  Without an explicit grid, one is chosen from
    the oscillator scale and refined until the check passes.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if not tol > 0:
        raise DomainError("tol must be positive")
    eq = RadialEquation.build(config, potential, ell)
    auto = grid is None
    if auto:
        grid = default_grid(eq, n)
    try:
        E_coarse, bracket = _solve_on_grid(eq, n, grid, tol)
    except BracketingFailure as exc:
        if auto:
            raise
        # node counts on an unresolved grid are unreliable
        raise GridTooCoarse(f"N={grid.num_points} cannot isolate level {n}: {exc}") from exc
    while True:
        fine = grid.refined(2)
        E_fine, _ = _solve_on_grid(eq, n, fine, tol, bracket=bracket)
        if abs(E_fine - E_coarse) <= 10.0 * tol:
            break
        if not auto or fine.num_points > _MAX_AUTO_POINTS:
            raise GridTooCoarse(
                f"N={grid.num_points} gives {E_coarse!r}, 2N gives {E_fine!r}; "
                f"difference above {10 * tol:.1e}"
            )
        grid, E_coarse = fine, E_fine
    if eq.k2(grid.r_max, E_fine) > -2.0 * eq.mass:
        raise DomainError("grid does not reach the classically forbidden region at r_max")
    return E_fine


def convergence_order(config, potential, ell, n, num_points=(1001, 2001, 4001), spacing="log"):
    """Observed order p from three successively halved grids."""
    eq = RadialEquation.build(config, potential, ell)
    values = []
    bracket = None
    for npts in num_points:
        grid = default_grid(eq, n, num_points=npts, spacing=spacing)
        E, found = _solve_on_grid(eq, n, grid, tol=1e-14, bracket=bracket)
        bracket = bracket or found
        values.append(E)
    d1 = abs(values[0] - values[1])
    d2 = abs(values[1] - values[2])
    if d2 == 0.0:
        return math.inf, values
    return math.log2(d1 / d2), values
