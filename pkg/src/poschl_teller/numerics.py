"""Grids, quadrature, discrete norms, complex log-Gamma and the ODE integrator.

Everything here is immutable after construction and safe to share between
worker threads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import loggamma

from .errors import DomainError, IntegrationError, InvalidParameterError, PreconditionError

DEFAULT_X_MIN = -40.0
DEFAULT_X_MAX = 40.0
DEFAULT_N_POINTS = 4001


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[x_min, x_max]`` with ``n_points`` nodes."""

    x_min: float = DEFAULT_X_MIN
    x_max: float = DEFAULT_X_MAX
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidParameterError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not self.x_min < self.x_max:
            raise InvalidParameterError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.linspace(self.x_min, self.x_max, self.n_points)
        pts.flags.writeable = False
        return pts

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights."""
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        w.flags.writeable = False
        return w

    @property
    def nyquist(self) -> float:
        """Largest wavenumber representable on the grid."""
        return np.pi / self.spacing

    @property
    def max_k_spacing(self) -> float:
        """Largest admissible k-node spacing for this grid's extent."""
        return np.pi / (2.0 * self.length)


@dataclass(frozen=True, eq=False)
class FunctionSample:
    """Complex samples of a function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.n_points,):
            raise InvalidParameterError(
                f"values must have shape ({self.grid.n_points},), got {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> "FunctionSample":
        return cls(grid, func(grid.points))

    @classmethod
    def zeros(cls, grid: Grid) -> "FunctionSample":
        return cls(grid, np.zeros(grid.n_points, dtype=complex))

    def scaled(self, c: complex) -> "FunctionSample":
        return FunctionSample(self.grid, c * self.values)

    def __add__(self, other: "FunctionSample") -> "FunctionSample":
        if other.grid != self.grid:
            raise InvalidParameterError("cannot add samples on different grids")
        return FunctionSample(self.grid, self.values + other.values)

    def __sub__(self, other: "FunctionSample") -> "FunctionSample":
        return self + other.scaled(-1.0)

    def inner(self, other: "FunctionSample") -> complex:
        """``∫ conj(self) · other`` by the trapezoid rule."""
        return complex(np.sum(self.grid.weights * np.conj(self.values) * other.values))


@dataclass(frozen=True, eq=False)
class KQuadrature:
    """Nodes and weights for integrals over the spectral variable k.

    ``band`` is an integer dyadic band label or the string ``"full"``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    band: object = "full"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise InvalidParameterError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size and np.any(np.diff(nodes) <= 0):
            raise InvalidParameterError("k nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise InvalidParameterError("k weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def max_spacing(self) -> float:
        return float(np.max(self.weights)) if self.weights.size else 0.0

    @property
    def k_max(self) -> float:
        return float(np.max(np.abs(self.nodes))) if self.nodes.size else 0.0

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(self.nodes.tobytes())
        h.update(self.weights.tobytes())
        h.update(str(self.band).encode())
        return h.hexdigest()

    def resolves(self, grid: Grid) -> bool:
        return self.max_spacing <= grid.max_k_spacing * (1 + 1e-12)


def _midpoint_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    step = (hi - lo) / n
    return lo + step * (np.arange(n) + 0.5)


def full_quadrature(grid: Grid, k_max: float, spacing: Optional[float] = None) -> KQuadrature:
    """Midpoint rule on ``[-k_max, k_max]`` with an even node count (k = 0 is never a node).

    ``spacing`` defaults to the grid's Nyquist-type bound ``π / (2 (x_max - x_min))``.
    """
    if k_max <= 0:
        raise InvalidParameterError("k_max must be positive")
    dk = grid.max_k_spacing if spacing is None else min(spacing, grid.max_k_spacing)
    return symmetric_quadrature(k_max, dk)


def symmetric_quadrature(k_max: float, dk: float) -> KQuadrature:
    """Midpoint rule on ``[-k_max, k_max]`` with node spacing at most ``dk`` (even count)."""
    if k_max <= 0 or dk <= 0:
        raise InvalidParameterError("k_max and dk must be positive")
    n = int(np.ceil(2 * k_max / dk))
    n += n % 2
    nodes = _midpoint_nodes(-k_max, k_max, n)
    return KQuadrature(nodes, np.full(n, 2 * k_max / n), "full")


def annulus_quadrature(grid: Grid, k_lo: float, k_hi: float, band=None,
                       spacing: Optional[float] = None) -> KQuadrature:
    """Midpoint rule on ``k_lo <= |k| <= k_hi`` (both signs)."""
    if not 0 <= k_lo < k_hi:
        raise InvalidParameterError("need 0 <= k_lo < k_hi")
    if k_lo == 0:
        q = full_quadrature(grid, k_hi, spacing)
        return KQuadrature(q.nodes, q.weights, band if band is not None else "full")
    dk = grid.max_k_spacing if spacing is None else min(spacing, grid.max_k_spacing)
    n = int(np.ceil((k_hi - k_lo) / dk))
    pos = _midpoint_nodes(k_lo, k_hi, n)
    nodes = np.concatenate([-pos[::-1], pos])
    return KQuadrature(nodes, np.full(2 * n, (k_hi - k_lo) / n), band)


def lp_norm(f: FunctionSample, p: float) -> float:
    """Discrete L^p (quasi-)norm with trapezoid weights; ``p = inf`` gives the max."""
    if not p > 0:
        raise InvalidParameterError(f"p must be in (0, inf], got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(np.max(a))
    return float(np.sum(f.grid.weights * a ** p) ** (1.0 / p))


def weighted_lp(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """L^p quasi-norm of raw nonnegative samples (array form of :func:`lp_norm`)."""
    if not p > 0:
        raise InvalidParameterError(f"p must be in (0, inf], got {p}")
    a = np.abs(values)
    if np.isinf(p):
        return float(np.max(a))
    return float(np.sum(weights * a ** p) ** (1.0 / p))


def log_gamma_complex(z):
    """Principal branch of log Γ(z) for complex ``z`` (scalar or array).

    Raises :class:`DomainError` at the poles z = 0, -1, -2, ...
    """
    zz = np.asarray(z, dtype=complex)
    poles = (zz.imag == 0) & (zz.real <= 0) & (zz.real == np.round(zz.real))
    if np.any(poles):
        raise DomainError(f"log Gamma has a pole at {zz[poles].ravel()[0]}")
    out = loggamma(zz)
    return complex(out) if np.ndim(z) == 0 else out


def integrate_schrodinger(
    pot_eval: Callable[[float], float],
    k_squared: float,
    x_start: float,
    x_end: float,
    u0: complex,
    du0: complex,
    grid: Grid,
    rtol: float = 1e-10,
    atol: Optional[float] = None,
) -> tuple[FunctionSample, FunctionSample]:
    """Solve ``-u'' + V u = k² u`` from ``x_start`` to ``x_end`` with DOP853.

    The solution is reported at every node of ``grid``, which must lie inside
    the integration interval. Returns ``(u, u')``.
    """
    lo, hi = min(x_start, x_end), max(x_start, x_end)
    if grid.x_min < lo - 1e-12 or grid.x_max > hi + 1e-12:
        raise PreconditionError("grid must lie inside the integration interval")
    scale = max(abs(u0), abs(du0), 1e-300)
    if atol is None:
        atol = 1e-14 * scale

    def rhs(x, y):
        c = pot_eval(x) - k_squared
        return (y[2], y[3], c * y[0], c * y[1])

    y0 = (complex(u0).real, complex(u0).imag, complex(du0).real, complex(du0).imag)
    t_eval = grid.points if x_end >= x_start else grid.points[::-1]
    t_eval = np.clip(t_eval, lo, hi)
    sol = solve_ivp(rhs, (x_start, x_end), y0, method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval)
    if sol.status != 0:
        loc = float(sol.t[-1]) if sol.t.size else float(x_start)
        raise IntegrationError(f"integration failed near x = {loc:g}: {sol.message}", location=loc)
    y = sol.y if x_end >= x_start else sol.y[:, ::-1]
    u = FunctionSample(grid, y[0] + 1j * y[1])
    du = FunctionSample(grid, y[2] + 1j * y[3])
    return u, du
