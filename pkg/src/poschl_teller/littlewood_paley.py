"""Dyadic window systems, analysis/synthesis banks and maximal functions.

Windows are functions of the spectral variable ξ (ξ = k² on the continuum,
ξ = λ_m on bound states) and are even in ξ. Both variants use the square-root
trick: with a smooth cutoff η (η = 1 on |ξ| <= 1/2, η = 0 on |ξ| >= 1),

    Φ = Ψ = √η,    φ = ψ = √(η(ξ) - η(2ξ)),

so Φ Ψ + Σ_{j>=1} φ(2^{-j}ξ) ψ(2^{-j}ξ) telescopes to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numba
import numpy as np

from .errors import InvalidParameterError
from .numerics import FunctionSample, Grid, KQuadrature, weighted_lp
from .scattering import Potential
from .spectral import check_resolvable, default_quadrature, spectral_basis

Window = Callable[[np.ndarray], np.ndarray]

VARIANTS = ("sqrt-partition", "shifted-sqrt")


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C^∞ step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        v = 1.0 - u
        f1 = np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
    return f0 / (f0 + f1)


def _cutoff(variant: str) -> Window:
    if variant == "sqrt-partition":
        warp = lambda u: u
    elif variant == "shifted-sqrt":
        # moves the half-height point from |ξ| = 3/4 towards |ξ| ≈ 0.69
        warp = lambda u: np.clip(u, 0.0, None) ** 1.5
    else:
        raise InvalidParameterError(f"unknown dyadic variant {variant!r}; choose from {VARIANTS}")

    def eta(xi):
        a = np.abs(np.asarray(xi, dtype=float))
        u = np.clip(2.0 * (1.0 - a), 0.0, 1.0)
        return _smooth_step(warp(u))

    return eta


@dataclass(frozen=True, eq=False)
class DyadicSystem:
    """Four even windows (Φ, φ, Ψ, ψ) satisfying the biorthogonal identity."""

    variant: str
    Phi: Window
    phi: Window
    Psi: Window
    psi: Window
    c_lower: float

    def analysis_window(self, j: int) -> Window:
        """Φ for j = 0, ξ ↦ φ(2^{-j} ξ) otherwise (any integer j, for homogeneous sums)."""
        if j == 0:
            return self.Phi
        return lambda xi, s=2.0 ** (-j): self.phi(s * np.asarray(xi))

    def synthesis_window(self, j: int) -> Window:
        if j == 0:
            return self.Psi
        return lambda xi, s=2.0 ** (-j): self.psi(s * np.asarray(xi))

    def homogeneous_window(self, j: int) -> Window:
        return lambda xi, s=2.0 ** (-j): self.phi(s * np.asarray(xi))

    def identity_sum(self, xi: np.ndarray, j_max: Optional[int] = None) -> np.ndarray:
        """Φ Ψ + Σ_{j=1..j_max} φ_j ψ_j at the given ξ (j_max large enough by default)."""
        xi = np.asarray(xi, dtype=float)
        if j_max is None:
            j_max = int(np.ceil(np.log2(max(np.max(np.abs(xi)), 1.0)))) + 3
        total = self.Phi(xi) * self.Psi(xi)
        for j in range(1, j_max + 1):
            total = total + self.analysis_window(j)(xi) * self.synthesis_window(j)(xi)
        return total


def build_dyadic_system(variant: str = "sqrt-partition") -> DyadicSystem:
    eta = _cutoff(variant)

    def Phi(xi):
        return np.sqrt(eta(xi))

    def phi(xi):
        xi = np.asarray(xi, dtype=float)
        return np.sqrt(np.clip(eta(xi) - eta(2.0 * xi), 0.0, None))

    low = np.linspace(-0.5, 0.5, 401)
    mid = np.concatenate([np.linspace(3 / 8, 7 / 8, 401), -np.linspace(3 / 8, 7 / 8, 401)])
    c_lower = float(min(Phi(low).min(), phi(mid).min()))
    return DyadicSystem(variant, Phi, phi, Phi, phi, c_lower)


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """Bands φ_j(H) f for j = j_min .. j_min + len - 1 (j_min = 0 unless homogeneous)."""

    grid: Grid
    values: np.ndarray
    j_min: int = 0
    # spectral coefficients (kquad, ac rows, pp rows) of the bands as functions on the
    # whole line; grid samples alone truncate their slowly decaying tails
    coefficients: Optional[tuple] = None

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_min + self.values.shape[0])

    @property
    def bands(self) -> list[FunctionSample]:
        return [FunctionSample(self.grid, v) for v in self.values]

    def band(self, j: int) -> FunctionSample:
        return FunctionSample(self.grid, self.values[j - self.j_min])


def max_band(grid: Grid) -> int:
    """Largest J with 2^{J/2} <= π / spacing."""
    return int(np.floor(2 * np.log2(grid.nyquist)))


def _kquad_for(grid: Grid, J: int, kquad: Optional[KQuadrature]) -> KQuadrature:
    k_top = 2.0 ** (J / 2)
    check_resolvable(k_top, grid)
    return kquad if kquad is not None else default_quadrature(grid, max(k_top, 1.0))


def analysis(f: FunctionSample, system: DyadicSystem, pot: Potential, J: int,
             kquad: Optional[KQuadrature] = None, homogeneous: bool = False) -> BandDecomposition:
    """Q f = {φ_j(H) f}_{j=0..J} (or j = -J..J with φ windows only when homogeneous)."""
    if J < 0:
        raise InvalidParameterError("J must be nonnegative")
    kq = _kquad_for(f.grid, J, kquad)
    basis = spectral_basis(pot, f.grid, kq)
    if homogeneous:
        windows = [system.homogeneous_window(j) for j in range(-J, J + 1)]
        j_min = -J
    else:
        windows = [system.analysis_window(j) for j in range(J + 1)]
        j_min = 0
    ac, pp = basis.forward(f.values)
    ac_s = np.stack([w(basis.xi) * ac for w in windows])
    pp_s = np.stack([w(basis.energies) * pp for w in windows])
    values = basis.inverse(ac_s.T, pp_s.T).T
    return BandDecomposition(f.grid, values, j_min, (kq, ac_s, pp_s))


def synthesis(bands: BandDecomposition, system: DyadicSystem, pot: Potential,
              kquad: Optional[KQuadrature] = None) -> FunctionSample:
    """R {g_j} = Σ_j ψ_j(H) g_j.

    Uses the bands' stored spectral coefficients when present (and no other k-rule
    is requested); otherwise transforms the grid samples.
    """
    J = bands.j_min + bands.values.shape[0] - 1
    if bands.coefficients is not None and kquad is None:
        kq, ac, pp = bands.coefficients
    else:
        kq = _kquad_for(bands.grid, max(J, 0), kquad)
        ac, pp = (a.T for a in spectral_basis(pot, bands.grid, kq).forward(bands.values.T))
    basis = spectral_basis(pot, bands.grid, kq)
    ac_sum = np.zeros(ac.shape[1], dtype=complex)
    pp_sum = np.zeros(pp.shape[1], dtype=complex)
    for row, j in enumerate(bands.indices):
        w = system.synthesis_window(j) if bands.j_min == 0 else system.homogeneous_window(j)
        ac_sum += w(basis.xi) * ac[row]
        pp_sum += w(basis.energies) * pp[row]
    return FunctionSample(bands.grid, basis.inverse(ac_sum, pp_sum))


# -- maximal functions ---------------------------------------------------------------


@numba.njit(parallel=True, cache=True)
def _peetre_kernel(a, weight, stride, n_out):
    out = np.empty(n_out)
    n_t = a.size
    for i in numba.prange(n_out):
        c = i * stride
        best = 0.0
        for l in range(n_t):
            v = a[l] * weight[abs(c - l)]
            if v > best:
                best = v
        out[i] = best
    return out


@numba.njit(parallel=True, cache=True)
def _hl_kernel(prefix, n):
    out = np.empty(n)
    for i in numba.prange(n):
        best = 0.0
        for r in range(n):
            hi = min(i + r + 1, n)
            lo = max(i - r, 0)
            v = (prefix[hi] - prefix[lo]) / (2 * r + 1)
            if v > best:
                best = v
        out[i] = best
    return out


def peetre_sup(abs_values: np.ndarray, grid: Grid, j: int, s: float, refine: int = 1) -> np.ndarray:
    """sup_t |b(t)| / (1 + 2^{j/2}|x - t|)^s over a t-lattice ``refine`` times finer than ``grid``.

    ``abs_values`` holds |b| on that lattice (length (N - 1) * refine + 1).
    """
    n_t = (grid.n_points - 1) * refine + 1
    if abs_values.shape != (n_t,):
        raise InvalidParameterError(f"expected {n_t} lattice values, got {abs_values.shape}")
    d = np.arange(n_t) * (grid.spacing / refine)
    weight = (1.0 + 2.0 ** (j / 2) * d) ** (-float(s))
    return _peetre_kernel(np.ascontiguousarray(abs_values, dtype=float), weight, refine, grid.n_points)


def peetre_maximal(j: int, f: FunctionSample, s: float, system: DyadicSystem, pot: Potential,
                   with_derivative: bool = False, refine: int = 1,
                   kquad: Optional[KQuadrature] = None) -> FunctionSample:
    """Peetre maximal function φ_j^* f (or φ_j^{**} f with the band's derivative).

    The supremum runs over grid points (``refine`` > 1 oversamples the t-lattice by
    synthesizing the band there). Derivatives are centered finite differences.
    """
    if not s > 0:
        raise InvalidParameterError("s must be positive")
    if refine < 1:
        raise InvalidParameterError("refine must be >= 1")
    grid = f.grid
    kq = _kquad_for(grid, max(j, 0), kquad)
    basis = spectral_basis(pot, grid, kq)
    window = system.analysis_window(j)
    ac, pp = basis.forward(f.values)
    ac = window(basis.xi) * ac
    pp = window(basis.energies) * pp
    if refine == 1:
        band = basis.inverse(ac, pp)
        h = grid.spacing
    else:
        t = np.linspace(grid.x_min, grid.x_max, (grid.n_points - 1) * refine + 1)
        band = basis.evaluate(ac, pp, t)
        h = grid.spacing / refine
    if with_derivative:
        band = np.gradient(band, h)
    return FunctionSample(grid, peetre_sup(np.abs(band), grid, j, s, refine))


def hl_maximal(f: FunctionSample) -> FunctionSample:
    """Centered Hardy–Littlewood maximal function over symmetric windows of all radii.

    Samples outside the grid count as zero.
    """
    a = np.abs(f.values)
    prefix = np.concatenate([[0.0], np.cumsum(a)])
    return FunctionSample(f.grid, _hl_kernel(prefix, a.size))


def hl_maximal_values(values: np.ndarray) -> np.ndarray:
    prefix = np.concatenate([[0.0], np.cumsum(np.abs(values))])
    return _hl_kernel(prefix, values.size)


def fefferman_stein_ratio(bands: np.ndarray, grid: Grid, p: float) -> float:
    """‖(Σ_j (M f_j)²)^{1/2}‖_p / ‖(Σ_j |f_j|²)^{1/2}‖_p for a stack of band samples."""
    mf = np.array([hl_maximal_values(b) for b in bands])
    num = weighted_lp(np.sqrt(np.sum(mf ** 2, axis=0)), grid.weights, p)
    den = weighted_lp(np.sqrt(np.sum(np.abs(bands) ** 2, axis=0)), grid.weights, p)
    return num / den
