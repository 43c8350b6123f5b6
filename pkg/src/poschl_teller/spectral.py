"""Spectral calculus of H: distorted Fourier transform, multipliers φ(H), band kernels.

Conventions: the analysis side carries no prefactor,

    F f(k) = ∫ conj(e(y, k)) f(y) dy,

and synthesis carries (2π)^{-1}:

    f(x) = (2π)^{-1} ∫ F f(k) e(x, k) dk + Σ_m (f, e_m) e_m(x).

Band kernels are assembled from the analytic product
e(x,k) conj(e(y,k)) = r(k) P(x,ik) conj(P(y,ik)) e^{ik(x-y)}, which is smooth
across k = 0.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, ResolutionError
from .numerics import (FunctionSample, Grid, KQuadrature, annulus_quadrature, full_quadrature,
                       symmetric_quadrature)
from .scattering import Potential, bound_state_function, bound_states, eigenfunction_matrix, product_factors

Symbol = Callable[[np.ndarray], np.ndarray]

TWO_PI = 2.0 * np.pi
DEFAULT_K_MAX = 8.0


@dataclass(frozen=True, eq=False)
class TransformCoefficients:
    kquad: KQuadrature
    ac_values: np.ndarray
    pp_values: np.ndarray


class SpectralBasis:
    """Sampled distorted plane waves and bound states for one (potential, grid, k-rule)."""

    def __init__(self, pot: Potential, grid: Grid, kquad: KQuadrature):
        pot.require_integer()
        self.pot = pot
        self.grid = grid
        self.kquad = kquad
        self.E = eigenfunction_matrix(pot, grid.points, kquad.nodes)
        if pot.level > 0:
            states = bound_states(pot, grid)
            self.B = np.column_stack([s.samples.values for s in states])
            self.energies = np.array([s.eigenvalue for s in states])
        else:
            self.B = np.zeros((grid.n_points, 0), dtype=complex)
            self.energies = np.zeros(0)
        self.xi = kquad.nodes ** 2

    def forward(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Analysis of one sample vector (N,) or a stack (N, F)."""
        wf = (self.grid.weights * values.T).T
        return self.E.conj().T @ wf, self.B.conj().T @ wf

    def inverse(self, ac: np.ndarray, pp: np.ndarray) -> np.ndarray:
        c = (self.kquad.weights / TWO_PI * ac.T).T
        return self.E @ c + self.B @ pp

    def multiply(self, symbols: Sequence[Symbol], values: np.ndarray) -> np.ndarray:
        """Apply each symbol to one sample vector; returns shape (len(symbols), N)."""
        ac, pp = self.forward(values)
        ac_s = np.stack([np.asarray(s(self.xi), dtype=float) * ac for s in symbols], axis=1)
        pp_s = np.stack([np.asarray(s(self.energies), dtype=float) * pp for s in symbols], axis=1)
        return self.inverse(ac_s, pp_s).T

    def evaluate(self, ac: np.ndarray, pp: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Synthesize at arbitrary points (used for oversampled maximal functions)."""
        E = eigenfunction_matrix(self.pot, points, self.kquad.nodes)
        out = E @ (self.kquad.weights / TWO_PI * ac)
        for m, c in enumerate(pp):
            out = out + c * bound_state_function(self.pot, m + 1)(points)
        return out


_CACHE: "OrderedDict[tuple, SpectralBasis]" = OrderedDict()
_CACHE_LOCK = threading.Lock()
_CACHE_SIZE = 4


def spectral_basis(pot: Potential, grid: Grid, kquad: KQuadrature) -> SpectralBasis:
    """Shared, LRU-cached :class:`SpectralBasis`."""
    key = (pot, grid, kquad.fingerprint)
    with _CACHE_LOCK:
        if key in _CACHE:
            _CACHE.move_to_end(key)
            return _CACHE[key]
    basis = SpectralBasis(pot, grid, kquad)
    with _CACHE_LOCK:
        _CACHE[key] = basis
        while len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    return basis


def default_quadrature(grid: Grid, k_max: float = DEFAULT_K_MAX) -> KQuadrature:
    check_resolvable(k_max, grid)
    return full_quadrature(grid, k_max)


def check_resolvable(k_max: float, grid: Grid):
    if k_max > grid.nyquist:
        raise ResolutionError(f"|k| up to {k_max:g} exceeds the grid Nyquist limit {grid.nyquist:g}")


def forward_transform(f: FunctionSample, pot: Potential, kquad: KQuadrature) -> TransformCoefficients:
    ac, pp = spectral_basis(pot, f.grid, kquad).forward(f.values)
    return TransformCoefficients(kquad, ac, pp)


def inverse_transform(coeffs: TransformCoefficients, pot: Potential, grid: Grid) -> FunctionSample:
    basis = spectral_basis(pot, grid, coeffs.kquad)
    if coeffs.pp_values.shape != (basis.B.shape[1],):
        raise InvalidParameterError("pp_values length does not match the bound-state count")
    return FunctionSample(grid, basis.inverse(coeffs.ac_values, coeffs.pp_values))


def apply_multiplier(symbol: Symbol, f: FunctionSample, pot: Potential, kquad: KQuadrature) -> FunctionSample:
    """φ(H) f on the transform side: symbol(k²) on the continuum, symbol(λ_m) on bound states."""
    basis = spectral_basis(pot, f.grid, kquad)
    return FunctionSample(f.grid, basis.multiply([symbol], f.values)[0])


def parseval_sides(f: FunctionSample, pot: Potential, kquad: KQuadrature) -> tuple[float, float]:
    """(‖f‖₂², (2π)^{-1} Σ w |F f|² + Σ |(f, e_m)|²)."""
    c = forward_transform(f, pot, kquad)
    lhs = float(np.sum(f.grid.weights * np.abs(f.values) ** 2))
    rhs = float(np.sum(kquad.weights * np.abs(c.ac_values) ** 2) / TWO_PI + np.sum(np.abs(c.pp_values) ** 2))
    return lhs, rhs


# -- band kernels -----------------------------------------------------------------


def band_k_range(j: int) -> tuple[float, float]:
    """|k|-support of the band-j window φ(2^{-j} k²) (Φ band for j = 0)."""
    if j == 0:
        return 0.0, 1.0
    return 2.0 ** ((j - 2) / 2), 2.0 ** (j / 2)


def band_quadrature(grid: Grid, j: int) -> KQuadrature:
    lo, hi = band_k_range(j)
    check_resolvable(hi, grid)
    return annulus_quadrature(grid, lo, hi, band=j)


@dataclass(frozen=True, eq=False)
class MultiplierKernel:
    """Dense kernel of the continuous part of φ_j(H) on a grid.

    ``point_values``/``bound_matrix`` carry the finite-rank bound-state part so
    that :meth:`apply` realizes the full operator.
    """

    band: int
    grid: Grid
    matrix: np.ndarray
    dmatrix: Optional[np.ndarray] = None
    point_values: Optional[np.ndarray] = None
    bound_matrix: Optional[np.ndarray] = None

    def apply(self, f: FunctionSample) -> FunctionSample:
        wf = self.grid.weights * f.values
        out = self.matrix @ wf
        if self.bound_matrix is not None and self.bound_matrix.shape[1]:
            out = out + self.bound_matrix @ (self.point_values * (self.bound_matrix.conj().T @ wf))
        return FunctionSample(self.grid, out)

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def _assemble(U, coef, dU, workers, block=512):
    n = U.shape[0]
    K = np.empty((n, n), dtype=complex)
    dK = np.empty((n, n), dtype=complex) if dU is not None else None
    UH = U.conj().T
    starts = range(0, n, block)

    def rows(s):
        sl = slice(s, min(s + block, n))
        K[sl] = (U[sl] * coef) @ UH
        if dK is not None:
            dK[sl] = (dU[sl] * coef) @ UH

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(rows, starts))
    else:
        for s in starts:
            rows(s)
    return K, dK


def kernel_from_symbol(symbol: Symbol, pot: Potential, grid: Grid, kquad: KQuadrature,
                       with_derivative: bool = False, band: int = -1, workers: int = 1) -> MultiplierKernel:
    """Kernel of symbol(H) assembled on ``grid`` with the given k-rule."""
    U, r, dU = product_factors(pot, grid.points, kquad.nodes, with_derivative)
    coef = kquad.weights * np.asarray(symbol(kquad.nodes ** 2), dtype=float) * r / TWO_PI
    K, dK = _assemble(U, coef, dU, workers)
    if pot.level > 0:
        states = bound_states(pot, grid)
        B = np.column_stack([s.samples.values for s in states])
        pv = np.asarray(symbol(np.array([s.eigenvalue for s in states])), dtype=float)
    else:
        B, pv = np.zeros((grid.n_points, 0), dtype=complex), np.zeros(0)
    return MultiplierKernel(band, grid, K, dK, pv, B)


def build_band_kernel(system, j: int, pot: Potential, grid: Grid, with_derivative: bool = False,
                      workers: int = 1) -> MultiplierKernel:
    """Kernel K_j(x, y) of φ(2^{-j} H) (Φ(H) for j = 0) restricted to the continuum.

    The k-rule covers exactly the band's support; a band beyond the grid's
    Nyquist limit raises :class:`ResolutionError`.
    """
    if j < 0:
        raise InvalidParameterError("band index must be nonnegative")
    kquad = band_quadrature(grid, j)
    return kernel_from_symbol(system.analysis_window(j), pot, grid, kquad, with_derivative, j, workers)


@dataclass(frozen=True)
class DecayProfile:
    band: int
    n_power: int
    C_measured: float
    D_measured: Optional[float]


def decay_profile(kernel: MultiplierKernel, n_power: int, block: int = 512) -> DecayProfile:
    """Measured constants in |K_j| <= C 2^{j/2} w_j^{-n}, |∂_x K_j| <= D 2^j w_j^{-n}.

    w_j(x - y) = 1 + 2^{j/2} |x - y|.
    """
    if n_power < 1:
        raise InvalidParameterError("n_power must be a positive integer")
    j = kernel.band
    x = kernel.grid.points
    sj = 2.0 ** (j / 2)
    c_max = d_max = 0.0
    for s in range(0, x.size, block):
        sl = slice(s, min(s + block, x.size))
        wn = (1.0 + sj * np.abs(x[sl, None] - x[None, :])) ** n_power
        c_max = max(c_max, float(np.max(np.abs(kernel.matrix[sl]) * wn)))
        if kernel.dmatrix is not None:
            d_max = max(d_max, float(np.max(np.abs(kernel.dmatrix[sl]) * wn)))
    return DecayProfile(j, n_power, c_max / sj, d_max / sj ** 2 if kernel.dmatrix is not None else None)


# -- covariance under scaling and translation ----------------------------------------


def kernel_at_points(symbol: Symbol, pot: Potential, x: np.ndarray, y: np.ndarray,
                     kquad: KQuadrature) -> np.ndarray:
    """Full kernel symbol(H)(x_i, y_l) (continuum + bound states) at arbitrary points."""
    Ux, r, _ = product_factors(pot, x, kquad.nodes)
    Uy, _, _ = product_factors(pot, y, kquad.nodes)
    coef = kquad.weights * np.asarray(symbol(kquad.nodes ** 2), dtype=float) * r / TWO_PI
    K = (Ux * coef) @ Uy.conj().T
    for m in range(1, pot.level + 1):
        b = bound_state_function(pot, m)
        energy = -(pot.scale * m) ** 2
        K = K + float(symbol(np.array([energy]))[0]) * np.outer(b(x), np.conj(b(y)))
    return K


@dataclass(frozen=True)
class CovarianceResult:
    scale_deviation: float
    shift_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.scale_deviation, self.shift_deviation)


def covariance_check(pot: Potential, symbol: Symbol, scale: float, shift: float,
                     lattice: Optional[np.ndarray] = None, k_max: float = 6.0,
                     dk: float = 0.005) -> CovarianceResult:
    """Compare kernels of the scaled/shifted operator against the base operator.

    Scaling: symbol(H_a)(x, y) = a · symbol(a²·)(H)(a x, a y), where H_a has
    potential a² V(a x). Translation: symbol(H_h)(x, y) = symbol(H)(x - h, y - h).
    ``k_max`` must be large enough for the symbol to be negligible beyond it.
    """
    n = pot.require_integer()
    if lattice is None:
        lattice = np.linspace(-3.0, 3.0, 13)
    base = Potential(level=n)

    def rule(kmax):
        return symmetric_quadrature(kmax, dk)

    scaled = Potential(level=n, scale=scale)
    lhs = kernel_at_points(symbol, scaled, lattice, lattice, rule(k_max))
    dilated = lambda xi: symbol(scale * scale * np.asarray(xi))
    rhs = scale * kernel_at_points(dilated, base, scale * lattice, scale * lattice, rule(k_max / scale))
    dev_scale = float(np.max(np.abs(lhs - rhs)))

    shifted = Potential(level=n, shift=shift)
    lhs = kernel_at_points(symbol, shifted, lattice, lattice, rule(k_max))
    rhs = kernel_at_points(symbol, base, lattice - shift, lattice - shift, rule(k_max))
    dev_shift = float(np.max(np.abs(lhs - rhs)))
    return CovarianceResult(dev_scale, dev_shift)
