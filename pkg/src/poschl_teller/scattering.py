"""Scattering theory of the Pöschl–Teller operator H = -d²/dx² - λ(λ-1) a² sech²(a(x-h)).

For integer λ = n + 1 the distorted plane waves have the closed form

    e(x, k) = sign(k)^n · Π_{j=1..n} (j + i|k|)^{-1} · p_n(tanh x, ik) · e^{ikx}

where p_n is generated by the recursion p_n = (1-t²) ∂_t p_{n-1} + (κ - n t) p_{n-1}.
For non-integer λ only the asymptotic phases are available in closed form
(Gamma-function ratios); eigenfunctions are obtained by ODE integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .errors import DomainError, ExtractionError, InvalidParameterError, PreconditionError
from .numerics import FunctionSample, Grid, integrate_schrodinger, log_gamma_complex


@dataclass(frozen=True)
class Potential:
    """Pöschl–Teller potential, integer ``level`` n (λ = n + 1) or real ``lam`` > 1.

    ``scale`` a and ``shift`` h give V(x) = -λ(λ-1) a² sech²(a(x - h)).
    """

    level: Optional[int] = None
    lam: Optional[float] = None
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if (self.level is None) == (self.lam is None):
            raise InvalidParameterError("exactly one of level, lam must be set")
        if self.level is not None:
            if int(self.level) != self.level or self.level < 0:
                raise InvalidParameterError(f"level must be a nonnegative integer, got {self.level}")
            object.__setattr__(self, "level", int(self.level))
        elif not self.lam > 1:
            raise InvalidParameterError(f"lam must exceed 1, got {self.lam}")
        if not self.scale > 0:
            raise InvalidParameterError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "shift", float(self.shift))

    @property
    def is_integer(self) -> bool:
        return self.level is not None

    @property
    def lambda_(self) -> float:
        return float(self.level + 1) if self.is_integer else float(self.lam)

    @property
    def coupling(self) -> float:
        lam = self.lambda_
        return lam * (lam - 1.0)

    def __call__(self, x):
        a = self.scale
        return -self.coupling * a * a / np.cosh(a * (np.asarray(x, dtype=float) - self.shift)) ** 2

    def require_integer(self) -> int:
        if not self.is_integer:
            raise InvalidParameterError("operation needs an integer-level potential")
        return self.level


@dataclass(frozen=True, eq=False)
class ScatteringPolynomial:
    """p_n(t, κ) = Σ coeffs[a, b] t^a κ^b with exact integer coefficients."""

    degree: int
    coeffs: np.ndarray

    def evaluate(self, t, kappa):
        """Elementwise evaluation with numpy broadcasting."""
        t = np.asarray(t)
        kappa = np.asarray(kappa)
        out = np.zeros(np.broadcast(t, kappa).shape, dtype=complex)
        for b in range(self.coeffs.shape[1] - 1, -1, -1):
            col = npoly.polyval(t, self.coeffs[:, b].astype(float))
            out = out * kappa + col
        return out

    def table(self, t: np.ndarray, kappa: np.ndarray) -> np.ndarray:
        """Outer evaluation: ``out[i, m] = p(t[i], kappa[m])``."""
        tv = np.vander(np.asarray(t, dtype=float), self.coeffs.shape[0], increasing=True)
        kv = np.vander(np.asarray(kappa, dtype=complex), self.coeffs.shape[1], increasing=True)
        return tv @ self.coeffs.astype(float) @ kv.T

    def evaluate_exact(self, t, kappa):
        """Horner evaluation in Python arithmetic (ints, Fractions, complex)."""
        total = 0
        for a in range(self.coeffs.shape[0] - 1, -1, -1):
            row = 0
            for b in range(self.coeffs.shape[1] - 1, -1, -1):
                row = row * kappa + int(self.coeffs[a, b])
            total = total * t + row
        return total

    def dt(self) -> "ScatteringPolynomial":
        """Partial derivative in t."""
        if self.coeffs.shape[0] == 1:
            return ScatteringPolynomial(self.degree, np.zeros_like(self.coeffs))
        c = self.coeffs[1:] * np.arange(1, self.coeffs.shape[0])[:, None]
        return ScatteringPolynomial(self.degree, c)


@lru_cache(maxsize=None)
def scattering_polynomial(n: int) -> ScatteringPolynomial:
    """p_n from the recursion p_n = (1 - t²) ∂_t p_{n-1} + (κ - n t) p_{n-1}, p_0 = 1."""
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    c = np.ones((1, 1), dtype=np.int64)
    for m in range(1, n + 1):
        new = np.zeros((m + 1, m + 1), dtype=np.int64)
        d = c[1:] * np.arange(1, c.shape[0])[:, None]  # ∂_t
        new[: d.shape[0], : d.shape[1]] += d
        new[2 : d.shape[0] + 2, : d.shape[1]] -= d
        new[: c.shape[0], 1 : c.shape[1] + 1] += c  # κ p
        new[1 : c.shape[0] + 1, : c.shape[1]] -= m * c  # -m t p
        c = new
    c.flags.writeable = False
    return ScatteringPolynomial(n, c)


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise DomainError("k = 0 is a resonance; scattering data are undefined there")
    return k


def _normalizer(n: int, abs_k: np.ndarray) -> np.ndarray:
    out = np.ones_like(abs_k, dtype=complex)
    for j in range(1, n + 1):
        out = out / (j + 1j * abs_k)
    return out


def eigenfunction(pot: Potential, x, k):
    """Distorted plane wave e(x, k) for an integer-level potential (broadcasts x, k)."""
    n = pot.require_integer()
    k = _check_k(k)
    a, h = pot.scale, pot.shift
    xs = a * (np.asarray(x, dtype=float) - h)
    ks = k / a
    p = scattering_polynomial(n).evaluate(np.tanh(xs), 1j * ks)
    return np.sign(ks) ** n * _normalizer(n, np.abs(ks)) * p * np.exp(1j * ks * xs)


def eigenfunction_derivative(pot: Potential, x, k):
    """∂_x e(x, k) for scalar k, through the analytic product factors."""
    n = pot.require_integer()
    k = float(_check_k(k))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _, _, dU = product_factors(pot, x, np.array([k]), with_derivative=True)
    ks = k / pot.scale
    return np.sign(ks) ** n * _normalizer(n, np.abs(np.array([ks])))[0] * dU[:, 0]


def eigenfunction_matrix(pot: Potential, x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """``E[i, m] = e(x[i], k[m])`` assembled through the polynomial table."""
    n = pot.require_integer()
    k = _check_k(k)
    a, h = pot.scale, pot.shift
    xs = a * (np.asarray(x, dtype=float) - h)
    ks = k / a
    p = scattering_polynomial(n).table(np.tanh(xs), 1j * ks)
    p *= np.exp(1j * np.outer(xs, ks))
    p *= (np.sign(ks) ** n * _normalizer(n, np.abs(ks)))[None, :]
    return p


def product_factors(pot: Potential, x: np.ndarray, k: np.ndarray, with_derivative: bool = False):
    """Factors of the analytic product e(x,k) conj(e(y,k)) = Σ U(x,k) r(k) conj(U(y,k)).

    Returns ``(U, r, dU)`` with ``U[i, m] = P_n(x_i, ik_m) e^{ik_m x_i}`` (scaled
    coordinates), ``r[m] = Π (j² + k_m²)^{-1}`` and ``dU = ∂_x U`` (or None).
    Unlike ``e`` itself these are smooth across k = 0.
    """
    n = pot.require_integer()
    k = np.asarray(k, dtype=float)
    a, h = pot.scale, pot.shift
    xs = a * (np.asarray(x, dtype=float) - h)
    ks = k / a
    t = np.tanh(xs)
    poly = scattering_polynomial(n)
    phase = np.exp(1j * np.outer(xs, ks))
    p = poly.table(t, 1j * ks)
    U = p * phase
    r = np.ones_like(ks)
    for j in range(1, n + 1):
        r = r / (j * j + ks * ks)
    dU = None
    if with_derivative:
        dp = poly.dt().table(t, 1j * ks) * (1 - t * t)[:, None]
        dU = (a * dp + 1j * k[None, :] * p) * phase
    return U, r, dU


def transmission(n: int, k: float, side: str = "+") -> complex:
    """Transmission coefficient T_±(k) of the reflectionless level-n potential."""
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    if k == 0:
        raise DomainError("k = 0 is a resonance; T is undefined there")
    if side not in ("+", "-"):
        raise InvalidParameterError("side must be '+' or '-'")
    t = complex((-1) ** n)
    for j in range(1, n + 1):
        if side == "+":
            t *= (j - 1j * k) / (j + 1j * k)
        else:
            t *= (j + 1j * k) / (j - 1j * k)
    return t


def reflection(n: int, k: float, side: str = "+") -> complex:
    """Reflection coefficient; identically zero for integer levels."""
    if k == 0:
        raise DomainError("k = 0 is a resonance; R is undefined there")
    return 0j


def point_spectrum(n: int) -> list[float]:
    """Eigenvalues {-n², ..., -4, -1} in increasing order."""
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    return [-float(j * j) for j in range(n, 0, -1)]


# -- bound states ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _ladder(n: int, m: int) -> tuple[np.ndarray, float]:
    """Bound state of level n at energy -m² as sech^m(x) · q(tanh x).

    Starts from the ground state sech^m of level m and applies
    T_l = d/dx - l tanh x for l = m+1, ..., n. Returns ``(q coefficients, L² norm)``.
    """
    q = np.array([1.0])
    for l in range(m + 1, n + 1):
        dq = npoly.polyder(q) if q.size > 1 else np.array([0.0])
        term = npoly.polysub(npoly.polymul([1.0, 0.0, -1.0], dq), npoly.polymul([0.0, float(m + l)], q))
        q = npoly.polytrim(term, 0) if np.any(term) else np.array([0.0])
    # ∫ sech^{2m} q(tanh)^2 dx = ∫_{-1}^{1} (1 - t²)^{m-1} q(t)² dt
    integrand = npoly.polymul(npoly.polypow([1.0, 0.0, -1.0], m - 1), npoly.polymul(q, q))
    anti = npoly.polyint(integrand)
    norm2 = npoly.polyval(1.0, anti) - npoly.polyval(-1.0, anti)
    return q, math.sqrt(norm2)


def bound_state_function(pot: Potential, m: int) -> Callable[[np.ndarray], np.ndarray]:
    """L²(ℝ)-normalized bound state at eigenvalue -a²m² as a vectorized callable."""
    n = pot.require_integer()
    if not 1 <= m <= n:
        raise InvalidParameterError(f"bound-state index must be in 1..{n}, got {m}")
    q, norm = _ladder(n, m)
    a, h = pot.scale, pot.shift
    c = math.sqrt(a) / norm

    def f(x):
        xs = a * (np.asarray(x, dtype=float) - h)
        return c * npoly.polyval(np.tanh(xs), q) / np.cosh(xs) ** m

    return f


@dataclass(frozen=True, eq=False)
class BoundState:
    index: int
    eigenvalue: float
    samples: FunctionSample
    norm: float = 1.0


def _check_decay(pot: Potential, grid: Grid, threshold: float = 1e-10):
    a, h = pot.scale, pot.shift
    edge = min(a * (grid.x_max - h), a * (h - grid.x_min))
    if edge <= 0 or 1.0 / math.cosh(min(edge, 700.0)) >= threshold:
        raise PreconditionError(
            f"grid [{grid.x_min}, {grid.x_max}] too narrow for bound-state decay (need sech < {threshold})"
        )


def bound_states(pot: Potential, grid: Grid) -> list[BoundState]:
    """All bound states of an integer-level potential, ordered by index j = 1..n."""
    n = pot.require_integer()
    if n < 1:
        raise PreconditionError("level-0 potential has no bound states")
    _check_decay(pot, grid)
    out = []
    for m in range(1, n + 1):
        vals = bound_state_function(pot, m)(grid.points)
        out.append(BoundState(m, -(pot.scale * m) ** 2, FunctionSample(grid, vals)))
    return out


def second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Eighth-order central difference; the first and last 4 entries are NaN."""
    c = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])
    out = np.full(values.shape, np.nan, dtype=np.result_type(values, float))
    out[4:-4] = np.convolve(values, c[::-1], mode="valid") / (h * h)
    return out


def eigen_residual(values: np.ndarray, grid: Grid, pot_values: np.ndarray, energy: float) -> float:
    """Relative residual ‖-u'' + V u - E u‖₂ / ‖u‖₂ on the grid interior."""
    d2 = second_derivative(values, grid.spacing)
    r = (-d2 + (pot_values - energy) * values)[4:-4]
    w = grid.weights[4:-4]
    return float(np.sqrt(np.sum(w * np.abs(r) ** 2) / np.sum(w * np.abs(values[4:-4]) ** 2)))


def _shoot(pot_eval, kappa: float, x_left: float, x_mid: float) -> tuple[float, float]:
    """Integrate the decaying solution e^{κx} from the far left to ``x_mid``."""
    g = Grid(x_left, x_mid, 2)
    u, du = integrate_schrodinger(pot_eval, -kappa * kappa, x_left, x_mid, 1.0, kappa, g, rtol=1e-12, atol=1e-300)
    return float(u.values[-1].real), float(du.values[-1].real)


def shooting_eigenvalues(pot: Potential, x_far: float = 20.0, step: float = 0.1) -> list[float]:
    """Point spectrum by parity shooting, independent of the closed forms.

    Decaying data are launched at ``shift - x_far``; even states have u'(shift) = 0,
    odd states u(shift) = 0. Roots in κ are bracketed on a scan and refined with brentq.
    """
    a, h = pot.scale, pot.shift
    kmax = a * (pot.lambda_ - 1) + 0.5 * a
    x_left = h - x_far / a

    def mismatch(kappa):
        u, du = _shoot(pot, kappa, x_left, h)
        s = math.hypot(u, du / max(kappa, 1e-12))
        return u / s, du / (kappa * s)

    kappas = np.arange(step, kmax, step)
    vals = np.array([mismatch(kp) for kp in kappas])
    roots = []
    for col in (0, 1):
        for i in range(len(kappas) - 1):
            if vals[i, col] == 0 or vals[i, col] * vals[i + 1, col] < 0:
                r = brentq(lambda kp: mismatch(kp)[col], kappas[i], kappas[i + 1], xtol=1e-14, rtol=1e-14)
                roots.append(r)
    return sorted(-r * r for r in roots)


# -- continuous parameter λ -------------------------------------------------------


@dataclass(frozen=True)
class ContinuousScattering:
    phi_e: float
    phi_o: float
    T: complex
    R: complex


def _wrap(phase: float) -> float:
    return float(math.remainder(phase, 2 * math.pi))


def _from_phases(phi_e: float, phi_o: float) -> ContinuousScattering:
    ee, eo = np.exp(2j * phi_e), np.exp(2j * phi_o)
    return ContinuousScattering(_wrap(phi_e), _wrap(phi_o), complex((ee - eo) / 2), complex((ee + eo) / 2))


def continuous_scattering(lam: float, scale: float, k: float) -> ContinuousScattering:
    """Even/odd asymptotic phases via Gamma-function ratios, and T, R from them.

    Phases follow the cosine convention u_e ~ C_e cos(k|x| + φ_e),
    u_o ~ ±C_o cos(k|x| + φ_o).
    """
    if not lam > 1:
        raise DomainError(f"lam must exceed 1, got {lam}")
    if k == 0:
        raise DomainError("k = 0 is a resonance")
    if not scale > 0:
        raise InvalidParameterError("scale must be positive")
    kk = k / scale
    common = log_gamma_complex(1j * kk) - 1j * kk * math.log(2.0)
    half = 0.5j * kk
    phi_e = (common - log_gamma_complex(lam / 2 + half) - log_gamma_complex((1 - lam) / 2 + half)).imag
    phi_o = (common - log_gamma_complex((lam + 1) / 2 + half) - log_gamma_complex(1 - lam / 2 + half)).imag
    return _from_phases(phi_e, phi_o)


def phase_gap_formula(lam: float, k: float) -> float:
    """arctan(sinh πk / sin πλ): the even-minus-odd phase modulo π."""
    return math.atan2(math.sinh(math.pi * k), math.sin(math.pi * lam))


def ode_phase_extraction(
    lam: float,
    scale: float,
    k: float,
    grid: Grid,
    pot_eval: Optional[Callable] = None,
    fit_fraction: float = 0.1,
    max_residual: float = 1e-6,
) -> ContinuousScattering:
    """Phases from the ODE: integrate u_e, u_o from x = 0, fit C cos(kx + φ) far out.

    ``pot_eval`` overrides the potential (e.g. ``lambda x: 0.0`` for the free case).
    """
    if pot_eval is None:
        if not lam > 1:
            raise DomainError(f"lam must exceed 1, got {lam}")
        pot_eval = Potential(lam=lam, scale=scale)
    if k == 0:
        raise DomainError("k = 0 is a resonance")
    x_end = grid.x_max
    if x_end <= 0:
        raise PreconditionError("grid must extend to positive x")
    n_half = int(round(x_end / grid.spacing)) + 1
    half = Grid(0.0, x_end, max(n_half, 2))
    x = half.points
    fit = x >= (1 - fit_fraction) * x_end
    if abs(pot_eval(x[fit][0])) >= 1e-10 * k * k:
        raise PreconditionError("grid does not reach the region where the potential is negligible")
    basis = np.column_stack([np.cos(k * x[fit]), np.sin(k * x[fit])])
    phases = []
    for u0, du0 in ((1.0, 0.0), (0.0, 1.0)):
        u, _ = integrate_schrodinger(pot_eval, k * k, 0.0, x_end, u0, du0, half, rtol=1e-12)
        y = u.values.real[fit]
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        amp = math.hypot(*coef)
        resid = np.sqrt(np.mean((basis @ coef - y) ** 2)) / amp
        if resid > max_residual:
            raise ExtractionError(f"phase fit residual {resid:.2e} exceeds {max_residual:.0e}")
        phases.append(math.atan2(-coef[1], coef[0]))
    return _from_phases(*phases)


def continuous_point_spectrum(lam: float) -> list[float]:
    """Negative eigenvalues -(λ-1-j)², j = 0, 1, ... with λ-1-j > 0, increasing order."""
    if not lam > 1:
        raise InvalidParameterError(f"lam must exceed 1, got {lam}")
    vals = []
    j = 0
    while lam - 1 - j > 0:
        vals.append(-((lam - 1 - j) ** 2))
        j += 1
    return sorted(vals)


def orthogonality_integral(k: float, eta: float, grid: Grid) -> complex:
    """Trapezoid value of ∫ sech(kz)(iη - k tanh(kz)) e^{iηz} dz (vanishes identically)."""
    if not k > 0:
        raise InvalidParameterError("k must be positive")
    z = grid.points
    f = (1j * eta - k * np.tanh(k * z)) * np.exp(1j * eta * z) / np.cosh(k * z)
    return complex(np.sum(grid.weights * f))

