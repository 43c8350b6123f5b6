"""The Schrödinger group e^{-itH} through the spectral representation, and the
Besov-scale dispersive decay experiment.

Propagation multiplies the continuum coefficients by e^{-itk²} and the bound-state
coefficients by e^{-itλ_m}; no time stepping is involved.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainTooSmallError, InvalidParameterError, RefinementRequiredError
from .littlewood_paley import DyadicSystem
from .numerics import FunctionSample, Grid, KQuadrature, full_quadrature, lp_norm
from .scattering import Potential, product_factors
from .spaces import NormSpec, norm
from .spectral import check_resolvable, spectral_basis

PHASE_LIMIT = math.pi / 4
LEAKAGE_LIMIT = 0.01


def japanese_bracket(t):
    """⟨t⟩ = (1 + t²)^{1/2}."""
    return np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2)


def dispersive_exponent(p: float) -> float:
    """β = |1/2 - 1/p|."""
    return abs(0.5 - (0.0 if math.isinf(p) else 1.0 / p))


def check_phase_resolution(t: float, kquad: KQuadrature):
    value = abs(t) * kquad.k_max * kquad.max_spacing
    if value > PHASE_LIMIT * (1 + 1e-12):
        raise RefinementRequiredError(
            f"|t| k_max dk = {value:.4g} exceeds π/4; refine the k-rule (dk <= {PHASE_LIMIT / (abs(t) * kquad.k_max):.3g})"
        )


def evolution_quadrature(grid: Grid, t_max: float, k_max: float) -> KQuadrature:
    """Full-line k-rule fine enough for every |t| <= t_max."""
    check_resolvable(k_max, grid)
    spacing = grid.max_k_spacing
    if t_max > 0:
        spacing = min(spacing, PHASE_LIMIT / (t_max * k_max))
    return full_quadrature(grid, k_max, spacing)


def _phases(basis, t: float):
    return np.exp(-1j * t * basis.xi), np.exp(-1j * t * basis.energies)


def propagate(f: FunctionSample, pot: Potential, t: float, kquad: KQuadrature) -> FunctionSample:
    """e^{-itH} f."""
    return propagate_many(f, pot, [t], kquad)[0]


def propagate_many(f: FunctionSample, pot: Potential, times: Sequence[float], kquad: KQuadrature,
                   workers: int = 1) -> list[FunctionSample]:
    """e^{-itH} f for each t; the transform of f is computed once."""
    for t in times:
        check_phase_resolution(t, kquad)
    basis = spectral_basis(pot, f.grid, kquad)
    ac, pp = basis.forward(f.values)

    def one(t):
        pa, pb = _phases(basis, t)
        return FunctionSample(f.grid, basis.inverse(pa * ac, pb * pp))

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, times))
    return [one(t) for t in times]


def wave_packet(pot: Potential, grid: Grid, sigma_k: float, k0: float = 0.0,
                kquad: Optional[KQuadrature] = None) -> FunctionSample:
    """Pure-continuum packet (2π)^{-1} ∫ G(k) P(x, ik) e^{ikx} / Π_j (j + ik) dk, G Gaussian.

    Equivalently the synthesis of coefficients sign(k)^n Π_j (j+i|k|)/(j+ik) G(k), whose
    sign jump at k = 0 cancels the one in e(x, k), so the packet is Schwartz.
    Normalized to unit L² norm on the grid.
    """
    if not sigma_k > 0:
        raise InvalidParameterError("sigma_k must be positive")
    n = pot.require_integer()
    if kquad is None:
        kquad = full_quadrature(grid, abs(k0) + 8.0 * sigma_k)
    k = kquad.nodes
    a = pot.scale
    U, _, _ = product_factors(pot, grid.points, k)
    denom = np.prod([j + 1j * k / a for j in range(1, n + 1)], axis=0) if n else np.ones_like(k)
    G = np.exp(-((k - k0) ** 2) / (2 * sigma_k ** 2))
    values = U @ (kquad.weights * G / denom) / (2 * np.pi)
    f = FunctionSample(grid, values)
    return f.scaled(1.0 / lp_norm(f, 2))


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: list
    norms: dict = field(default_factory=dict)


@dataclass
class DecayResult:
    """Decay curve r(t) = ‖ψ(t)‖_out / (⟨t⟩^β ‖f‖_in)."""

    evolution: EvolutionResult
    beta: float
    norm_in: float
    norm_out: np.ndarray
    bound: np.ndarray
    ratio: np.ndarray

    def early_max(self, t_early: float = 5.0) -> float:
        return float(np.max(self.ratio[self.evolution.times <= t_early]))

    def passes(self, t_early: float = 5.0, factor: float = 1.5) -> bool:
        """sup_t r(t) finite and at most ``factor`` times its maximum over t <= t_early."""
        if not np.all(np.isfinite(self.ratio)):
            return False
        return float(np.max(self.ratio)) <= factor * self.early_max(t_early)

    def rows(self) -> list[tuple]:
        return [(float(t), float(a), float(b), float(r))
                for t, a, b, r in zip(self.evolution.times, self.norm_out, self.bound, self.ratio)]


def _check_leakage(f: FunctionSample, states: Sequence[FunctionSample], times: Sequence[float]):
    m0 = lp_norm(f, 2) ** 2
    for t, s in zip(times, states):
        lost = 1.0 - lp_norm(s, 2) ** 2 / m0
        if lost > LEAKAGE_LIMIT:
            raise DomainTooSmallError(f"{100 * lost:.2f}% of the mass left the grid by t = {t:g}")


def decay_experiment(f: FunctionSample, pot: Potential, spec_out: NormSpec, spec_in: NormSpec,
                     times: Sequence[float], system: DyadicSystem, k_max: Optional[float] = None,
                     workers: int = 1) -> DecayResult:
    """Tabulate ‖e^{-itH} f‖_out against ⟨t⟩^β ‖f‖_in with β = |1/2 - 1/p|.

    ``spec_in.alpha`` must equal ``spec_out.alpha + 2β`` with shared family, p and q.
    """
    if (spec_in.family, spec_in.p, spec_in.q) != (spec_out.family, spec_out.p, spec_out.q):
        raise InvalidParameterError("input and output norms must share family, p and q")
    beta = dispersive_exponent(spec_out.p)
    if abs(spec_in.alpha - (spec_out.alpha + 2 * beta)) > 1e-12:
        raise InvalidParameterError(f"need alpha_in = alpha_out + 2β = {spec_out.alpha + 2 * beta:g}")
    times = np.asarray(times, dtype=float)
    if k_max is None:
        k_max = 2.0 ** (max(spec_in.J, spec_out.J) / 2)
    kquad = evolution_quadrature(f.grid, float(np.max(np.abs(times))), k_max)
    states = propagate_many(f, pot, times, kquad, workers)
    _check_leakage(f, states, times)
    n_in = norm(f, spec_in, system, pot)
    n_out = np.array([norm(s, spec_out, system, pot) for s in states])
    bound = japanese_bracket(times) ** beta * n_in
    evo = EvolutionResult(times, states, {"out": n_out, "l2": np.array([lp_norm(s, 2) for s in states])})
    return DecayResult(evo, beta, n_in, n_out, bound, n_out / bound)
