"""The thirteen acceptance checks, shared by the ``verify`` subcommand and the test suite.

Each check returns a :class:`CheckResult`; ``value`` is the measured quantity compared
against ``threshold`` (the direction of the comparison is documented per check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import evolution as evo
from .io import check_record
from .littlewood_paley import (DyadicSystem, analysis, build_dyadic_system, hl_maximal_values,
                               peetre_sup)
from .numerics import FunctionSample, Grid, integrate_schrodinger
from .scattering import (Potential, _wrap, continuous_scattering, eigenfunction,
                         eigenfunction_derivative, ode_phase_extraction, orthogonality_integral,
                         point_spectrum, reflection, shooting_eigenvalues, transmission)
from .spaces import NormSpec, battery, equivalence_experiment, identification_experiment
from .spectral import (build_band_kernel, covariance_check, decay_profile, default_quadrature,
                       forward_transform, inverse_transform)


@dataclass
class CheckResult:
    check_id: str
    anchor: str
    value: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)

    def record(self) -> dict:
        return check_record(self.check_id, self.anchor, self.value, self.threshold, self.passed, self.details)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.check_id}: value={self.value:.4g} threshold={self.threshold:.4g}"


@dataclass(frozen=True)
class VerifyConfig:
    grid: Grid = Grid()
    variant: str = "sqrt-partition"
    workers: int = 1


def _rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# 1 ---------------------------------------------------------------------------------
def check_reflectionless(cfg: VerifyConfig) -> CheckResult:
    """max ||T(k)| - 1| <= 1e-12 with R = 0 exactly, n in {1,2,3}."""
    dev, max_r = 0.0, 0.0
    per = {}
    for n in (1, 2, 3):
        for k in (0.25, 0.5, 1.0, 2.0, 4.0):
            for side in ("+", "-"):
                d = abs(abs(transmission(n, k, side)) - 1.0)
                dev = max(dev, d)
                max_r = max(max_r, abs(reflection(n, k, side)))
            per[f"n={n},k={k}"] = abs(transmission(n, k))
    return CheckResult("reflectionless", "reflection coefficients vanish", dev, 1e-12,
                       dev <= 1e-12 and max_r == 0.0, {"max_abs_R": max_r, "abs_T": per})


# 2 ---------------------------------------------------------------------------------
def check_closed_form_vs_ode(cfg: VerifyConfig) -> CheckResult:
    """Relative L∞ gap between e(x, k) and a DOP853 solution on [-10, 10] (<= 1e-6)."""
    grid = Grid(-10.0, 10.0, 2001)
    worst, per = 0.0, {}
    for n in (1, 2):
        pot = Potential(level=n)
        for k in (0.5, 1.0, 2.0):
            exact = eigenfunction(pot, grid.points, k)
            u0 = complex(exact[0])
            du0 = complex(eigenfunction_derivative(pot, grid.x_min, k)[0])
            u, _ = integrate_schrodinger(pot, k * k, grid.x_min, grid.x_max, u0, du0, grid, rtol=1e-12)
            err = float(np.max(np.abs(u.values - exact)) / np.max(np.abs(exact)))
            per[f"n={n},k={k}"] = err
            worst = max(worst, err)
    return CheckResult("closed_form_vs_ode", "closed-form distorted plane waves", worst, 1e-6, worst <= 1e-6, per)


# 3 ---------------------------------------------------------------------------------
def check_point_spectrum(cfg: VerifyConfig) -> CheckResult:
    """Shooting eigenvalues vs {-n², ..., -1} (<= 1e-6 each)."""
    worst, per = 0.0, {}
    for n in (1, 2, 3):
        found = shooting_eigenvalues(Potential(level=n))
        expected = point_spectrum(n)
        if len(found) != len(expected):
            return CheckResult("point_spectrum", "point spectrum", math.inf, 1e-6, False,
                               {f"n={n}": found})
        err = max(abs(a - b) for a, b in zip(found, expected))
        per[f"n={n}"] = found
        worst = max(worst, err)
    return CheckResult("point_spectrum", "point spectrum", worst, 1e-6, worst <= 1e-6, per)


# 4 ---------------------------------------------------------------------------------
def check_completeness(cfg: VerifyConfig) -> CheckResult:
    """Round trip through the distorted transform over the battery (relative L² <= 1e-4)."""
    kq = default_quadrature(cfg.grid)
    worst, per = 0.0, {}
    for n in (1, 2):
        pot = Potential(level=n)
        for fid, f in battery(pot, cfg.grid).items():
            back = inverse_transform(forward_transform(f, pot, kq), pot, cfg.grid)
            err = _rel_l2(back.values, f.values)
            per[f"n={n}:{fid}"] = err
            worst = max(worst, err)
    return CheckResult("completeness_round_trip", "completeness of the generalized eigenfunctions",
                       worst, 1e-4, worst <= 1e-4, per)


# 5 ---------------------------------------------------------------------------------
def check_kernel_decay(cfg: VerifyConfig, system: Optional[DyadicSystem] = None) -> CheckResult:
    """Measured C, D for j = 1..6 (n_power 2, 3): finite with max/min spread <= 10; j = 0 finite."""
    system = system or build_dyadic_system(cfg.variant)
    pot = Potential(level=2)
    C = {2: [], 3: []}
    D = {2: [], 3: []}
    low = {}
    for j in range(0, 7):
        K = build_band_kernel(system, j, pot, cfg.grid, with_derivative=True, workers=cfg.workers)
        for npow in (2, 3):
            prof = decay_profile(K, npow)
            if j == 0:
                low[npow] = prof.C_measured
            else:
                C[npow].append(prof.C_measured)
                D[npow].append(prof.D_measured)
        del K
    spreads = {}
    ok = all(np.isfinite(v) for v in low.values())
    for npow in (2, 3):
        for name, vals in (("C", C[npow]), ("D", D[npow])):
            vals = np.asarray(vals)
            ok &= bool(np.all(np.isfinite(vals)) and np.all(vals > 0))
            spreads[f"{name}{npow}"] = float(vals.max() / vals.min())
    worst = max(spreads.values())
    details = {"spread": spreads, "C": C, "D": D, "low_energy_C": low}
    return CheckResult("kernel_decay", "dyadic kernel decay bound", worst, 10.0, ok and worst <= 10.0, details)


# 6 ---------------------------------------------------------------------------------
def _band(f: FunctionSample, system: DyadicSystem, pot: Potential, J: int) -> np.ndarray:
    return analysis(f, system, pot, J).values


def check_maximal_inequalities(cfg: VerifyConfig, system: Optional[DyadicSystem] = None,
                               s: float = 3.0, r: float = 0.5) -> CheckResult:
    """Measured constants for φ** <= C 2^{j/2} φ* and φ* <= C [M(|φ_j f|^r)]^{1/r}.

    Both constants must be finite; the derivative constant's per-band maxima must
    also stay within a factor 10 of each other over j = 1..5 (uniformity in j).
    """
    system = system or build_dyadic_system(cfg.variant)
    grid = cfg.grid
    h = grid.spacing
    der_by_j = {j: 0.0 for j in range(1, 6)}
    hl_const = 0.0
    for n in (1, 2):
        pot = Potential(level=n)
        for fid, f in battery(pot, grid).items():
            bands = _band(f, system, pot, 5)
            for j in range(1, 6):
                b = bands[j]
                star = peetre_sup(np.abs(b), grid, j, s)
                dstar = peetre_sup(np.abs(np.gradient(b, h)), grid, j, s)
                der_by_j[j] = max(der_by_j[j], float(np.max(dstar / (2 ** (j / 2) * star))))
                m = hl_maximal_values(np.abs(b) ** r) ** (1.0 / r)
                hl_const = max(hl_const, float(np.max(star / m)))
    der = max(der_by_j.values())
    spread = der / min(der_by_j.values())
    ok = all(np.isfinite([der, hl_const, spread])) and spread <= 10.0
    details = {"derivative_constant_by_band": der_by_j, "derivative_band_spread": spread,
               "hl_constant": hl_const, "s": s, "r": r}
    return CheckResult("maximal_inequalities", "Peetre maximal function bounds", der, math.inf, ok, details)


# 7 ---------------------------------------------------------------------------------
EQUIVALENCE_SPECS = ((0.0, 2.0, 2.0), (1.0, 1.5, 1.5), (0.5, 3.0, 2.0))


def check_norm_equivalence(cfg: VerifyConfig, bound: float = 50.0) -> CheckResult:
    """Single C with all sqrt-partition / shifted-sqrt ratios in [1/C, C]; need C <= 50."""
    a, b = build_dyadic_system("sqrt-partition"), build_dyadic_system("shifted-sqrt")
    lo, hi, per, ok = math.inf, 0.0, {}, True
    for n in (0, 1, 2):
        pot = Potential(level=n)
        bat = battery(pot, cfg.grid, include_bound_states=True)
        for alpha, p, q in EQUIVALENCE_SPECS:
            stats = equivalence_experiment(a, b, NormSpec("F", alpha, p, q), bat, pot, bound)
            ok &= stats.passed
            lo, hi = min(lo, stats.minimum), max(hi, stats.maximum)
            per[f"n={n},alpha={alpha},p={p},q={q}"] = [stats.minimum, stats.maximum]
    C = max(hi, 1.0 / lo)
    return CheckResult("norm_equivalence", "independence of the dyadic system", C, bound, ok and C <= bound, per)


# 8 ---------------------------------------------------------------------------------
def check_lp_identification(cfg: VerifyConfig) -> CheckResult:
    """F_p^{0,2}(H) / L^p ratios finite for p in {1.5, 2, 3}; p = 2 inside [1/√3, √3] ± 10%."""
    system = build_dyadic_system(cfg.variant)
    lo2, hi2 = 1 / math.sqrt(3) / 1.1, math.sqrt(3) * 1.1
    ok, per, worst2 = True, {}, 1.0
    for n in (1, 2):
        pot = Potential(level=n)
        bat = battery(pot, cfg.grid, include_bound_states=True)
        for p in (1.5, 2.0, 3.0):
            stats = identification_experiment(NormSpec("F", 0.0, p, 2.0), bat, pot, system, "lp")
            ok &= stats.passed
            per[f"n={n},p={p}"] = [stats.minimum, stats.maximum]
            if p == 2.0:
                ok &= lo2 <= stats.minimum and stats.maximum <= hi2
                worst2 = max(worst2, stats.constant)
    return CheckResult("lp_identification", "F_p^{0,2}(H) equals L^p", worst2, hi2, ok, per)


# 9 ---------------------------------------------------------------------------------
def check_besov_identification(cfg: VerifyConfig) -> CheckResult:
    """‖f‖_{B_2^{1/2,2}(H)} / ‖f‖_{B_2^{1/2,2}(H₀)} finite and positive over the battery."""
    system = build_dyadic_system(cfg.variant)
    spec = NormSpec("B", 0.5, 2.0, 2.0)
    ok, per, spread = True, {}, 1.0
    for n in (1, 2):
        pot = Potential(level=n)
        stats = identification_experiment(spec, battery(pot, cfg.grid, include_bound_states=True), pot,
                                          system, "classical")
        ok &= stats.passed
        per[f"n={n}"] = dict(zip(stats.function_ids, stats.ratios))
        spread = max(spread, stats.maximum / stats.minimum)
    return CheckResult("besov_identification", "H-Besov equals classical Besov of doubled smoothness",
                       spread, math.inf, ok and bool(np.isfinite(spread)), per)


# 10 --------------------------------------------------------------------------------
def check_time_decay(cfg: VerifyConfig, sigma_k: float = 0.25) -> CheckResult:
    """p = 2: ratio spread <= 1e-3; p = 1: sup_t r(t) <= 1.5 max_{t<=5} r(t), t = 0..20, n = 1."""
    system = build_dyadic_system(cfg.variant)
    pot = Potential(level=1)
    f = evo.wave_packet(pot, cfg.grid, sigma_k)
    times = np.arange(0.0, 21.0)
    r2 = evo.decay_experiment(f, pot, NormSpec("B", 0.5, 2, 2, J=4), NormSpec("B", 0.5, 2, 2, J=4),
                              times, system, workers=cfg.workers)
    spread2 = float(np.ptp(r2.ratio) / np.max(r2.ratio))
    r1 = evo.decay_experiment(f, pot, NormSpec("B", 0.5, 1, 2, J=4), NormSpec("B", 1.5, 1, 2, J=4),
                              times, system, workers=cfg.workers)
    growth = float(np.max(r1.ratio) / r1.early_max(5.0))
    ok = spread2 <= 1e-3 and r1.passes(5.0, 1.5)
    details = {"p2_relative_spread": spread2, "p1_ratio": r1.ratio.tolist(), "p1_growth": growth}
    return CheckResult("time_decay", "Besov-scale dispersive bound", growth, 1.5, ok, details)


# 11 --------------------------------------------------------------------------------
def check_continuous_lambda(cfg: VerifyConfig) -> CheckResult:
    """|T|²+|R|² = 1 (1e-10), Gamma vs ODE phases (1e-4), |T| = 1 at integer λ."""
    cons, phase, per = 0.0, 0.0, {}
    ode_grid = Grid(-30.0, 30.0, 6001)
    for lam in (1.5, 2.5, 3.3):
        for k in (0.5, 1.0, 2.0):
            g = continuous_scattering(lam, 1.0, k)
            cons = max(cons, abs(abs(g.T) ** 2 + abs(g.R) ** 2 - 1.0))
            o = ode_phase_extraction(lam, 1.0, k, ode_grid)
            d = max(abs(_wrap(g.phi_e - o.phi_e)), abs(_wrap(g.phi_o - o.phi_o)))
            per[f"lam={lam},k={k}"] = d
            phase = max(phase, d)
    integer = 0.0
    for lam in (2.0, 3.0, 4.0):
        for k in (0.5, 1.0, 2.0):
            integer = max(integer, abs(abs(continuous_scattering(lam, 1.0, k).T) - 1.0))
    ok = cons <= 1e-10 and phase <= 1e-4 and integer <= 1e-10
    details = {"conservation": cons, "phase_gap": per, "integer_limit_T_dev": integer}
    return CheckResult("continuous_lambda", "continuous coupling scattering data", phase, 1e-4, ok, details)


# 12 --------------------------------------------------------------------------------
def check_covariance(cfg: VerifyConfig) -> CheckResult:
    """Scaling (a = 2) and translation (h = 3) kernel identities, n = 1 (<= 1e-6)."""
    system = build_dyadic_system(cfg.variant)
    symbols = {"gaussian": lambda xi: np.exp(-(np.asarray(xi) - 2.0) ** 2),
               "band2": system.analysis_window(2)}
    worst, per = 0.0, {}
    for name, sym in symbols.items():
        res = covariance_check(Potential(level=1), sym, 2.0, 3.0)
        per[name] = {"scale": res.scale_deviation, "shift": res.shift_deviation}
        worst = max(worst, res.max_deviation)
    return CheckResult("covariance", "kernel scaling and translation identities", worst, 1e-6, worst <= 1e-6, per)


# 13 --------------------------------------------------------------------------------
def check_orthogonality(cfg: VerifyConfig) -> CheckResult:
    """|∫ sech(kz)(iη - k tanh kz) e^{iηz} dz| <= 1e-8."""
    per = {f"k={k},eta={eta}": abs(orthogonality_integral(k, eta, cfg.grid)) for k, eta in ((1.0, 1.0), (2.0, 0.7))}
    worst = max(per.values())
    return CheckResult("orthogonality_integral", "bound-state orthogonality integral", worst, 1e-8, worst <= 1e-8, per)


CHECKS: dict[str, Callable[[VerifyConfig], CheckResult]] = {
    "reflectionless": check_reflectionless,
    "closed_form_vs_ode": check_closed_form_vs_ode,
    "point_spectrum": check_point_spectrum,
    "completeness_round_trip": check_completeness,
    "kernel_decay": check_kernel_decay,
    "maximal_inequalities": check_maximal_inequalities,
    "norm_equivalence": check_norm_equivalence,
    "lp_identification": check_lp_identification,
    "besov_identification": check_besov_identification,
    "time_decay": check_time_decay,
    "continuous_lambda": check_continuous_lambda,
    "covariance": check_covariance,
    "orthogonality_integral": check_orthogonality,
}


def run_checks(cfg: VerifyConfig, names=None, on_result: Optional[Callable[[CheckResult], None]] = None) -> list[CheckResult]:
    out = []
    for name in names or CHECKS:
        res = CHECKS[name](cfg)
        out.append(res)
        if on_result:
            on_result(res)
    return out
