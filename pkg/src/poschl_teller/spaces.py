"""Besov and Triebel–Lizorkin quasi-norms adapted to H, and the norm experiments.

The smoothness index ``alpha`` counts dyadic steps in the spectral variable ξ = k²,
so band j carries |k| ≈ 2^{j/2}. An H-smoothness α therefore corresponds to
classical smoothness 2α; classical norms are the level-0 (free) instance of the
same code, which keeps comparisons like-for-like.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Optional

import numpy as np

from .errors import InvalidParameterError
from .littlewood_paley import BandDecomposition, DyadicSystem, analysis, peetre_sup
from .numerics import FunctionSample, Grid, lp_norm, weighted_lp
from .scattering import Potential, bound_states
from .spectral import TransformCoefficients, default_quadrature, inverse_transform

FAMILIES = ("F", "B")
NORM_VARIANTS = ("plain", "peetre")


@dataclass(frozen=True)
class NormSpec:
    """Parameters of an F_p^{α,q}(H) or B_p^{α,q}(H) quasi-norm."""

    family: str = "F"
    alpha: float = 0.0
    p: float = 2.0
    q: float = 2.0
    homogeneous: bool = False
    J: int = 6
    s: float = 3.0
    variant: str = "plain"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.variant not in NORM_VARIANTS:
            raise InvalidParameterError(f"variant must be one of {NORM_VARIANTS}, got {self.variant!r}")
        if not (self.p > 0 and self.q > 0):
            raise InvalidParameterError("p and q must lie in (0, inf]")
        if int(self.J) != self.J or self.J < 0:
            raise InvalidParameterError("J must be a nonnegative integer")
        if self.variant == "peetre" and not self.s > 1.0 / min(self.p, self.q):
            raise InvalidParameterError(f"peetre variant needs s > 1/min(p, q) = {1.0 / min(self.p, self.q):g}")

    def with_(self, **changes) -> "NormSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("p", "q"):
            if math.isinf(d[key]):
                d[key] = "inf"
        return d


def band_decomposition(f: FunctionSample, spec: NormSpec, system: DyadicSystem, pot: Potential) -> BandDecomposition:
    return analysis(f, system, pot, spec.J, homogeneous=spec.homogeneous)


def _band_magnitudes(bands: BandDecomposition, spec: NormSpec) -> np.ndarray:
    mags = np.abs(bands.values)
    if spec.variant == "peetre":
        mags = np.array([peetre_sup(m, bands.grid, j, spec.s) for j, m in zip(bands.indices, mags)])
    return mags


def _lq(values: np.ndarray, q: float, axis: int = 0) -> np.ndarray:
    if math.isinf(q):
        return np.max(values, axis=axis)
    return np.sum(values ** q, axis=axis) ** (1.0 / q)


def norm_from_bands(bands: BandDecomposition, spec: NormSpec) -> float:
    """Evaluate the quasi-norm of ``spec`` from precomputed bands."""
    mags = _band_magnitudes(bands, spec)
    js = np.array(list(bands.indices), dtype=float)
    weights = 2.0 ** (js * spec.alpha)
    w = bands.grid.weights
    if spec.family == "F":
        return weighted_lp(_lq(weights[:, None] * mags, spec.q), w, spec.p)
    per_band = np.array([weighted_lp(m, w, spec.p) for m in mags]) * weights
    if spec.homogeneous:
        return float(_lq(per_band, spec.q))
    # inhomogeneous: the Φ block is added outside the ℓ^q sum
    tail = float(_lq(per_band[1:], spec.q)) if per_band.size > 1 else 0.0
    return float(per_band[0] + tail)


def tl_norm(f: FunctionSample, spec: NormSpec, system: DyadicSystem, pot: Potential) -> float:
    """‖(Σ_j 2^{jαq}|φ_j(H)f|^q)^{1/q}‖_p (Peetre bands when ``spec.variant == 'peetre'``)."""
    if spec.family != "F":
        raise InvalidParameterError("tl_norm needs family 'F'")
    return norm_from_bands(band_decomposition(f, spec, system, pot), spec)


def besov_norm(f: FunctionSample, spec: NormSpec, system: DyadicSystem, pot: Potential) -> float:
    """‖Φ(H)f‖_p + (Σ_{j>=1} 2^{jαq}‖φ_j(H)f‖_p^q)^{1/q} (all j in the homogeneous case)."""
    if spec.family != "B":
        raise InvalidParameterError("besov_norm needs family 'B'")
    return norm_from_bands(band_decomposition(f, spec, system, pot), spec)


def norm(f: FunctionSample, spec: NormSpec, system: DyadicSystem, pot: Potential) -> float:
    return norm_from_bands(band_decomposition(f, spec, system, pot), spec)


def maximal_norm(f: FunctionSample, spec: NormSpec, system: DyadicSystem, pot: Potential) -> float:
    """The Peetre-maximal counterpart of ``spec``'s norm."""
    return norm(f, spec.with_(variant="peetre"), system, pot)


def classical_norm(f: FunctionSample, spec: NormSpec, system: DyadicSystem) -> float:
    """Classical norm of smoothness 2·spec.alpha, realized with the free operator."""
    return norm(f, spec, system, Potential(level=0))


# -- experiments ---------------------------------------------------------------------


@dataclass
class RatioStats:
    """Per-function ratios of two norms and their spread."""

    label: str
    function_ids: list
    ratios: list
    bound: Optional[float] = None
    anomalies: list = field(default_factory=list)

    @property
    def minimum(self) -> float:
        good = [r for r in self.ratios if np.isfinite(r) and r > 0]
        return min(good) if good else float("nan")

    @property
    def maximum(self) -> float:
        good = [r for r in self.ratios if np.isfinite(r) and r > 0]
        return max(good) if good else float("nan")

    @property
    def constant(self) -> float:
        """Smallest C with every ratio in [1/C, C]."""
        if not self.ratios:
            return float("nan")
        return max(self.maximum, 1.0 / self.minimum)

    @property
    def passed(self) -> bool:
        if self.anomalies or not self.ratios:
            return False
        if not all(np.isfinite(r) and r > 0 for r in self.ratios):
            return False
        return self.bound is None or self.constant <= self.bound

    def records(self, spec: Optional[NormSpec] = None) -> list[dict]:
        return [
            {"spec": spec.to_dict() if spec else None, "function_id": fid, "ratio": float(r), "label": self.label}
            for fid, r in zip(self.function_ids, self.ratios)
        ]


def _ratio(a: float, b: float, fid: str, anomalies: list) -> float:
    if b == 0.0 or a == 0.0:
        anomalies.append(f"{fid}: zero norm ({a:g} / {b:g})")
        return float("nan")
    return a / b


def equivalence_experiment(system_a: DyadicSystem, system_b: DyadicSystem, spec: NormSpec,
                           battery: Mapping[str, FunctionSample], pot: Potential,
                           bound: float = 50.0) -> RatioStats:
    """Ratios ‖f‖_A / ‖f‖_B of the same quasi-norm built from two dyadic systems."""
    ids, ratios, anomalies = [], [], []
    for fid, f in battery.items():
        na = norm(f, spec, system_a, pot)
        nb = norm(f, spec, system_b, pot) if system_b is not system_a else na
        ids.append(fid)
        ratios.append(_ratio(na, nb, fid, anomalies))
    return RatioStats(f"{system_a.variant}/{system_b.variant}", ids, ratios, bound, anomalies)


def identification_experiment(spec: NormSpec, battery: Mapping[str, FunctionSample], pot: Potential,
                              system: DyadicSystem, target: str = "lp",
                              bound: Optional[float] = None) -> RatioStats:
    """Compare H-adapted norms with classical ones over a battery.

    ``target='lp'``: ‖f‖_{spec}(H) / ‖f‖_p (use family F, alpha 0, q 2).
    ``target='classical'``: ‖f‖_{spec}(H) / ‖f‖_{spec}(H₀), where the free-operator
    norm at H-smoothness α is the classical norm of smoothness 2α.
    """
    if target not in ("lp", "classical"):
        raise InvalidParameterError("target must be 'lp' or 'classical'")
    free = Potential(level=0)
    ids, ratios, anomalies = [], [], []
    for fid, f in battery.items():
        num = norm(f, spec, system, pot)
        den = lp_norm(f, spec.p) if target == "lp" else norm(f, spec, system, free)
        ids.append(fid)
        ratios.append(_ratio(num, den, fid, anomalies))
    return RatioStats(f"{target}:{spec.family}", ids, ratios, bound, anomalies)


def quasi_triangle_constant(f: FunctionSample, g: FunctionSample, spec: NormSpec,
                            system: DyadicSystem, pot: Potential) -> float:
    """Measured K in ‖f + g‖ <= K (‖f‖ + ‖g‖)."""
    return norm(f + g, spec, system, pot) / (norm(f, spec, system, pot) + norm(g, spec, system, pot))


# -- battery ------------------------------------------------------------------------

BATTERY_VERSION = 1


def _band_localized(pot: Potential, grid: Grid, j: int) -> FunctionSample:
    kq = default_quadrature(grid)
    center = 2.0 ** ((j - 1) / 2)
    width = 0.15 * center
    k = kq.nodes
    ac = np.exp(-((np.abs(k) - center) ** 2) / (2 * width ** 2)).astype(complex)
    n_bound = pot.level if pot.level else 0
    f = inverse_transform(TransformCoefficients(kq, ac, np.zeros(n_bound, dtype=complex)), pot, grid)
    return f.scaled(1.0 / lp_norm(f, 2))


def battery(pot: Potential, grid: Grid, include_bound_states: bool = False) -> dict[str, FunctionSample]:
    """The fixed test battery (version ``BATTERY_VERSION``), keyed by function id."""
    x = grid.points
    out = {
        "gauss_w1_c0": np.exp(-x ** 2 / 2),
        "gauss_w1.5_c0": np.exp(-x ** 2 / (2 * 1.5 ** 2)),
        "gauss_w2.5_c0": np.exp(-x ** 2 / (2 * 2.5 ** 2)),
        "gauss_w1.5_c3": np.exp(-(x - 3) ** 2 / (2 * 1.5 ** 2)),
        "sech_half": 1 / np.cosh(x / 2),
        "sech2_third": 1 / np.cosh(x / 3) ** 2,
        "chirp": np.exp(-x ** 2 / 8) * np.exp(1j * x ** 2 / 8),
    }
    samples = {fid: FunctionSample(grid, v) for fid, v in out.items()}
    for j in (1, 2, 3):
        samples[f"band{j}"] = _band_localized(pot, grid, j)
    if include_bound_states and pot.level:
        for state in bound_states(pot, grid):
            samples[f"bound{state.index}"] = state.samples
    return samples
