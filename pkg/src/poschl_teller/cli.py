"""Command-line driver.

Configuration is a flat ``key = value`` file (``#`` starts a comment). Every key is
also a ``--key`` flag; precedence is defaults < $PT_OUTPUT_DIR < file < flags.
Unknown keys are rejected.

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error,
3 resolution or precondition error.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import evolution as evo
from . import io
from .errors import ConfigError, DomainError, InvalidParameterError, PreconditionError
from .littlewood_paley import analysis, build_dyadic_system, max_band, synthesis, VARIANTS
from .numerics import Grid
from .scattering import (Potential, bound_states, continuous_point_spectrum, continuous_scattering,
                         eigen_residual, reflection, shooting_eigenvalues, transmission)
from .spaces import NormSpec, battery, equivalence_experiment, norm
from .spectral import build_band_kernel, decay_profile
from .verification import CHECKS, VerifyConfig, run_checks

ENV_OUTPUT = "PT_OUTPUT_DIR"
SUBCOMMANDS = ("scatter", "bound", "kernel", "bank", "norm", "evolve", "verify")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECONDITION = 0, 1, 2, 3


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _names(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def _opt_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


@dataclass(frozen=True)
class RunConfig:
    n: int = 1
    lam: Optional[float] = None
    scale: float = 1.0
    shift: float = 0.0
    x_min: float = -40.0
    x_max: float = 40.0
    n_points: int = 4001
    variant: str = "sqrt-partition"
    family: str = "F"
    alpha: float = 0.0
    p: float = 2.0
    q: float = 2.0
    homogeneous: bool = False
    J: int = 6
    s: float = 3.0
    norm_variant: str = "plain"
    battery: str = "core"
    output_dir: str = "pt_output"
    workers: int = 1
    k_values: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)
    bands: tuple = (0, 1, 2, 3, 4, 5, 6)
    n_power: tuple = (2, 3)
    with_derivative: bool = True
    stride: int = 20
    kernel_cache: bool = True
    times: tuple = tuple(float(t) for t in range(21))
    sigma_k: float = 0.25
    alpha_out: float = 0.5
    checks: tuple = tuple(CHECKS)
    tol_transmission: float = 1e-12
    tol_residual: float = 1e-6
    tol_roundtrip: float = 1e-4
    tol_decay_spread: float = 10.0
    tol_equivalence: float = 50.0
    tol_growth: float = 1.5

    def __post_init__(self):
        for f in fields(self):
            if f.name.startswith("tol_") and not getattr(self, f.name) > 0:
                raise ConfigError(f"{f.name} must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.battery not in ("core", "with_bound_states"):
            raise ConfigError("battery must be 'core' or 'with_bound_states'")
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)}")
        try:
            grid = self.grid
            self.potential
            self.norm_spec
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from None
        if self.J > max_band(grid):
            raise ConfigError(f"J = {self.J} exceeds the grid's Nyquist bound {max_band(grid)}")

    @property
    def grid(self) -> Grid:
        return Grid(self.x_min, self.x_max, self.n_points)

    @property
    def potential(self) -> Potential:
        if self.lam is not None:
            return Potential(lam=self.lam, scale=self.scale, shift=self.shift)
        return Potential(level=self.n, scale=self.scale, shift=self.shift)

    @property
    def norm_spec(self) -> NormSpec:
        return NormSpec(self.family, self.alpha, self.p, self.q, self.homogeneous, self.J, self.s, self.norm_variant)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)


_PARSERS = {
    "n": int, "lam": _opt_float, "scale": float, "shift": float, "x_min": float, "x_max": float,
    "n_points": int, "variant": str, "family": str, "alpha": float, "p": _float, "q": _float,
    "homogeneous": _bool, "J": int, "s": float, "norm_variant": str, "battery": str,
    "output_dir": str, "workers": int, "k_values": _floats, "bands": _ints, "n_power": _ints,
    "with_derivative": _bool, "stride": int, "kernel_cache": _bool, "times": _floats,
    "sigma_k": float, "alpha_out": float, "checks": _names,
    "tol_transmission": float, "tol_residual": float, "tol_roundtrip": float,
    "tol_decay_spread": float, "tol_equivalence": float, "tol_growth": float,
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines into raw strings (unknown keys rejected)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def build_config(raw: dict) -> RunConfig:
    values = {}
    for key, text in raw.items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    return RunConfig(**values)


def load_config(path: Optional[str], overrides: dict, env=None) -> RunConfig:
    env = os.environ if env is None else env
    raw = {}
    if env.get(ENV_OUTPUT):
        raw["output_dir"] = env[ENV_OUTPUT]
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        raw.update(parse_config_text(text, path))
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(raw)


# -- subcommands ---------------------------------------------------------------------


def _status(ok: bool) -> int:
    return EXIT_OK if ok else EXIT_FAIL


def cmd_scatter(cfg: RunConfig) -> int:
    pot = cfg.potential
    ks = cfg.k_values
    if pot.is_integer:
        rows, dev = [], 0.0
        for k in ks:
            t, r = transmission(pot.level, k / pot.scale), reflection(pot.level, k)
            dev = max(dev, abs(abs(t) - 1.0))
            rows.append((k, t.real, t.imag, abs(t), r.real, r.imag))
        io.write_csv(cfg.out / "scatter.csv", ("k", "T_re", "T_im", "abs_T", "R_re", "R_im"), rows)
        ok = dev <= cfg.tol_transmission
        rec = io.check_record("unit_transmission", "reflectionless transmission", dev, cfg.tol_transmission, ok)
    else:
        rows, dev = [], 0.0
        for k in ks:
            c = continuous_scattering(pot.lam, pot.scale, k)
            dev = max(dev, abs(abs(c.T) ** 2 + abs(c.R) ** 2 - 1.0))
            rows.append((k, c.phi_e, c.phi_o, c.T.real, c.T.imag, c.R.real, c.R.imag))
        io.write_csv(cfg.out / "scatter.csv", ("k", "phi_e", "phi_o", "T_re", "T_im", "R_re", "R_im"), rows)
        ok = dev <= 1e-10
        rec = io.check_record("flux_conservation", "continuous coupling scattering data", dev, 1e-10, ok,
                              {"point_spectrum": continuous_point_spectrum(pot.lam)})
    io.write_json(cfg.out / "scatter.json", [rec])
    print(f"scatter: {'PASS' if ok else 'FAIL'} max deviation {dev:.3g}")
    return _status(ok)


def cmd_bound(cfg: RunConfig) -> int:
    pot = cfg.potential
    grid = cfg.grid
    states = bound_states(pot, grid)
    shot = shooting_eigenvalues(pot)
    header = ["x"] + [f"e{s.index}" for s in states]
    rows = (tuple([x] + [s.samples.values[i].real for s in states]) for i, x in enumerate(grid.points))
    io.write_csv(cfg.out / "bound_states.csv", header, rows)
    pv = pot(grid.points)
    records, ok = [], True
    for s in states:
        res = eigen_residual(s.samples.values, grid, pv, s.eigenvalue)
        good = res <= cfg.tol_residual
        ok &= good
        records.append(io.check_record(f"residual_e{s.index}", "bound-state construction", res, cfg.tol_residual,
                                       good, {"eigenvalue": s.eigenvalue}))
    expected = sorted(s.eigenvalue for s in states)
    gap = max((abs(a - b) for a, b in zip(shot, expected)), default=0.0) if len(shot) == len(expected) else math.inf
    ok &= gap <= cfg.tol_residual
    records.append(io.check_record("shooting", "point spectrum", gap, cfg.tol_residual, gap <= cfg.tol_residual,
                                   {"shooting": shot}))
    io.write_json(cfg.out / "bound.json", records)
    print(f"bound: {'PASS' if ok else 'FAIL'} {len(states)} states, shooting gap {gap:.3g}")
    return _status(ok)


def kernel_cache_path(cfg: RunConfig, band: int) -> Path:
    pot = cfg.potential
    key = repr((pot.level, pot.scale, pot.shift, cfg.x_min, cfg.x_max, cfg.n_points, cfg.variant, band,
                cfg.with_derivative))
    return cfg.out / "cache" / f"kernel_{hashlib.sha1(key.encode()).hexdigest()[:16]}.bin"


def load_or_build_kernel(cfg: RunConfig, band: int, system=None):
    system = system or build_dyadic_system(cfg.variant)
    path = kernel_cache_path(cfg, band)
    if cfg.kernel_cache and path.exists():
        return io.read_kernel_binary(path), True
    K = build_band_kernel(system, band, cfg.potential, cfg.grid, cfg.with_derivative, cfg.workers)
    if cfg.kernel_cache:
        io.write_kernel_binary(K, path)
    return K, False


def cmd_kernel(cfg: RunConfig) -> int:
    system = build_dyadic_system(cfg.variant)
    records = []
    profile_rows = []
    consts = {npow: {} for npow in cfg.n_power}
    for j in cfg.bands:
        K, hit = load_or_build_kernel(cfg, j, system)
        io.write_kernel_csv(K, cfg.out / f"kernel_j{j}.csv", cfg.stride)
        herm = K.hermitian_defect()
        for npow in cfg.n_power:
            prof = decay_profile(K, npow)
            consts[npow][j] = (prof.C_measured, prof.D_measured)
            profile_rows.append((j, npow, prof.C_measured, prof.D_measured if prof.D_measured is not None else math.nan))
        records.append(io.check_record(f"hermitian_j{j}", "real-symbol kernel symmetry", herm, 1e-10, herm <= 1e-10,
                                       {"cache_hit": hit}))
        del K
    io.write_csv(cfg.out / "decay_profile.csv", ("band", "n_power", "C_measured", "D_measured"), profile_rows)
    for npow, by_j in consts.items():
        high = [v for j, v in by_j.items() if j >= 1]
        for idx, name in ((0, "C"), (1, "D")):
            vals = np.array([v[idx] for v in high if v[idx] is not None], dtype=float)
            if vals.size == 0:
                continue
            spread = float(vals.max() / vals.min())
            ok = bool(np.all(np.isfinite(vals))) and spread <= cfg.tol_decay_spread
            records.append(io.check_record(f"decay_{name}{npow}_spread", "dyadic kernel decay bound", spread,
                                           cfg.tol_decay_spread, ok, {f"{name}_measured": list(vals)}))
    io.write_json(cfg.out / "kernel.json", records)
    ok = all(r["pass"] for r in records)
    print(f"kernel: {'PASS' if ok else 'FAIL'} bands {list(cfg.bands)}")
    return _status(ok)


def _battery(cfg: RunConfig) -> dict:
    return battery(cfg.potential, cfg.grid, include_bound_states=cfg.battery == "with_bound_states")


def _map(cfg: RunConfig, fn, items):
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def cmd_bank(cfg: RunConfig) -> int:
    system = build_dyadic_system(cfg.variant)
    pot = cfg.potential
    bat = _battery(cfg)

    def one(item):
        fid, f = item
        bands = analysis(f, system, pot, cfg.J)
        back = synthesis(bands, system, pot)
        err = float(np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values))
        io.write_band_csv(bands, cfg.out / "bands" / f"{fid}.csv")
        return fid, err

    results = _map(cfg, one, list(bat.items()))
    records = [io.check_record(f"round_trip:{fid}", "synthesis inverts analysis", err, cfg.tol_roundtrip,
                               err <= cfg.tol_roundtrip) for fid, err in results]
    io.write_json(cfg.out / "bank.json", records)
    ok = all(r["pass"] for r in records)
    print(f"bank: {'PASS' if ok else 'FAIL'} worst round trip {max(e for _, e in results):.3g}")
    return _status(ok)


def cmd_norm(cfg: RunConfig) -> int:
    spec = cfg.norm_spec
    pot = cfg.potential
    system = build_dyadic_system(cfg.variant)
    other = build_dyadic_system(next(v for v in VARIANTS if v != cfg.variant))
    bat = _battery(cfg)
    norms = _map(cfg, lambda f: norm(f, spec, system, pot), list(bat.values()))
    stats = equivalence_experiment(system, other, spec, bat, pot, cfg.tol_equivalence)
    rows = [(fid, n, r) for fid, n, r in zip(bat, norms, stats.ratios)]
    io.write_csv(cfg.out / "norms.csv", ("function_id", "norm", "ratio_other_system"), rows)
    records = [{"spec": spec.to_dict(), "function_id": fid, "norm": n, "ratios": {"other_system": r}}
               for fid, n, r in rows]
    summary = io.check_record("system_equivalence", "independence of the dyadic system", stats.constant,
                              cfg.tol_equivalence, stats.passed, {"anomalies": stats.anomalies})
    io.write_json(cfg.out / "norms.json", {"records": records, "checks": [summary]})
    print(f"norm: {'PASS' if stats.passed else 'FAIL'} equivalence constant {stats.constant:.4g}")
    return _status(stats.passed)


def cmd_evolve(cfg: RunConfig) -> int:
    pot = cfg.potential
    system = build_dyadic_system(cfg.variant)
    beta = evo.dispersive_exponent(cfg.p)
    out_spec = NormSpec("B", cfg.alpha_out, cfg.p, cfg.q, J=cfg.J)
    in_spec = out_spec.with_(alpha=cfg.alpha_out + 2 * beta)
    f = evo.wave_packet(pot, cfg.grid, cfg.sigma_k)
    res = evo.decay_experiment(f, pot, out_spec, in_spec, cfg.times, system, workers=cfg.workers)
    io.write_csv(cfg.out / "decay_curve.csv", ("t", "norm_out", "bound", "ratio"), res.rows())
    growth = float(np.max(res.ratio) / res.early_max())
    unitarity = float(np.max(np.abs(res.evolution.norms["l2"] / res.evolution.norms["l2"][0] - 1.0)))
    records = [
        io.check_record("decay_growth", "Besov-scale dispersive bound", growth, cfg.tol_growth,
                        res.passes(5.0, cfg.tol_growth), {"beta": beta}),
        io.check_record("unitarity", "unitary propagation", unitarity, 1e-6, unitarity <= 1e-6),
    ]
    io.write_json(cfg.out / "evolve.json", records)
    ok = all(r["pass"] for r in records)
    print(f"evolve: {'PASS' if ok else 'FAIL'} growth {growth:.4g}, unitarity {unitarity:.2g}")
    return _status(ok)


def cmd_verify(cfg: RunConfig) -> int:
    vcfg = VerifyConfig(cfg.grid, cfg.variant, cfg.workers)
    results = run_checks(vcfg, cfg.checks, on_result=lambda r: print(r.line(), flush=True))
    ok = all(r.passed for r in results)
    io.write_json(cfg.out / "report.json", {"status": "PASS" if ok else "FAIL",
                                            "checks": [r.record() for r in results]})
    print(f"verify: {'PASS' if ok else 'FAIL'} ({sum(r.passed for r in results)}/{len(results)})")
    return _status(ok)


COMMANDS = {"scatter": cmd_scatter, "bound": cmd_bound, "kernel": cmd_kernel, "bank": cmd_bank,
            "norm": cmd_norm, "evolve": cmd_evolve, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poschl-teller", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="flat key = value configuration file")
    for key in _PARSERS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar="VALUE")
    return parser


def run(command: str, cfg: RunConfig) -> int:
    try:
        return COMMANDS[command](cfg)
    except (PreconditionError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ConfigError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: getattr(args, k) for k in _PARSERS}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
