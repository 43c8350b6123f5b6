import math

import numpy as np
import pytest

from poschl_teller.errors import InvalidParameterError, ResolutionError
from poschl_teller.littlewood_paley import build_dyadic_system
from poschl_teller.numerics import FunctionSample, Grid, lp_norm, symmetric_quadrature
from poschl_teller.scattering import Potential, bound_states
from poschl_teller.spectral import (TransformCoefficients, apply_multiplier, band_k_range, build_band_kernel,
                                    covariance_check, decay_profile, default_quadrature, forward_transform,
                                    inverse_transform, kernel_from_symbol, parseval_sides, spectral_basis)


def rel_l2(a, b):
    return lp_norm(a - b, 2) / lp_norm(b, 2)


def test_free_transform_of_gaussian(grid, gaussian):
    kq = default_quadrature(grid)
    c = forward_transform(gaussian(grid), Potential(level=0), kq)
    k = kq.nodes
    assert np.max(np.abs(c.ac_values - math.sqrt(2 * math.pi) * np.exp(-k ** 2 / 2))) < 1e-8
    assert c.pp_values.shape == (0,)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bound_state_has_no_continuum_part(n, grid):
    pot = Potential(level=n)
    kq = default_quadrature(grid)
    for s in bound_states(pot, grid):
        c = forward_transform(s.samples, pot, kq)
        assert np.max(np.abs(c.ac_values)) < 1e-8
        expected = np.zeros(n)
        expected[s.index - 1] = 1.0
        assert np.allclose(c.pp_values, expected, atol=1e-10)


def test_zero_maps_to_zero(grid):
    pot = Potential(level=2)
    kq = default_quadrature(grid)
    c = forward_transform(FunctionSample.zeros(grid), pot, kq)
    assert not np.any(c.ac_values) and not np.any(c.pp_values)
    assert not np.any(inverse_transform(c, pot, grid).values)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("width,center", [(1.0, 0.0), (1.5, 3.0), (2.5, -2.0)])
def test_round_trip(n, width, center, grid, gaussian):
    pot = Potential(level=n)
    f = gaussian(grid, width, center)
    kq = default_quadrature(grid)
    back = inverse_transform(forward_transform(f, pot, kq), pot, grid)
    assert rel_l2(back, f) < 1e-4


def test_inverse_checks_bound_state_count(grid):
    kq = default_quadrature(grid)
    c = TransformCoefficients(kq, np.zeros(kq.nodes.size, complex), np.zeros(1, complex))
    with pytest.raises(InvalidParameterError):
        inverse_transform(c, Potential(level=2), grid)


@pytest.mark.parametrize("n", [1, 2])
def test_negative_projector_is_idempotent_onto_bound_states(n, grid, gaussian):
    pot = Potential(level=n)
    kq = default_quadrature(grid)
    neg = lambda xi: (np.asarray(xi) < 0).astype(float)
    f = gaussian(grid, 1.2, 0.5)
    once = apply_multiplier(neg, f, pot, kq)
    twice = apply_multiplier(neg, once, pot, kq)
    assert rel_l2(twice, once) < 1e-8
    states = bound_states(pot, grid)
    direct = sum((s.samples.scaled(s.samples.inner(f)) for s in states[1:]), states[0].samples.scaled(states[0].samples.inner(f)))
    assert rel_l2(once, direct) < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_multiplier_acts_on_eigenvalues(n, grid):
    pot = Potential(level=n)
    kq = default_quadrature(grid)
    symbol = lambda xi: np.exp(np.asarray(xi) / 5.0)
    for s in bound_states(pot, grid):
        out = apply_multiplier(symbol, s.samples, pot, kq)
        assert lp_norm(out - s.samples.scaled(symbol(s.eigenvalue)), 2) < 1e-8


def test_multiplier_of_energy_is_the_operator(grid):
    pot = Potential(level=2)
    kq = default_quadrature(grid)
    x = grid.points
    f = FunctionSample(grid, np.exp(-x ** 2 / 2))
    hf = FunctionSample(grid, (1 - x ** 2) * np.exp(-x ** 2 / 2) + pot(x) * f.values)
    assert rel_l2(apply_multiplier(lambda xi: np.asarray(xi, dtype=float), f, pot, kq), hf) < 1e-4


@pytest.mark.parametrize("n", [0, 1, 2])
def test_parseval(n, grid, gaussian):
    pot = Potential(level=n)
    lhs, rhs = parseval_sides(gaussian(grid, 1.3, 1.0), pot, default_quadrature(grid))
    assert abs(lhs - rhs) <= 1e-3 * lhs


def test_basis_is_cached(grid):
    kq = default_quadrature(grid)
    assert spectral_basis(Potential(level=1), grid, kq) is spectral_basis(Potential(level=1), grid, kq)


def test_default_quadrature_rejects_unresolvable_band():
    with pytest.raises(ResolutionError):
        default_quadrature(Grid(-40.0, 40.0, 101), 8.0)


def test_band_ranges():
    assert band_k_range(0) == (0.0, 1.0)
    assert band_k_range(2) == (1.0, 2.0)
    lo, hi = band_k_range(5)
    assert lo ** 2 == pytest.approx(2.0 ** 3) and hi ** 2 == pytest.approx(2.0 ** 5)


@pytest.fixture(scope="module")
def band_kernel(small_grid):
    return build_band_kernel(build_dyadic_system(), 2, Potential(level=2), small_grid, with_derivative=True)


def test_kernel_is_hermitian(band_kernel):
    assert band_kernel.hermitian_defect() < 1e-10


def test_kernel_agrees_with_transform(small_grid, gaussian):
    pot = Potential(level=2)
    system = build_dyadic_system()
    kq = default_quadrature(small_grid, 4.0)
    window = system.analysis_window(3)
    K = kernel_from_symbol(window, pot, small_grid, kq)
    f = gaussian(small_grid, 1.0, 0.5)
    a = K.apply(f)
    b = apply_multiplier(window, f, pot, kq)
    assert lp_norm(a - b, 2) <= 1e-6 * lp_norm(b, 2)


def test_kernel_derivative_matches_finite_difference(band_kernel, small_grid):
    h = small_grid.spacing
    fd = (band_kernel.matrix[2:, 625] - band_kernel.matrix[:-2, 625]) / (2 * h)
    scale = np.max(np.abs(band_kernel.dmatrix[:, 625]))
    assert np.max(np.abs(fd - band_kernel.dmatrix[1:-1, 625])) < 1e-2 * scale


def test_free_kernel_is_translation_invariant(small_grid):
    K = build_band_kernel(build_dyadic_system(), 3, Potential(level=0), small_grid).matrix
    shift = 37
    assert np.max(np.abs(K[shift:, shift:] - K[:-shift, :-shift])) < 1e-10
    assert np.max(np.abs(K - K.T)) < 1e-10


def test_band_kernel_rejects_unresolvable_band():
    with pytest.raises(ResolutionError):
        build_band_kernel(build_dyadic_system(), 4, Potential(level=1), Grid(-40.0, 40.0, 101))
    with pytest.raises(InvalidParameterError):
        build_band_kernel(build_dyadic_system(), -1, Potential(level=1), Grid())


def test_decay_profile(band_kernel):
    prof = decay_profile(band_kernel, 2)
    assert prof.band == 2 and prof.n_power == 2
    assert 0 < prof.C_measured < 50
    assert 0 < prof.D_measured < 50
    assert decay_profile(band_kernel, 3).C_measured >= prof.C_measured
    with pytest.raises(InvalidParameterError):
        decay_profile(band_kernel, 0)


def test_covariance_trivial_transformation_is_exact():
    res = covariance_check(Potential(level=1), lambda xi: np.exp(-np.asarray(xi) ** 2), 1.0, 0.0)
    assert res.max_deviation < 1e-14


@pytest.mark.parametrize("n", [1, 2])
def test_covariance_scaling_and_translation(n):
    res = covariance_check(Potential(level=n), lambda xi: np.exp(-(np.asarray(xi) - 2.0) ** 2), 2.0, 3.0)
    assert res.scale_deviation < 1e-6
    assert res.shift_deviation < 1e-6


def test_symmetric_rule_kernel_symmetry():
    kq = symmetric_quadrature(4.0, 0.01)
    g = Grid(-25.0, 25.0, 501)
    K = kernel_from_symbol(lambda xi: np.exp(-np.asarray(xi)), Potential(level=1), g, kq)
    assert K.hermitian_defect() < 1e-12
