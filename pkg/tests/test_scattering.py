import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poschl_teller.errors import DomainError, ExtractionError, InvalidParameterError, PreconditionError
from poschl_teller.numerics import Grid, integrate_schrodinger
from poschl_teller.scattering import (Potential, bound_states, continuous_point_spectrum, continuous_scattering,
                                      eigen_residual, eigenfunction, eigenfunction_derivative, eigenfunction_matrix,
                                      ode_phase_extraction, orthogonality_integral, phase_gap_formula,
                                      point_spectrum, reflection, scattering_polynomial, shooting_eigenvalues,
                                      transmission)


def test_low_degree_polynomials():
    p1 = scattering_polynomial(1)
    p2 = scattering_polynomial(2)
    for t in (-0.7, 0.0, 0.3):
        for kappa in (0.5, 2j, 1 - 1j):
            assert p1.evaluate(t, kappa) == pytest.approx(kappa - t)
            assert p2.evaluate(t, kappa) == pytest.approx(kappa ** 2 - 3 * kappa * t + 3 * t ** 2 - 1)
    assert scattering_polynomial(0).evaluate(0.4, 3.0) == 1


@pytest.mark.parametrize("n", range(0, 7))
def test_boundary_values_are_exact_products(n):
    p = scattering_polynomial(n)
    for kappa in (Fraction(1, 3), Fraction(-5, 2), 7):
        assert p.evaluate_exact(1, kappa) == math.prod(kappa - j for j in range(1, n + 1))
        assert p.evaluate_exact(-1, kappa) == math.prod(kappa + j for j in range(1, n + 1))


def test_table_matches_elementwise():
    p = scattering_polynomial(3)
    t = np.linspace(-1, 1, 7)
    kappa = 1j * np.linspace(-2, 2, 5)
    assert np.allclose(p.table(t, kappa), p.evaluate(t[:, None], kappa[None, :]), atol=1e-12)


def test_eigenfunction_value_at_origin_level_one():
    assert eigenfunction(Potential(level=1), 0.0, 1.0) == pytest.approx((1 + 1j) / 2, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [0.4, 1.3, -2.0])
def test_eigenfunction_asymptotics(n, k):
    pot = Potential(level=n)
    right = eigenfunction(pot, 30.0, k) * np.exp(-1j * k * 30.0)
    left = eigenfunction(pot, -30.0, k) * np.exp(1j * k * 30.0)
    if k > 0:
        assert right == pytest.approx(transmission(n, k), abs=1e-10)
        assert left == pytest.approx(1.0, abs=1e-10)
    else:
        assert right == pytest.approx(1.0, abs=1e-10)
        assert left == pytest.approx(transmission(n, -k), abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_eigenfunction_solves_equation(n):
    g = Grid(-10.0, 10.0, 4001)
    for pot in (Potential(level=n), Potential(level=n, scale=1.5, shift=0.7)):
        for k in (0.3, 1.7, -2.2):
            u = eigenfunction(pot, g.points, k)
            assert eigen_residual(u, g, pot(g.points), k * k) < 1e-8


def test_eigenfunction_matches_ode_integration():
    pot = Potential(level=2)
    g = Grid(-15.0, 15.0, 1501)
    k = 0.9
    u0 = eigenfunction(pot, g.x_min, k)
    du0 = eigenfunction_derivative(pot, g.x_min, k)[0]
    u, _ = integrate_schrodinger(pot, k * k, g.x_min, g.x_max, u0, du0, g, rtol=1e-12, atol=1e-14)
    ref = eigenfunction(pot, g.points, k)
    assert np.max(np.abs(u.values - ref)) <= 1e-8


def test_derivative_matches_finite_difference():
    pot = Potential(level=3, scale=0.8, shift=-1.0)
    x = np.linspace(-4, 4, 9)
    h = 1e-5
    for k in (0.6, -1.1):
        fd = (eigenfunction(pot, x + h, k) - eigenfunction(pot, x - h, k)) / (2 * h)
        assert np.allclose(eigenfunction_derivative(pot, x, k), fd, atol=1e-8)


def test_matrix_matches_broadcast():
    pot = Potential(level=2, scale=1.2, shift=0.5)
    x = np.linspace(-3, 3, 11)
    k = np.array([-1.5, -0.2, 0.7, 2.0])
    assert np.allclose(eigenfunction_matrix(pot, x, k), eigenfunction(pot, x[:, None], k[None, :]), atol=1e-13)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 8), st.floats(1e-3, 50.0), st.sampled_from(["+", "-"]))
def test_transmission_unimodular(n, k, side):
    assert abs(transmission(n, k, side)) == pytest.approx(1.0, abs=1e-13)
    assert reflection(n, k, side) == 0


def test_transmission_sides_conjugate():
    for n in range(4):
        assert transmission(n, 0.8, "-") == pytest.approx(np.conj(transmission(n, 0.8, "+")))


def test_k_zero_is_rejected():
    with pytest.raises(DomainError):
        transmission(2, 0.0)
    with pytest.raises(DomainError):
        reflection(2, 0.0)
    with pytest.raises(DomainError):
        eigenfunction(Potential(level=1), 0.0, np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        continuous_scattering(2.5, 1.0, 0.0)


def test_potential_validation():
    with pytest.raises(InvalidParameterError):
        Potential()
    with pytest.raises(InvalidParameterError):
        Potential(level=1, lam=2.0)
    with pytest.raises(InvalidParameterError):
        Potential(level=-1)
    with pytest.raises(InvalidParameterError):
        Potential(lam=1.0)
    with pytest.raises(InvalidParameterError):
        Potential(level=1, scale=0.0)
    with pytest.raises(DomainError):
        continuous_scattering(0.5, 1.0, 1.0)
    assert Potential(level=2).coupling == 6.0
    assert Potential(level=1, scale=2.0)(0.0) == pytest.approx(-8.0)


def test_point_spectrum_listing():
    assert point_spectrum(0) == []
    assert point_spectrum(3) == [-9.0, -4.0, -1.0]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_bound_states_orthonormal_eigenfunctions(n, grid):
    pot = Potential(level=n)
    states = bound_states(pot, grid)
    gram = np.array([[a.samples.inner(b.samples) for b in states] for a in states])
    assert np.allclose(gram, np.eye(n), atol=1e-10)
    v = pot(grid.points)
    for s in states:
        assert s.eigenvalue == -float(s.index ** 2)
        assert eigen_residual(s.samples.values, grid, v, s.eigenvalue) < 1e-6


def test_bound_states_scaled_and_shifted(grid):
    pot = Potential(level=2, scale=1.5, shift=2.0)
    states = bound_states(pot, grid)
    assert [s.eigenvalue for s in states] == pytest.approx([-2.25, -9.0])
    for s in states:
        assert s.samples.inner(s.samples).real == pytest.approx(1.0, abs=1e-10)


def test_bound_states_need_room():
    with pytest.raises(PreconditionError):
        bound_states(Potential(level=1), Grid(-5.0, 5.0, 101))
    with pytest.raises(PreconditionError):
        bound_states(Potential(level=0), Grid())


@pytest.mark.parametrize("n,scale,shift", [(1, 1.0, 0.0), (3, 1.0, 0.0), (2, 1.5, 2.0)])
def test_shooting_recovers_point_spectrum(n, scale, shift):
    pot = Potential(level=n, scale=scale, shift=shift)
    expected = [scale ** 2 * e for e in point_spectrum(n)]
    assert shooting_eigenvalues(pot) == pytest.approx(expected, abs=1e-8)


def test_continuous_point_spectrum():
    assert continuous_point_spectrum(2.5) == pytest.approx([-2.25, -0.25])
    assert continuous_point_spectrum(1.2) == pytest.approx([-0.04])
    assert shooting_eigenvalues(Potential(lam=2.5)) == pytest.approx([-2.25, -0.25], abs=1e-8)


@pytest.mark.parametrize("lam", [1.5, 2.5, 3.3])
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_continuous_conservation_and_phase_gap(lam, k):
    s = continuous_scattering(lam, 1.0, k)
    assert abs(s.T) ** 2 + abs(s.R) ** 2 == pytest.approx(1.0, abs=1e-12)
    gap = math.remainder(s.phi_e - s.phi_o - phase_gap_formula(lam, k), math.pi)
    assert abs(gap) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_continuous_reduces_to_integer_level(n):
    for k in (0.3, 1.4):
        s = continuous_scattering(n + 1.0, 2.0, 2.0 * k)
        assert s.T == pytest.approx(transmission(n, k), abs=1e-10)
        assert abs(s.R) < 1e-10


def test_ode_phases_match_gamma_phases():
    g = Grid(-30.0, 30.0, 6001)
    for lam, k in ((1.5, 0.5), (2.5, 1.0)):
        a = continuous_scattering(lam, 1.0, k)
        b = ode_phase_extraction(lam, 1.0, k, g)
        assert abs(math.remainder(a.phi_e - b.phi_e, 2 * math.pi)) < 1e-6
        assert abs(math.remainder(a.phi_o - b.phi_o, 2 * math.pi)) < 1e-6


def test_ode_phase_extraction_free_case():
    s = ode_phase_extraction(2.0, 1.0, 1.3, Grid(0.0, 30.0, 3001), pot_eval=lambda x: 0.0)
    assert s.phi_e == pytest.approx(0.0, abs=1e-9)
    assert s.phi_o == pytest.approx(-math.pi / 2, abs=1e-9)
    assert s.T == pytest.approx(1.0, abs=1e-9)


def test_ode_phase_extraction_preconditions():
    with pytest.raises(PreconditionError):
        ode_phase_extraction(2.5, 1.0, 1.0, Grid(-5.0, 5.0, 501))
    with pytest.raises(ExtractionError):
        ode_phase_extraction(2.5, 1.0, 1.0, Grid(-30.0, 30.0, 6001), pot_eval=lambda x: 0.0 if x < 25 else 1e-30,
                             max_residual=0.0)


@pytest.mark.parametrize("k,eta", [(1.0, 1.0), (2.0, 0.7), (0.5, 3.0)])
def test_orthogonality_integral_vanishes(k, eta):
    assert abs(orthogonality_integral(k, eta, Grid(-80.0, 80.0, 16001))) < 1e-8
