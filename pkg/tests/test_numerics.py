import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poschl_teller.errors import DomainError, IntegrationError, InvalidParameterError, PreconditionError
from poschl_teller.numerics import (FunctionSample, Grid, KQuadrature, annulus_quadrature, full_quadrature,
                                    integrate_schrodinger, log_gamma_complex, lp_norm, symmetric_quadrature,
                                    weighted_lp)


def test_grid_defaults_and_weights():
    g = Grid()
    assert g.n_points == 4001 and g.spacing == pytest.approx(0.02)
    assert g.weights.sum() == pytest.approx(80.0)
    assert not g.points.flags.writeable
    assert g.max_k_spacing == pytest.approx(math.pi / 160)


@pytest.mark.parametrize("args", [(0, 0, 10), (1, 0, 10), (0, 1, 1), (0, 1, 2.5)])
def test_grid_rejects_bad_parameters(args):
    with pytest.raises(InvalidParameterError):
        Grid(*args)


def test_trapezoid_integrates_gaussian():
    f = FunctionSample.from_callable(Grid(), lambda x: np.exp(-x ** 2))
    assert lp_norm(f, 1) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert lp_norm(f, 2) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-13)
    assert lp_norm(f, math.inf) == 1.0


def test_lp_norm_rejects_nonpositive_p():
    f = FunctionSample.zeros(Grid(-1, 1, 11))
    with pytest.raises(InvalidParameterError):
        lp_norm(f, 0)
    with pytest.raises(InvalidParameterError):
        weighted_lp(np.ones(3), np.ones(3), -1)


def test_sample_shape_checked_and_arithmetic():
    g = Grid(-1, 1, 5)
    with pytest.raises(InvalidParameterError):
        FunctionSample(g, np.zeros(4))
    a = FunctionSample(g, np.arange(5.0))
    assert np.allclose((a - a).values, 0)
    assert a.inner(a) == pytest.approx(np.sum(g.weights * np.arange(5.0) ** 2))
    with pytest.raises(InvalidParameterError):
        a + FunctionSample(Grid(-1, 1, 5 + 1), np.zeros(6))


def test_symmetric_quadrature_avoids_zero():
    q = symmetric_quadrature(8.0, math.pi / 160)
    assert q.nodes.size == 816 and q.nodes.size % 2 == 0
    assert np.min(np.abs(q.nodes)) > 0
    assert q.max_spacing <= math.pi / 160
    assert np.allclose(q.nodes, -q.nodes[::-1])


def test_full_quadrature_resolves_grid():
    g = Grid()
    q = full_quadrature(g, 4.0)
    assert q.resolves(g)
    assert not symmetric_quadrature(4.0, 0.1).resolves(g)


def test_annulus_quadrature_support():
    q = annulus_quadrature(Grid(), 1.0, 2.0, band=2)
    assert np.all((np.abs(q.nodes) > 1) & (np.abs(q.nodes) < 2))
    assert q.band == 2
    assert q.weights.sum() == pytest.approx(2.0)


def test_kquadrature_validation():
    with pytest.raises(InvalidParameterError):
        KQuadrature(np.array([1.0, 0.5]), np.array([1.0, 1.0]))
    with pytest.raises(InvalidParameterError):
        KQuadrature(np.array([0.5, 1.0]), np.array([1.0, 0.0]))
    a = symmetric_quadrature(2.0, 0.1)
    assert a.fingerprint == symmetric_quadrature(2.0, 0.1).fingerprint
    assert a.fingerprint != symmetric_quadrature(2.0, 0.05).fingerprint


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30))
def test_log_gamma_matches_mpmath(re, im):
    if abs(im) < 1e-6 and re <= 0 and abs(re - round(re)) < 1e-6:
        return
    z = complex(re, im)
    ref = complex(mpmath.loggamma(mpmath.mpc(re, im)))
    assert abs(log_gamma_complex(z) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_log_gamma_poles_raise():
    for z in (0, -1, -7):
        with pytest.raises(DomainError):
            log_gamma_complex(z)


def test_log_gamma_array():
    z = np.array([0.5 + 1j, 2.0 + 0j])
    out = log_gamma_complex(z)
    assert out.shape == (2,)
    assert out[1] == pytest.approx(0.0, abs=1e-15)


def test_integrator_free_oscillator():
    g = Grid(0.0, 10.0, 201)
    k = 1.7
    u, du = integrate_schrodinger(lambda x: 0.0, k * k, 0.0, 10.0, 1.0, 0.0, g)
    assert np.max(np.abs(u.values - np.cos(k * g.points))) < 1e-9
    assert np.max(np.abs(du.values + k * np.sin(k * g.points))) < 1e-8


def test_integrator_backwards_and_complex():
    g = Grid(-5.0, 0.0, 101)
    k = 0.8
    u, _ = integrate_schrodinger(lambda x: 0.0, k * k, 0.0, -5.0, 1.0, 1j * k, g)
    assert np.max(np.abs(u.values - np.exp(1j * k * g.points))) < 1e-9


def test_integrator_requires_grid_inside_interval():
    with pytest.raises(PreconditionError):
        integrate_schrodinger(lambda x: 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, Grid(0.0, 2.0, 11))


def test_integrator_reports_failure_location():
    with pytest.raises(IntegrationError) as info:
        integrate_schrodinger(lambda x: math.nan if x > 2 else 0.0, 1.0, 0.0, 5.0, 1.0, 0.0, Grid(0.0, 5.0, 11))
    assert 1.0 <= info.value.location <= 2.5
