import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebkit._rk import dopri
from reebkit.charts import (BumpSpec, ConformalChart, EllipsoidChart, PolynomialFactor, SeifertTorusChart,
                            StandardDiskChart, bump_chart, constant_factor, perturb_conformal)
from reebkit.errors import FactorNotPositive, LeftChartDomain, NoConvergence, StepSizeUnderflow
from reebkit.reeb import contact_volume, find_periodic_orbit, integrate, reeb_field

from oracles import ellipsoid_flow, ellipsoid_reeb

angles = st.tuples(st.floats(0.05, np.pi / 2 - 0.05), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))


# -- integrator ------------------------------------------------------------------------

def test_dopri_exponential_and_backward():
    res = dopri(lambda t, y: -y, 0.0, 2.0, np.array([1.0, 2.0]), tol=1e-12)
    assert np.allclose(res.y[-1], np.exp(-2.0) * np.array([1.0, 2.0]), atol=1e-11)
    back = dopri(lambda t, y: -y, 2.0, 0.0, res.y[-1], tol=1e-12)
    assert np.allclose(back.y[-1], [1.0, 2.0], atol=1e-10)
    same = dopri(lambda t, y: -y, 1.0, 1.0, np.array([3.0]))
    assert same.y.shape == (1, 1) and same.y[0, 0] == 3.0


def test_dopri_domain_and_underflow():
    with pytest.raises(LeftChartDomain):
        dopri(lambda t, y: np.ones_like(y), 0, 2, np.zeros(1), in_domain=lambda y: y[:, 0] < 1)
    with pytest.raises(StepSizeUnderflow):
        dopri(lambda t, y: y ** 2, 0, 2, np.ones(1), tol=1e-10)


# -- Reeb fields ---------------------------------------------------------------------------

@settings(max_examples=50)
@given(angles, st.sampled_from([(1, 1), (1, 2), (2, 3), (3, 5)]))
def test_ellipsoid_reeb_field_closed_form(ang, pq):
    ell = EllipsoidChart(*pq)
    X = ell.point(*ang)
    assert np.allclose(reeb_field(ell, X)[0], ellipsoid_reeb(*pq, X), atol=1e-12)


def test_seifert_torus_reeb_field():
    chart = SeifertTorusChart(2, 1, rho=1.0)
    X = np.array([[0.3, -0.4, 0.2], [0.0, 0.0, 0.7]])
    R = reeb_field(chart, X)
    # -2 pi d/dtheta + 2 d/ds
    expected = np.column_stack([2 * np.pi * X[:, 1], -2 * np.pi * X[:, 0], [2.0, 2.0]])
    assert np.allclose(R, expected, atol=1e-13)


def test_conformal_with_zero_eps_is_base():
    ell = EllipsoidChart(2, 3)
    f = PolynomialFactor.random(np.random.default_rng(1), dim=4, degree=2)
    assert perturb_conformal(ell, 0.0, f) is ell
    X = ell.point(0.7, 0.1, 0.2)
    assert np.array_equal(reeb_field(ConformalChart(ell, 0.0, f), X), reeb_field(ell, X))


def test_perturb_conformal_rejects_nonpositive_factor():
    disk = StandardDiskChart(1.0)
    with pytest.raises(FactorNotPositive):
        perturb_conformal(disk, 2.0, constant_factor(-1.0, 3), check_points=np.zeros((1, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), angles, st.floats(1e-3, 0.05))
def test_perturbed_reeb_field_is_reeb(seed, ang, eps):
    ell = EllipsoidChart(1, 2)
    f = PolynomialFactor.random(np.random.default_rng(seed), dim=4, degree=2)
    chart = ConformalChart(ell, eps, f)
    X = ell.point(*ang)[None]
    R = reeb_field(chart, X)[0]
    a = chart.coeffs(X)[0]
    D = chart.jac(X)[0]
    D = D.T - D
    assert abs(a @ R - 1) < 1e-12
    # R _| dlambda vanishes on vectors tangent to the ellipsoid
    n = ell.constraint_grad(X)[0]
    basis = np.linalg.svd(n[None])[2][1:]
    assert np.max(np.abs(R @ D @ basis.T)) < 1e-10
    assert abs(n @ R) < 1e-10


def test_bump_reeb_field_transverse_and_normalised():
    spec = BumpSpec(0.05, 0.1, 0.35, 0.5 - np.pi * 0.35 ** 2)
    chart = bump_chart(spec)
    rng = np.random.default_rng(0)
    r = 0.35 * np.sqrt(rng.uniform(0, 1, 200))
    th = rng.uniform(0, 2 * np.pi, 200)
    X = np.column_stack([r * np.cos(th), r * np.sin(th), rng.uniform(0, 1, 200)])
    R = reeb_field(chart, X)
    assert np.all(R[:, 2] > 0)
    assert np.allclose(np.einsum("ij,ij->i", chart.coeffs(X), R), 1, atol=1e-12)


# -- trajectories ------------------------------------------------------------------------------

@pytest.mark.parametrize("pq", [(1, 1), (2, 3)])
def test_ellipsoid_trajectory_matches_closed_form(pq):
    ell = EllipsoidChart(*pq)
    X0 = ell.point(0.6, 0.3, 1.1)
    traj = integrate(ell, X0, pq[0] * pq[1], tol=1e-12)
    exact = ellipsoid_flow(*pq, X0, traj.t)
    assert np.max(np.abs(traj.states - exact)) < 1e-8
    assert np.max(np.abs(ell.constraint(traj.states))) < 1e-10


def test_integrate_examples():
    ell = EllipsoidChart(2, 3)
    x0 = ell.point(np.pi / 2, 0.4, 0.0)
    assert np.linalg.norm(integrate(ell, x0, 2.0).states[-1] - x0) < 1e-8
    hopf = EllipsoidChart(1, 1)
    y0 = hopf.point(0.9, 0.2, 2.0)
    assert np.linalg.norm(integrate(hopf, y0, 1.0).states[-1] - y0) < 1e-8
    t0 = integrate(ell, x0, 0.0)
    assert t0.states.shape == (1, 4) and np.allclose(t0.states[0], x0)


@settings(max_examples=15, deadline=None)
@given(angles, st.floats(0.1, 3.0))
def test_integrate_reversible(ang, t):
    tol = 1e-11
    ell = EllipsoidChart(2, 3)
    f = PolynomialFactor.random(np.random.default_rng(3), dim=4, degree=2)
    chart = ConformalChart(ell, 0.02, f)
    x0 = ell.point(*ang)
    x1 = integrate(chart, x0, t, tol=tol).states[-1]
    back = integrate(chart, x1, -t, tol=tol).states[-1]
    assert np.linalg.norm(back - x0) < 10 * tol


# -- periodic orbits ---------------------------------------------------------------------------

def test_ellipsoid_short_orbit():
    ell = EllipsoidChart(2, 3)
    rec = find_periodic_orbit(ell, ell.point(1.55, 0, 0), 2.05)
    assert abs(rec.period - 2) < 1e-10 and rec.residual < 1e-10


def test_bump_center_orbit_and_generic_seed():
    spec = BumpSpec(0.05, 0.1, 0.35, 0.5 - np.pi * 0.35 ** 2)
    chart = bump_chart(spec)
    rec = find_periodic_orbit(chart, [0.0, 0.0, 0.0], 1.0)
    assert abs(rec.period - (1 - spec.eps * spec.c_minus)) < 1e-8
    with pytest.raises(NoConvergence):
        find_periodic_orbit(chart, [0.2, 0.0, 0.0], 1.0)


# -- volumes -------------------------------------------------------------------------------------

@pytest.mark.parametrize("pq", [(1, 2), (2, 3)])
def test_ellipsoid_volume(pq):
    assert abs(contact_volume(EllipsoidChart(*pq)) - pq[0] * pq[1]) < 1e-6


@pytest.mark.parametrize("rho", [0.5, 1.0])
def test_disk_volume(rho):
    assert abs(contact_volume(StandardDiskChart(rho)) - np.pi * rho ** 2) < 1e-6


def test_seifert_torus_volume():
    # lambda ^ dlambda = 2 r dr dtheta ds / alpha1^2
    assert abs(contact_volume(SeifertTorusChart(3, 1, 0.8)) - 2 * np.pi * 0.64 / 9) < 1e-6


def test_conformal_volume_scaling():
    ell = EllipsoidChart(1, 2)
    chart = perturb_conformal(ell, 0.1, constant_factor(0.5, 4))
    assert abs(contact_volume(chart) - 2 * 1.05 ** 2) < 1e-6
    assert contact_volume(ConformalChart(ell, 0.0, constant_factor(1.0, 4))) == contact_volume(ell)
