import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebkit.errors import (MinimizerOnBoundary, NotNormalized, NotSmallEnough, PositiveCalabi)
from reebkit.surfaces import (AnnulusSurface, DiskSurface, Hamiltonian, HamiltonianSystem, action_of_point,
                              annulus_hamiltonian, c1_norm, calabi, constant_hamiltonian, flow_map,
                              flux_between, min_action_fixed_point, radial_quadratic,
                              random_disk_hamiltonian, smallness_bound, verify_fixed_point_inequality,
                              zero_hamiltonian)

from oracles import radial_calabi, radial_margin

DISK = DiskSurface(1.0)
QUAD_TOL = 1e-8


def random_system(seed, amplitude=0.02):
    return HamiltonianSystem(DISK, random_disk_hamiltonian(np.random.default_rng(seed), amplitude=amplitude))


def annulus_system(beta=0.0, amp=0.01):
    ann = AnnulusSurface(1.0)

    def bump(t, r, s):
        c, sn = np.cos(2 * np.pi * s), np.sin(2 * np.pi * s)
        w = amp * (1 + np.cos(2 * np.pi * t))
        return w * sn, 0 * r, w * 2 * np.pi * c

    H = annulus_hamiltonian(ann, lambda t: 0.0, lambda t: beta * np.sin(2 * np.pi * t), bump)
    return HamiltonianSystem(ann, H)


def jacobian_fd(phi, Z, h=1e-6):
    J = np.empty((len(Z), 2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        J[:, :, j] = (phi(Z + e) - phi(Z - e)) / (2 * h)
    return J


# -- surfaces -----------------------------------------------------------------------------

def test_surface_areas_and_primitives():
    assert DISK.area == 0.5
    ann = AnnulusSurface(1.0)
    Z, W = ann.quadrature(3)
    assert abs(W.sum() - ann.area) < 1e-12
    Z, W = DISK.quadrature(2)
    assert abs(W.sum() - DISK.area) < 1e-12
    # d(primitive) = density on the annulus: d/dr W(r) = w(r)
    r = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    assert np.allclose((ann.W(r + h) - ann.W(r - h)) / (2 * h), ann.w(r), atol=1e-8)


# -- flows ----------------------------------------------------------------------------------

def test_constant_hamiltonian_flow_is_identity():
    sys = HamiltonianSystem(DISK, constant_hamiltonian(0.3))
    Z = DISK.sample_grid(9)
    assert np.array_equal(flow_map(sys)(Z), Z)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_disk_flow_preserves_area(seed):
    sys = random_system(seed)
    rng = np.random.default_rng(seed)
    r = 0.95 * np.sqrt(rng.uniform(0, 1, 100))
    th = rng.uniform(0, 2 * np.pi, 100)
    Z = np.column_stack([r * np.cos(th), r * np.sin(th)])
    J = jacobian_fd(flow_map(sys, tol=1e-12), Z)
    det = np.linalg.det(J)
    assert np.max(np.abs(det - 1)) < 1e-6


def test_annulus_flow_preserves_area():
    sys = annulus_system(0.02)
    ann = sys.surface
    rng = np.random.default_rng(5)
    Z = np.column_stack([rng.uniform(0.05, 0.95, 100), rng.uniform(0, 1, 100)])
    phi = flow_map(sys, tol=1e-12)
    det = np.linalg.det(jacobian_fd(phi, Z))
    ratio = det * ann.w(phi(Z)[:, 0]) / ann.w(Z[:, 0])
    assert np.max(np.abs(ratio - 1)) < 1e-6


def test_composition_and_reversal():
    a = random_system(1).H
    b = random_system(2).H
    Z = DISK.sample_grid(7)
    ab = flow_map(HamiltonianSystem(DISK, a.then(b)), tol=1e-12)(Z)
    seq = flow_map(HamiltonianSystem(DISK, b), tol=1e-12)(flow_map(HamiltonianSystem(DISK, a), tol=1e-12)(Z))
    assert np.max(np.abs(ab - seq)) < 1e-9
    back = flow_map(HamiltonianSystem(DISK, a.reversed()), tol=1e-12)(flow_map(HamiltonianSystem(DISK, a), tol=1e-12)(Z))
    assert np.max(np.abs(back - Z)) < 1e-9


# -- action, flux, Calabi ------------------------------------------------------------------------

def test_action_examples():
    ident = HamiltonianSystem(DISK, zero_hamiltonian())
    assert action_of_point(ident, [0.3, 0.2]) == 0
    eps = 0.1
    sys = HamiltonianSystem(DISK, radial_quadratic(eps))
    assert abs(action_of_point(sys, [0.0, 0.0]) + eps / 2) < 1e-12
    with pytest.raises(NotNormalized):
        action_of_point(HamiltonianSystem(DISK, constant_hamiltonian(0.2)), [0.0, 0.0])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_action_independent_of_primitive_at_fixed_point(seed, a, b, c):
    # the center is fixed by every rotation-invariant flow; add dg with g = a x^2 + b xy + c y^3
    sys = HamiltonianSystem(DISK, radial_quadratic(0.05 + 0.1 * (seed % 7) / 7))

    def shift_grad(Z):
        x, y = Z[:, 0], Z[:, 1]
        return np.column_stack([2 * a * x + b * y, b * x + 3 * c * y ** 2])

    z = np.array([0.0, 0.0])
    assert abs(action_of_point(sys, z, shift_grad=shift_grad) - action_of_point(sys, z)) < 1e-10


def test_flux_examples():
    sys = HamiltonianSystem(AnnulusSurface(1.0), constant_hamiltonian(0.4))
    assert flux_between(sys, 0, 1) == 0
    beta = 0.3
    ann = AnnulusSurface(1.0)
    H = annulus_hamiltonian(ann, lambda t: 0.0, lambda t: beta)
    assert abs(flux_between(HamiltonianSystem(ann, H), 0, 1) - beta) < 1e-14
    assert abs(flux_between(annulus_system(0.05), 0, 1)) < 1e-14


def test_calabi_examples():
    ident = HamiltonianSystem(DISK, zero_hamiltonian())
    assert calabi(ident) == (0.0, 0.0)
    for eps in (0.05, 0.1):
        ca, ch = calabi(HamiltonianSystem(DISK, radial_quadratic(eps)), QUAD_TOL)
        assert abs(ca - radial_calabi(eps)) < QUAD_TOL
        assert abs(ch - radial_calabi(eps)) < QUAD_TOL


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_calabi_formulas_agree(seed):
    ca, ch = calabi(random_system(seed), QUAD_TOL)
    assert abs(ca - ch) < 2 * QUAD_TOL


def test_calabi_homomorphism_and_inverse():
    a, b = random_system(11).H, random_system(12).H
    ca = calabi(HamiltonianSystem(DISK, a), QUAD_TOL)[0]
    cb = calabi(HamiltonianSystem(DISK, b), QUAD_TOL)[0]
    cab = calabi(HamiltonianSystem(DISK, a.then(b)), QUAD_TOL)[0]
    assert abs(cab - ca - cb) < 4 * QUAD_TOL
    crev = calabi(HamiltonianSystem(DISK, a.reversed()), QUAD_TOL)[0]
    assert abs(crev + ca) < 4 * QUAD_TOL


def test_annulus_calabi_formulas_agree():
    ca, ch = calabi(annulus_system(0.05), QUAD_TOL)
    assert abs(ca - ch) < 2 * QUAD_TOL


# -- fixed points and the inequality ----------------------------------------------------------------

def test_min_action_fixed_point_examples():
    eps = 0.1
    rec = min_action_fixed_point(HamiltonianSystem(DISK, radial_quadratic(eps)))
    assert np.linalg.norm(rec.point) < 1e-6 and abs(rec.action + eps / 2) < 1e-10 and rec.contractible
    rec = min_action_fixed_point(HamiltonianSystem(DISK, zero_hamiltonian()))
    assert rec.action == 0
    # H >= 0 vanishing on the boundary: no interior point beats the boundary value
    bowl = Hamiltonian(lambda t, Z: -0.05 * (Z[:, 0] ** 2 + Z[:, 1] ** 2 - 1) / 2, lambda t, Z: -0.05 * Z)
    with pytest.raises(MinimizerOnBoundary):
        min_action_fixed_point(HamiltonianSystem(DISK, bowl))


def test_inequality_identity_is_equality():
    rep = verify_fixed_point_inequality(HamiltonianSystem(DISK, zero_hamiltonian()))
    assert rep["lhs"] == rep["rhs"] == 0
    assert rep["pass"] and rep["identity"] and not rep["strict"]


@pytest.mark.parametrize("eps, lhs, rhs", [(0.05, -0.0246875, -0.0125), (0.2, -0.095, -0.05)])
def test_inequality_examples(eps, lhs, rhs):
    rep = verify_fixed_point_inequality(HamiltonianSystem(DISK, radial_quadratic(eps)), c=0.5)
    assert abs(rep["lhs"] - lhs) < 1e-9
    assert abs(rep["rhs"] - rhs) < QUAD_TOL
    assert abs(rep["margin"] - radial_margin(eps)) < QUAD_TOL
    assert rep["pass"] and rep["strict"]


def test_inequality_margin_vanishes_with_eps():
    margins = []
    for eps in (0.2, 0.1, 0.05, 0.02, 0.01):
        rep = verify_fixed_point_inequality(HamiltonianSystem(DISK, radial_quadratic(eps)))
        margins.append(rep["margin"])
    assert all(m < 0 for m in margins)
    assert all(abs(b) < abs(a) for a, b in zip(margins, margins[1:]))


def test_inequality_preconditions():
    with pytest.raises(NotSmallEnough):
        verify_fixed_point_inequality(HamiltonianSystem(DISK, radial_quadratic(1.0)))
    with pytest.raises(PositiveCalabi):
        verify_fixed_point_inequality(HamiltonianSystem(DISK, radial_quadratic(-0.1)))


def test_c1_norm_and_bound():
    eps = 0.1
    # sup |H| = eps/2 at the center, sup |dH| = eps on the boundary (grid stops just inside)
    assert abs(c1_norm(HamiltonianSystem(DISK, radial_quadratic(eps))) - 1.5 * eps) < 1e-3
    assert smallness_bound(DISK, 0.5) == 0.5
