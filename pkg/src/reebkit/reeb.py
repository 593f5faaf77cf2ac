"""Reeb vector fields, trajectories, periodic orbits, volumes and first-return data."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rk import dopri
from .charts import ContactChart, _batch
from .errors import (
    DegenerateContactForm,
    NoConvergence,
    QuadratureNotConverged,
    SectionNotTransverse,
    TransversalityViolated,
)

SHORT, CONTINUED, UNKNOWN = "SHORT", "CONTINUED", "UNKNOWN"


def reeb_field(chart: ContactChart, X, check=True):
    """Solve ``R _| dlambda = 0`` and ``lambda(R) = 1`` at every point of the batch.

    In three dimensions ``R = curl(a) / (a . curl(a))``.  On the ellipsoid the
    system is solved in R^4 with a Lagrange multiplier for the constraint:
    ``(A - A^T) R = mu grad F``, ``a . R = 1``.
    """
    X = _batch(X)
    a = chart.coeffs(X)
    A = chart.jac(X)
    if chart.dim == 3:
        B = np.stack([A[:, 2, 1] - A[:, 1, 2], A[:, 0, 2] - A[:, 2, 0], A[:, 1, 0] - A[:, 0, 1]], axis=1)
        vol = np.einsum("ij,ij->i", a, B)
        scale = np.linalg.norm(a, axis=1) * np.linalg.norm(B, axis=1)
        if np.any(np.abs(vol) <= 1e-13 * np.maximum(scale, 1e-300)):
            raise DegenerateContactForm("lambda ^ dlambda vanishes")
        R = B / vol[:, None]
    else:
        m, n = X.shape
        grad = chart.constraint_grad(X)
        K = np.zeros((m, n + 1, n + 1))
        K[:, :n, :n] = A - np.transpose(A, (0, 2, 1))
        K[:, :n, n] = -grad
        K[:, n, :n] = a
        rhs = np.zeros((m, n + 1))
        rhs[:, n] = 1.0
        try:
            sol = np.linalg.solve(K, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise DegenerateContactForm(f"singular Reeb system: {exc}") from None
        R = sol[:, :n]
    if check:
        defect = np.abs(np.einsum("ij,ij->i", a, R) - 1.0)
        if not np.all(defect < 1e-12):
            raise DegenerateContactForm(f"lambda(R) = 1 violated by {defect.max():.2e}")
    return R


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    steps: int = 0
    rejected: int = 0
    max_error: float = 0.0

    def rows(self):
        return [[float(t)] + [float(v) for v in x] for t, x in zip(self.t, self.states)]


def _rhs(chart):
    return lambda t, Y: reeb_field(chart, Y, check=False)


def flow(chart, X0, t, tol=1e-10, keep=False):
    """Batched time-``t`` flow; returns the endpoints (same shape as ``X0``)."""
    X0 = np.asarray(X0, dtype=float)
    project = chart.project if chart.constrained else None
    res = dopri(_rhs(chart), 0.0, t, X0, tol=tol, project=project,
                in_domain=chart.in_domain, keep=keep)
    return res if keep else res.y[-1]


def integrate(chart: ContactChart, x0, t: float, tol: float = 1e-10) -> Trajectory:
    x0 = np.asarray(x0, dtype=float)
    if chart.constrained:
        x0 = chart.project(x0)[0]
    res = flow(chart, x0, t, tol=tol, keep=True)
    return Trajectory(res.t, res.y, res.steps, res.rejected, res.max_error)


@dataclass
class OrbitRecord:
    anchor: np.ndarray
    period: float
    residual: float
    tag: str = UNKNOWN
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {"anchor": [float(v) for v in self.anchor], "period": float(self.period),
                "residual": float(self.residual), "tag": self.tag, "iterations": self.iterations}


def _wrap(chart, D):
    """Reduce the periodic coordinate of displacement vectors to (-1/2, 1/2]."""
    if chart.periodic_index is not None:
        D = D.copy()
        i = chart.periodic_index
        D[..., i] -= np.round(D[..., i])
    return D


def _section_basis(chart, x, R):
    vecs = [R / np.linalg.norm(R)]
    if chart.constrained:
        g = chart.constraint_grad(x)[0]
        vecs.append(g / np.linalg.norm(g))
    Q, _ = np.linalg.qr(np.column_stack(vecs + [np.eye(chart.dim)[:, i] for i in range(chart.dim)]))
    k = len(vecs)
    return Q[:, k:chart.dim]


def find_periodic_orbit(chart: ContactChart, seed, period_guess: float, tol: float = 1e-10,
                        max_iter: int = 40, fd_step: float = 1e-6, max_drift: float = 0.05,
                        int_tol: float = 1e-12, tag: str = UNKNOWN) -> OrbitRecord:
    """Gauss-Newton shooting for ``phi^T(x) = x`` with ``x`` on a local section.

    The section is the plane through ``seed`` orthogonal to the Reeb field
    (intersected with the tangent space on the ellipsoid).  Columns of the
    Jacobian for the section coordinates use central differences of batched
    integrations; the period column is the Reeb field at the end point.
    Iterates that drift further than ``max_drift`` from the seed are
    rejected with :class:`NoConvergence`, so the search stays local.
    """
    if period_guess <= 0:
        raise ValueError("period_guess must be positive")
    x0 = _batch(np.asarray(seed, float))
    if chart.constrained:
        x0 = chart.project(x0)
    x0 = x0[0]
    R0 = reeb_field(chart, x0)[0]
    if not np.linalg.norm(R0) > 1e-12:
        raise SectionNotTransverse("Reeb field vanishes at the seed")
    E = _section_basis(chart, x0[None], R0)
    d = E.shape[1]

    def lift(U):
        P = x0 + U @ E.T
        return chart.project(P) if chart.constrained else P

    def residual_batch(U, T):
        P = lift(U)
        return _wrap(chart, flow(chart, P, T, tol=int_tol) - P), P

    u = np.zeros(d)
    T = float(period_guess)
    r, P = residual_batch(u[None], T)
    r, P = r[0], P[0]
    for it in range(1, max_iter + 1):
        if np.linalg.norm(r) < tol:
            return OrbitRecord(P, T, float(np.linalg.norm(r)), tag, it - 1)
        h = fd_step * max(1.0, np.linalg.norm(x0))
        U = np.concatenate([u + h * np.eye(d), u - h * np.eye(d)])
        Rs, _ = residual_batch(U, T)
        J = np.empty((chart.dim, d + 1))
        J[:, :d] = ((Rs[:d] - Rs[d:]) / (2 * h)).T
        J[:, d] = reeb_field(chart, (P + r)[None], check=False)[0]
        delta = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        norm0 = np.linalg.norm(r)
        for _ in range(8):
            u_new, T_new = u + lam * delta[:d], T + lam * delta[d]
            if np.linalg.norm(u_new) > max_drift or T_new <= 0:
                lam *= 0.5
                continue
            r_new, P_new = residual_batch(u_new[None], T_new)
            if np.linalg.norm(r_new[0]) < norm0 or lam < 1 / 64:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"shooting left the trust region of radius {max_drift}")
        if np.linalg.norm(u_new) > max_drift:
            raise NoConvergence(f"shooting left the trust region of radius {max_drift}")
        u, T, r, P = u_new, T_new, r_new[0], P_new[0]
    if np.linalg.norm(r) < tol:
        return OrbitRecord(P, T, float(np.linalg.norm(r)), tag, max_iter)
    raise NoConvergence(f"residual {np.linalg.norm(r):.3e} after {max_iter} iterations")


# -- volume -----------------------------------------------------------------------

def volume_density(chart, X, tangents):
    """``(lambda ^ dlambda)(u, v, w)`` for batched points and tangent triples."""
    a = chart.coeffs(X)
    A = chart.jac(X)
    D = np.transpose(A, (0, 2, 1)) - A
    u, v, w = tangents

    def dl(p, q):
        return np.einsum("ij,ijk,ik->i", p, D, q)

    def lam(p):
        return np.einsum("ij,ij->i", a, p)

    return lam(u) * dl(v, w) - lam(v) * dl(u, w) + lam(w) * dl(u, v)


def _gl(n, lo, hi):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def _param_nodes(chart, level):
    """Nodes, weights and tangent vectors of the parametrisation at a refinement level."""
    m = 2 ** level
    if chart.constrained:
        psi, wpsi = _gl(8 * m, 0.0, np.pi / 2)
        n1 = n2 = 16 * m
        t1 = np.arange(n1) * 2 * np.pi / n1
        t2 = np.arange(n2) * 2 * np.pi / n2
        P, T1, T2 = np.meshgrid(psi, t1, t2, indexing="ij")
        W = (wpsi[:, None, None] * np.full((1, n1, n2), (2 * np.pi) ** 2 / (n1 * n2))).ravel()
        P, T1, T2 = P.ravel(), T1.ravel(), T2.ravel()
        c1 = np.sqrt(chart.p / np.pi)
        c2 = np.sqrt(chart.q / np.pi)
        X = chart.point(P, T1, T2)
        r1, r2 = c1 * np.sin(P), c2 * np.cos(P)
        z = np.zeros_like(P)
        dpsi = np.stack([c1 * np.cos(P) * np.cos(T1), c1 * np.cos(P) * np.sin(T1),
                         -c2 * np.sin(P) * np.cos(T2), -c2 * np.sin(P) * np.sin(T2)], axis=1)
        dt1 = np.stack([-r1 * np.sin(T1), r1 * np.cos(T1), z, z], axis=1)
        dt2 = np.stack([z, z, -r2 * np.sin(T2), r2 * np.cos(T2)], axis=1)
        return X, W, (dpsi, dt1, dt2)
    r, wr = _gl(8 * m, 0.0, chart.rho)
    nth, ns = 16 * m, 4 * m
    th = np.arange(nth) * 2 * np.pi / nth
    s = np.arange(ns) / ns
    Rr, Th, S = np.meshgrid(r, th, s, indexing="ij")
    W = (wr[:, None, None] * np.full((1, nth, ns), 2 * np.pi / (nth * ns))).ravel()
    Rr, Th, S = Rr.ravel(), Th.ravel(), S.ravel()
    X = np.stack([Rr * np.cos(Th), Rr * np.sin(Th), S], axis=1)
    z = np.zeros_like(Rr)
    dr = np.stack([np.cos(Th), np.sin(Th), z], axis=1)
    dth = np.stack([-Rr * np.sin(Th), Rr * np.cos(Th), z], axis=1)
    ds = np.stack([z, z, np.ones_like(Rr)], axis=1)
    return X, W, (dr, dth, ds)


def _volume_at_level(chart, level, chunk=100000):
    X, W, tang = _param_nodes(chart, level)
    total = 0.0
    for i in range(0, len(W), chunk):
        sl = slice(i, i + chunk)
        total += float(W[sl] @ volume_density(chart, X[sl], tuple(t[sl] for t in tang)))
    return abs(total)


def contact_volume(chart: ContactChart, quad_tol: float = 1e-8, max_level: int = 4) -> float:
    """Integral of ``lambda ^ dlambda`` by Gauss-Legendre x trapezoid quadrature.

    The grid is doubled in every direction until two successive estimates
    differ by at most ``quad_tol``.
    """
    prev = _volume_at_level(chart, 0)
    for level in range(1, max_level + 1):
        cur = _volume_at_level(chart, level)
        if abs(cur - prev) <= quad_tol:
            return cur
        prev = cur
    raise QuadratureNotConverged(f"volume estimates still differ by {abs(cur - prev):.3e}")


# -- first return to the disk D x {0} ---------------------------------------------------

def _section_rhs(chart):
    def f(s, Y):
        P = np.column_stack([Y[:, 0], Y[:, 1], np.full(Y.shape[0], s)])
        R = reeb_field(chart, P, check=False)
        if np.any(R[:, 2] <= 0):
            raise TransversalityViolated(f"Reeb field not positively transverse at s={s}")
        return np.column_stack([R[:, 0] / R[:, 2], R[:, 1] / R[:, 2], 1 / R[:, 2]])
    return f


@dataclass
class ReturnData:
    points: np.ndarray
    tau: np.ndarray
    image: np.ndarray


def first_return_data(chart: ContactChart, points, tol: float = 1e-12) -> ReturnData:
    """Return time and return point of the disk ``s = 0`` for every grid point.

    The flow is reparametrised by ``s``: ``dz/ds = R_z / R_s`` and
    ``dt/ds = 1 / R_s``, integrated over one loop ``s in [0, 1]``.
    """
    if chart.dim != 3 or chart.periodic_index != 2:
        raise TypeError("first-return data needs a solid-torus chart")
    Z = np.atleast_2d(np.asarray(points, dtype=float))
    P0 = np.column_stack([Z, np.zeros(len(Z))])
    R0 = reeb_field(chart, P0, check=False)
    if np.any(R0[:, 2] <= 0):
        raise TransversalityViolated("Reeb field is not positively transverse to the section")
    Y0 = np.column_stack([Z, np.zeros(len(Z))])
    res = dopri(_section_rhs(chart), 0.0, 1.0, Y0, tol=tol, keep=False,
                in_domain=lambda Y: chart.in_domain(np.column_stack([Y[:, :2], np.zeros(len(Y))])))
    end = res.y[-1]
    return ReturnData(Z, end[:, 2], end[:, :2])


def section_primitive(chart, Z):
    """``nu = lambda`` restricted to ``s = 0``: coefficient pair ``(nu_x, nu_y)``."""
    P = np.column_stack([Z, np.zeros(len(Z))])
    return chart.coeffs(P)[:, :2]


def section_area_density(chart, Z):
    """Density of ``omega = d nu`` with respect to ``dx dy``."""
    P = np.column_stack([Z, np.zeros(len(Z))])
    A = chart.jac(P)
    return A[:, 1, 0] - A[:, 0, 1]


def polar_grid(rho, n_r=64, n_theta=64, r_min_frac=0.02, r_max_frac=0.98):
    """Interior polar grid of ``n_r x n_theta`` points in the disk of radius ``rho``."""
    r = rho * np.linspace(r_min_frac, r_max_frac, n_r)
    th = np.arange(n_theta) * 2 * np.pi / n_theta
    Rr, Th = np.meshgrid(r, th, indexing="ij")
    return np.column_stack([(Rr * np.cos(Th)).ravel(), (Rr * np.sin(Th)).ravel()])


def exactness_defect(chart, points, h: float = 1e-5, tol: float = 1e-13):
    """Componentwise ``(D phi)^T nu(phi(z)) - nu(z) - grad tau`` on a set of section points.

    Derivatives are central differences; all stencil points are integrated in
    one batch so that integration errors are smooth across the stencil.
    """
    Z = np.atleast_2d(np.asarray(points, float))
    m = len(Z)
    offs = np.array([[0, 0], [h, 0], [-h, 0], [0, h], [0, -h]])
    S = (Z[None, :, :] + offs[:, None, :]).reshape(-1, 2)
    data = first_return_data(chart, S, tol=tol)
    tau = data.tau.reshape(5, m)
    phi = data.image.reshape(5, m, 2)
    dphi_dx = (phi[1] - phi[2]) / (2 * h)
    dphi_dy = (phi[3] - phi[4]) / (2 * h)
    grad_tau = np.column_stack([(tau[1] - tau[2]) / (2 * h), (tau[3] - tau[4]) / (2 * h)])
    nu_img = section_primitive(chart, phi[0])
    nu = section_primitive(chart, Z)
    pull = np.column_stack([np.einsum("ij,ij->i", dphi_dx, nu_img), np.einsum("ij,ij->i", dphi_dy, nu_img)])
    return pull - nu - grad_tau


def return_time_volume(chart, alpha: int = 1, quad_tol: float = 1e-9, max_level: int = 4, tol=1e-12):
    """``(1/alpha) int tau omega`` over the section disk, with node doubling."""
    prev = None
    for level in range(max_level + 1):
        m = 2 ** level
        r, wr = _gl(8 * m, 0.0, chart.rho)
        nth = 16 * m
        th = np.arange(nth) * 2 * np.pi / nth
        Rr, Th = np.meshgrid(r, th, indexing="ij")
        Z = np.column_stack([(Rr * np.cos(Th)).ravel(), (Rr * np.sin(Th)).ravel()])
        W = (wr[:, None] * Rr * (2 * np.pi / nth)).ravel()
        tau = first_return_data(chart, Z, tol=tol).tau
        cur = float(W @ (tau * section_area_density(chart, Z))) / alpha
        if prev is not None and abs(cur - prev) <= quad_tol:
            return cur
        prev = cur
    raise QuadratureNotConverged("return-time volume did not converge")
