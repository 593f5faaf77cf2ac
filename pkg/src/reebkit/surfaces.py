"""Hamiltonian dynamics on compact surfaces: actions, flux and the Calabi invariant.

Two surfaces are provided.

* :class:`DiskSurface` -- the disk of radius ``rho`` in Cartesian ``(x, y)``
  with ``omega = dx dy / (2 pi)`` (that is ``r dr ds`` with ``s = theta/2pi``)
  and primitive ``nu = (x dy - y dx) / (4 pi)``.  Area ``rho^2 / 2``.
* :class:`AnnulusSurface` -- ``(r, s) in [0, L] x R/Z`` with
  ``omega = w(r) dr ds`` where ``w(r) = r`` near ``r = 0`` and
  ``w(r) = L - r`` near ``r = L``: the area form degenerates linearly at
  both boundary circles.  Primitive ``nu = W(r) ds`` with ``W' = w``.

Hamiltonian vector fields are defined by ``X _| omega = dH``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize

from ._rk import dopri
from .errors import (
    BoundaryEscape,
    MinimizerOnBoundary,
    NonConstantOnBoundary,
    NotNormalized,
    NotQuasiAutonomous,
    NotSmallEnough,
    PositiveCalabi,
    QuadratureNotConverged,
)


def _gl(n, lo, hi):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


class DiskSurface:
    kind = "disk"
    n_boundary = 1

    def __init__(self, rho=1.0):
        self.rho = float(rho)

    @property
    def area(self):
        return self.rho ** 2 / 2

    def density(self, Z):
        return np.full(len(Z), 1 / (2 * np.pi))

    def primitive(self, Z):
        return np.column_stack([-Z[:, 1], Z[:, 0]]) / (4 * np.pi)

    def vector_field(self, dH, Z):
        return 2 * np.pi * np.column_stack([dH[:, 1], -dH[:, 0]])

    def inside(self, Z, slack=1e-9):
        return Z[:, 0] ** 2 + Z[:, 1] ** 2 <= self.rho ** 2 * (1 + slack)

    def boundary_points(self, component=0, n=64):
        th = np.arange(n) * 2 * np.pi / n
        return self.rho * np.column_stack([np.cos(th), np.sin(th)])

    def quadrature(self, level):
        """Nodes and ``omega``-weights of a polar Gauss x trapezoid rule."""
        m = 2 ** level
        r, wr = _gl(8 * m, 0.0, self.rho)
        nth = 16 * m
        th = np.arange(nth) * 2 * np.pi / nth
        R, T = np.meshgrid(r, th, indexing="ij")
        Z = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
        W = (wr[:, None] * R / nth).ravel()  # r dr dtheta / (2 pi)
        return Z, W

    def sample_grid(self, n=41):
        u = np.linspace(-self.rho, self.rho, n)
        X, Y = np.meshgrid(u, u, indexing="ij")
        Z = np.column_stack([X.ravel(), Y.ravel()])
        return Z[np.hypot(Z[:, 0], Z[:, 1]) < self.rho * (1 - 1e-9)]

    def center(self):
        return np.zeros(2)

    def distance_to_boundary(self, Z):
        return self.rho - np.hypot(Z[:, 0], Z[:, 1])

    def displacement(self, A, B):
        return B - A


def _smootherstep():
    return Polynomial([0, 0, 0, 10, -15, 6])


class AnnulusSurface:
    kind = "annulus"
    n_boundary = 2

    def __init__(self, L=1.0):
        self.L = float(L)
        L3 = self.L / 3
        # w = r + sigma(r) (L - 2r) with sigma the smootherstep from L/3 to 2L/3
        u = Polynomial([-1.0, 1 / L3])  # u = (r - L/3) / (L/3)
        sig = _smootherstep()(u)
        self._w_mid = Polynomial([0.0, 1.0]) + sig * Polynomial([self.L, -2.0])
        W_mid = self._w_mid.integ()
        self._W_mid = W_mid - W_mid(L3) + L3 ** 2 / 2
        self._WL = self._W_mid(2 * L3) + L3 ** 2 / 2

    @property
    def area(self):
        return self._WL

    def w(self, r):
        r = np.asarray(r, float)
        L3 = self.L / 3
        return np.where(r < L3, r, np.where(r > 2 * L3, self.L - r, self._w_mid(r)))

    def W(self, r):
        r = np.asarray(r, float)
        L3 = self.L / 3
        return np.where(r < L3, r ** 2 / 2,
                        np.where(r > 2 * L3, self._WL - (self.L - r) ** 2 / 2, self._W_mid(r)))

    def density(self, Z):
        return self.w(Z[:, 0])

    def primitive(self, Z):
        return np.column_stack([np.zeros(len(Z)), self.W(Z[:, 0])])

    def vector_field(self, dH, Z):
        w = self.w(Z[:, 0])
        return np.column_stack([dH[:, 1] / w, -dH[:, 0] / w])

    def inside(self, Z, slack=1e-9):
        return (Z[:, 0] >= -slack * self.L) & (Z[:, 0] <= self.L * (1 + slack))

    def boundary_points(self, component=0, n=64):
        s = np.arange(n) / n
        r = 0.0 if component == 0 else self.L
        return np.column_stack([np.full(n, r), s])

    def quadrature(self, level):
        m = 2 ** level
        L3 = self.L / 3
        rs, ws = [], []
        for k in range(3):
            r, w = _gl(6 * m, k * L3, (k + 1) * L3)
            rs.append(r)
            ws.append(w)
        r, wr = np.concatenate(rs), np.concatenate(ws)
        ns = 16 * m
        s = np.arange(ns) / ns
        R, S = np.meshgrid(r, s, indexing="ij")
        Z = np.column_stack([R.ravel(), S.ravel()])
        W = (wr[:, None] * self.w(R) / ns).ravel()
        return Z, W

    def sample_grid(self, n=41):
        r = np.linspace(0, self.L, n)[1:-1]
        s = np.arange(n) / n
        R, S = np.meshgrid(r, s, indexing="ij")
        return np.column_stack([R.ravel(), S.ravel()])

    def center(self):
        return np.array([self.L / 2, 0.0])

    def distance_to_boundary(self, Z):
        return np.minimum(Z[:, 0], self.L - Z[:, 0])

    def displacement(self, A, B):
        D = B - A
        D[:, 1] -= np.round(D[:, 1])
        return D


class Hamiltonian:
    """Time-dependent ``H_t`` on a surface, given by batched value and gradient.

    A Hamiltonian is a list of segments ``(t0, t1, value, grad)``, each smooth
    on its closed interval; integrations restart at segment boundaries and
    use the segment's own formulas up to and including its end point.
    """

    def __init__(self, value=None, grad=None, name="custom", segments=None):
        self.segments = tuple(segments) if segments is not None else ((0.0, 1.0, value, grad),)
        self.name = name

    @property
    def breakpoints(self):
        return tuple([s[0] for s in self.segments] + [self.segments[-1][1]])

    def _segment(self, t):
        for seg in self.segments:
            if t < seg[1]:
                return seg
        return self.segments[-1]

    def __call__(self, t, Z):
        return self._segment(t)[2](t, np.atleast_2d(Z))

    def grad(self, t, Z):
        return self._segment(t)[3](t, np.atleast_2d(Z))

    def scaled(self, c):
        segs = [(a, b, lambda t, Z, v=v: c * v(t, Z), lambda t, Z, g=g: c * g(t, Z))
                for a, b, v, g in self.segments]
        return Hamiltonian(name=f"{c}*{self.name}", segments=segs)

    def reversed(self):
        """Generator of the inverse isotopy: ``-H_{1-t}``."""
        segs = [(1 - b, 1 - a, lambda t, Z, v=v: -v(1 - t, Z), lambda t, Z, g=g: -g(1 - t, Z))
                for a, b, v, g in reversed(self.segments)]
        return Hamiltonian(name=f"rev({self.name})", segments=segs)

    def then(self, other):
        """Generator of ``phi_other o phi_self``: ``self`` on [0, 1/2], ``other`` on [1/2, 1]."""
        segs = [(a / 2, b / 2, lambda t, Z, v=v: 2 * v(2 * t, Z), lambda t, Z, g=g: 2 * g(2 * t, Z))
                for a, b, v, g in self.segments]
        segs += [(0.5 + a / 2, 0.5 + b / 2, lambda t, Z, v=v: 2 * v(2 * t - 1, Z),
                  lambda t, Z, g=g: 2 * g(2 * t - 1, Z)) for a, b, v, g in other.segments]
        return Hamiltonian(name=f"{self.name}#{other.name}", segments=segs)


def zero_hamiltonian():
    return Hamiltonian(lambda t, Z: np.zeros(len(Z)), lambda t, Z: np.zeros_like(Z), name="zero")


def constant_hamiltonian(b):
    return Hamiltonian(lambda t, Z: np.full(len(Z), float(b)), lambda t, Z: np.zeros_like(Z), name=f"const({b})")


def radial_quadratic(eps, rho=1.0):
    """``H = eps (r^2/rho^2 - 1) / 2``: rigid rotation, minimum ``-eps/2`` at the center."""
    def value(t, Z):
        return eps * ((Z[:, 0] ** 2 + Z[:, 1] ** 2) / rho ** 2 - 1) / 2

    def grad(t, Z):
        return eps * Z / rho ** 2

    return Hamiltonian(value, grad, name=f"radial_quadratic({eps})")


def _powers(Z, degree):
    """``(x^i, y^i)`` for ``i = 0..degree`` by repeated multiplication."""
    px = [np.ones(len(Z))]
    py = [np.ones(len(Z))]
    for _ in range(degree):
        px.append(px[-1] * Z[:, 0])
        py.append(py[-1] * Z[:, 1])
    return px, py


def random_disk_hamiltonian(rng, amplitude=0.02, degree=2, rho=1.0, boundary_amplitude=None):
    """``b(t) + (rho^2 - r^2) P_t(x, y)`` with ``P_t`` a random trigonometric-in-time polynomial.

    ``b(t) = beta sin(2 pi t)`` has zero mean, so the result is normalised.
    """
    exps = [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]
    C = rng.uniform(-amplitude, amplitude, size=(len(exps), 3))
    beta = rng.uniform(-amplitude, amplitude) if boundary_amplitude is None else boundary_amplitude

    def coef(t):
        return C[:, 0] + C[:, 1] * np.cos(2 * np.pi * t) + C[:, 2] * np.sin(2 * np.pi * t)

    def poly(Z, c):
        px, py = _powers(Z, degree)
        P = np.zeros(len(Z))
        Px = np.zeros(len(Z))
        Py = np.zeros(len(Z))
        for ck, (i, j) in zip(c, exps):
            P += ck * px[i] * py[j]
            if i:
                Px += ck * i * px[i - 1] * py[j]
            if j:
                Py += ck * j * px[i] * py[j - 1]
        return P, Px, Py

    def value(t, Z):
        P = poly(Z, coef(t))[0]
        return beta * np.sin(2 * np.pi * t) + (rho ** 2 - Z[:, 0] ** 2 - Z[:, 1] ** 2) * P

    def grad(t, Z):
        P, Px, Py = poly(Z, coef(t))
        q = rho ** 2 - Z[:, 0] ** 2 - Z[:, 1] ** 2
        return np.column_stack([q * Px - 2 * Z[:, 0] * P, q * Py - 2 * Z[:, 1] * P])

    return Hamiltonian(value, grad, name="random_disk")


def annulus_hamiltonian(surface: AnnulusSurface, b0, b1, bump=None):
    """``b0(t) + (b1(t) - b0(t)) S(r/L) + r^2 (L - r)^2 bump(t, r, s)`` with ``S(u) = 3u^2 - 2u^3``.

    ``b0, b1`` are callables of ``t``; ``bump`` returns ``(value, d/dr, d/ds)``.
    The factors are chosen so that ``dH/dr`` vanishes to first order at both
    boundaries, which keeps the vector field bounded where ``omega`` degenerates.
    """
    L = surface.L

    def value(t, Z):
        r, s = Z[:, 0], Z[:, 1]
        u = r / L
        out = b0(t) + (b1(t) - b0(t)) * (3 * u ** 2 - 2 * u ** 3)
        if bump is not None:
            out = out + r ** 2 * (L - r) ** 2 * bump(t, r, s)[0]
        return out

    def grad(t, Z):
        r, s = Z[:, 0], Z[:, 1]
        u = r / L
        Hr = (b1(t) - b0(t)) * 6 * u * (1 - u) / L
        Hs = np.zeros_like(r)
        if bump is not None:
            v, vr, vs = bump(t, r, s)
            q = r ** 2 * (L - r) ** 2
            dq = 2 * r * (L - r) ** 2 - 2 * r ** 2 * (L - r)
            Hr = Hr + dq * v + q * vr
            Hs = Hs + q * vs
        return np.column_stack([Hr, Hs])

    return Hamiltonian(value, grad, name="annulus")


@dataclass
class HamiltonianSystem:
    surface: object
    H: Hamiltonian

    def vector_field(self, t, Z, seg=None):
        dH = self.H.grad(t, Z) if seg is None else seg[3](t, Z)
        return self.surface.vector_field(dH, Z)

    def boundary_values(self, t, tol=1e-10):
        out = []
        for c in range(self.surface.n_boundary):
            v = self.H(t, self.surface.boundary_points(c))
            if np.ptp(v) > tol * max(1.0, np.abs(v).max()):
                raise NonConstantOnBoundary(f"H_{t} varies by {np.ptp(v):.2e} on boundary component {c}")
            out.append(float(v.mean()))
        return out

    def time_average_on_boundary(self, component, n=16):
        total = 0.0
        bp = self.H.breakpoints
        for a, b in zip(bp[:-1], bp[1:]):
            ts, ws = _gl(n, a, b)
            total += sum(w * self.boundary_values(t)[component] for t, w in zip(ts, ws))
        return total

    def is_normalized(self, tol=1e-12):
        return all(abs(self.time_average_on_boundary(c)) < tol for c in range(self.surface.n_boundary))


def _integrate_pieces(make_rhs, Y0, t_end, segments, tol, check=None):
    """Integrate segment by segment, each with its own smooth right-hand side."""
    Y = np.array(Y0, dtype=float)
    for seg in segments:
        a, b = seg[0], min(seg[1], t_end)
        if b > a:
            Y = dopri(make_rhs(seg), a, b, Y, tol=tol, keep=False, in_domain=check).y[-1]
    return Y


def _escape_check(surface):
    def check(Y):
        ok = surface.inside(Y[:, :2])
        if not np.all(ok):
            raise BoundaryEscape("trajectory left the surface")
        return ok
    return check


def flow_map(sys: HamiltonianSystem, t: float = 1.0, tol: float = 1e-11):
    """Evaluator ``Z -> phi_t(Z)`` for a batch of points."""
    def phi(Z):
        Z = np.atleast_2d(np.asarray(Z, float))
        if t == 0:
            return Z.copy()
        return _integrate_pieces(lambda seg: (lambda s, Y: sys.vector_field(s, Y, seg)), Z, t,
                                 sys.H.segments, tol, _escape_check(sys.surface))
    return phi


def _action_rhs(sys, seg, shift_grad=None):
    surf = sys.surface

    def f(t, Y):
        Z = Y[:, :2]
        X = sys.vector_field(t, Z, seg)
        nu = surf.primitive(Z)
        da = np.einsum("ij,ij->i", nu, X) + seg[2](t, Z)
        if shift_grad is not None:
            da = da + np.einsum("ij,ij->i", shift_grad(Z), X)
        return np.column_stack([X, da])
    return f


def flow_with_action(sys, Z, tol=1e-11, shift_grad=None):
    """Return ``(phi_1(Z), a(Z))`` with ``a = int nu(X) dt + int H dt`` along the isotopy."""
    Z = np.atleast_2d(np.asarray(Z, float))
    Y0 = np.column_stack([Z, np.zeros(len(Z))])
    Y = _integrate_pieces(lambda seg: _action_rhs(sys, seg, shift_grad), Y0, 1.0, sys.H.segments, tol,
                          _escape_check(sys.surface))
    return Y[:, :2], Y[:, 2]


def action_of_point(sys: HamiltonianSystem, z, tol: float = 1e-11, shift_grad=None, check_normalized=True):
    """Normalised action ``a(z) = int_{t -> phi_t(z)} nu + int_0^1 H_t(phi_t(z)) dt``.

    ``shift_grad`` adds ``dg`` to the primitive (``nu + dg``), which changes
    actions only by ``g(phi(z)) - g(z)``.
    """
    if check_normalized and not sys.is_normalized():
        raise NotNormalized("boundary time-averages of H do not vanish")
    Z = np.atleast_2d(np.asarray(z, float))
    _, a = flow_with_action(sys, Z, tol, shift_grad)
    return a if np.ndim(z) > 1 else float(a[0])


def flux_between(sys: HamiltonianSystem, c0: int, c1: int) -> float:
    return sys.time_average_on_boundary(c1) - sys.time_average_on_boundary(c0)


def calabi(sys: HamiltonianSystem, quad_tol: float = 1e-8, tol: float = 1e-11, max_level: int = 4):
    """``(int a omega, 2 int_0^1 int H_t omega dt)``; both agree for normalised systems."""
    if not sys.is_normalized():
        raise NotNormalized("boundary time-averages of H do not vanish")
    surf = sys.surface

    def via_action(level):
        Z, W = surf.quadrature(level)
        return float(W @ flow_with_action(sys, Z, tol)[1])

    def via_hamiltonian(level):
        Z, W = surf.quadrature(level)
        total = 0.0
        bp = sys.H.breakpoints
        for a, b in zip(bp[:-1], bp[1:]):
            ts, ws = _gl(8 * 2 ** level, a, b)
            total += sum(w * float(W @ sys.H(t, Z)) for t, w in zip(ts, ws))
        return 2 * total

    out = []
    for fn in (via_action, via_hamiltonian):
        prev = fn(0)
        for level in range(1, max_level + 1):
            cur = fn(level)
            if abs(cur - prev) <= quad_tol:
                break
            prev = cur
        else:
            raise QuadratureNotConverged(f"{fn.__name__} still moving by {abs(cur - prev):.2e}")
        out.append(cur)
    return tuple(out)


@dataclass
class FixedPointRecord:
    point: np.ndarray
    action: float
    contractible: bool
    displacement: float = 0.0

    def to_json(self):
        return {"point": [float(v) for v in self.point], "action": float(self.action),
                "contractible": bool(self.contractible), "displacement": float(self.displacement)}


def _minimize_on_surface(surface, fun, grid_values, grid):
    i = int(np.argmin(grid_values))

    def objective(z):
        # the simplex must not wander off the surface, where H is meaningless
        return float(fun(z[None])[0]) if surface.inside(z[None])[0] else np.inf

    res = minimize(objective, grid[i], method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-14, "maxiter": 4000})
    z = res.x
    if not surface.inside(z[None])[0]:
        z = grid[i]
    return z, float(fun(z[None])[0])


def common_minimizer(sys: HamiltonianSystem, n_times: int = 32, tol: float = 1e-6):
    """Sample ``H_t`` at ``n_times`` instants and return the common interior minimizer.

    Raises :class:`NotQuasiAutonomous` if the minimizers disagree and
    :class:`MinimizerOnBoundary` if the minimum is attained on the boundary.
    """
    surf = sys.surface
    grid = surf.sample_grid()
    ts = (np.arange(n_times) + 0.5) / n_times
    pts = []
    for t in ts:
        vals = sys.H(t, grid)
        bvals = sys.boundary_values(t)
        z, v = _minimize_on_surface(surf, lambda Z, t=t: sys.H(t, Z), vals, grid)
        if v >= min(bvals) - tol or surf.distance_to_boundary(z[None])[0] < tol:
            raise MinimizerOnBoundary(f"H_{t:.3f} attains its minimum on the boundary")
        pts.append(z)
    pts = np.array(pts)
    spread = np.max(np.abs(surf.displacement(pts[:1].repeat(len(pts), 0), pts)))
    if spread > tol:
        raise NotQuasiAutonomous(f"minimizers of H_t move by {spread:.2e}")
    return pts.mean(axis=0)


def _is_trivial(sys, n=8):
    grid = sys.surface.sample_grid(21)
    return all(np.max(np.abs(sys.H.grad(t, grid))) == 0 for t in np.linspace(0, 1, n))


def min_action_fixed_point(sys: HamiltonianSystem, tol: float = 1e-9) -> FixedPointRecord:
    if not sys.is_normalized():
        raise NotNormalized("boundary time-averages of H do not vanish")
    if _is_trivial(sys):
        z = sys.surface.center()
    else:
        z = common_minimizer(sys)
    return fixed_point_record(sys, z, tol)


def fixed_point_record(sys, z, tol=1e-9):
    Z = np.asarray(z, float)[None]
    img, a = flow_with_action(sys, Z, tol=min(tol, 1e-11))
    lift = img - Z
    disp = float(np.linalg.norm(sys.surface.displacement(Z, img)))
    if sys.surface.kind == "annulus":
        contractible = abs(lift[0, 1]) < 0.5
    else:
        contractible = True
    return FixedPointRecord(Z[0], float(a[0]), contractible, disp)


def c1_norm(sys: HamiltonianSystem, n_times: int = 17):
    """Sampled ``sup |H| + sup |dH|`` over a grid of the surface and of ``[0, 1]``."""
    grid = sys.surface.sample_grid()
    sup_h = sup_dh = 0.0
    for t in np.linspace(0, 1, n_times):
        sup_h = max(sup_h, float(np.abs(sys.H(t, grid)).max()))
        sup_dh = max(sup_dh, float(np.linalg.norm(sys.H.grad(t, grid), axis=1).max()))
    return sup_h + sup_dh


def smallness_bound(surface, c: float) -> float:
    """Default gate ``N / (8 area c)`` on ``||H||_{C^1}``, ``N`` the number of boundary circles."""
    return surface.n_boundary / (8 * surface.area * c)


def verify_fixed_point_inequality(sys: HamiltonianSystem, c: float = 0.5, quad_tol: float = 1e-8,
                                  bound: float | None = None) -> dict:
    """Check ``a(z) + c a(z)^2 <= Cal / (2 area)`` at the minimal-action fixed point."""
    if c <= 0:
        raise ValueError("c must be positive")
    bound = smallness_bound(sys.surface, c) if bound is None else bound
    norm = c1_norm(sys)
    if norm >= bound:
        raise NotSmallEnough(f"||H||_C1 = {norm:.4g} >= {bound:.4g}")
    cal_a, cal_h = calabi(sys, quad_tol)
    if cal_h > quad_tol:
        raise PositiveCalabi(f"Cal = {cal_h:.3e} > 0")
    fp = min_action_fixed_point(sys)
    a = fp.action
    lhs = a + c * a * a
    normalized = cal_h / sys.surface.area
    rhs = 0.5 * normalized
    trivial = _is_trivial(sys)
    return {
        "calabi": cal_h,
        "calabi_via_action": cal_a,
        "normalized_calabi": normalized,
        "fixed_point": [float(v) for v in fp.point],
        "action": a,
        "contractible": fp.contractible,
        "lhs": lhs,
        "rhs": rhs,
        "margin": lhs - rhs,
        "tolerance": quad_tol,
        "pass": bool(lhs <= rhs + quad_tol),
        "strict": bool(lhs < rhs - quad_tol) if not trivial else False,
        "identity": trivial,
        "c1_norm": norm,
        "smallness_bound": bound,
    }
