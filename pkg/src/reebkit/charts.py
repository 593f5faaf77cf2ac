"""Coordinate models of contact forms.

A chart stores the coefficient vector ``a(x)`` of ``lambda = sum a_i dx_i``
and its Jacobian ``A[i, j] = d a_i / d x_j``, both vectorised over a batch
of points of shape ``(m, n)``.

* :class:`EllipsoidChart` -- boundary of E(p, q) in C^2 = R^4 with
  coordinates ``(x1, y1, x2, y2)`` and constraint
  ``|z1|^2/p + |z2|^2/q = 1/pi``.
* :class:`SeifertTorusChart` -- the local model around a singular fiber of
  multiplicity ``alpha1``; coordinates ``(x, y, s)``, ``s`` mod 1.
* :class:`StandardDiskChart` -- ``ds + (x dy - y dx)/2`` on ``D_rho x S^1``.
* :class:`ConformalChart` -- ``(1 + eps f) lambda_base``.

Solid-torus charts always work in Cartesian ``(x, y, s)`` so the core
orbit ``r = 0`` is a regular point of the coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FactorNotPositive


def _batch(X):
    X = np.asarray(X, dtype=float)
    return X[None, :] if X.ndim == 1 else X


class ContactChart:
    kind = "abstract"
    dim = 3
    constrained = False
    periodic_index = None  # coordinate that lives on R/Z

    def coeffs(self, X):
        raise NotImplementedError

    def jac(self, X):
        raise NotImplementedError

    def in_domain(self, X):
        return np.ones(_batch(X).shape[0], dtype=bool)

    def project(self, X):
        return X

    def describe(self) -> dict:
        return {"kind": self.kind}


class EllipsoidChart(ContactChart):
    """Restriction of the Liouville form ``(x dy - y dx)/2`` to the boundary of E(p, q)."""

    kind = "ellipsoid"
    dim = 4
    constrained = True

    def __init__(self, p, q):
        self.p = float(p)
        self.q = float(q)
        self._w = np.array([1 / self.p, 1 / self.p, 1 / self.q, 1 / self.q])
        J = np.zeros((4, 4))
        J[0, 1], J[1, 0], J[2, 3], J[3, 2] = -0.5, 0.5, -0.5, 0.5
        self._A = J

    def coeffs(self, X):
        X = _batch(X)
        return 0.5 * np.stack([-X[:, 1], X[:, 0], -X[:, 3], X[:, 2]], axis=1)

    def jac(self, X):
        X = _batch(X)
        return np.broadcast_to(self._A, (X.shape[0], 4, 4)).copy()

    def constraint(self, X):
        X = _batch(X)
        return (X ** 2) @ self._w - 1 / np.pi

    def constraint_grad(self, X):
        return 2 * _batch(X) * self._w

    def project(self, X, iters=3):
        """Pull points back onto the ellipsoid along the constraint gradient."""
        X = np.array(_batch(X), dtype=float)
        for _ in range(iters):
            F = self.constraint(X)
            G = self.constraint_grad(X)
            X -= (F / np.einsum("ij,ij->i", G, G))[:, None] * G
        return X

    def point(self, psi, theta1, theta2):
        """Point with ``|z1| = sqrt(p/pi) sin(psi)`` and ``|z2| = sqrt(q/pi) cos(psi)``."""
        psi, theta1, theta2 = np.broadcast_arrays(*(np.asarray(v, float) for v in (psi, theta1, theta2)))
        r1 = np.sqrt(self.p / np.pi) * np.sin(psi)
        r2 = np.sqrt(self.q / np.pi) * np.cos(psi)
        return np.stack([r1 * np.cos(theta1), r1 * np.sin(theta1),
                         r2 * np.cos(theta2), r2 * np.sin(theta2)], axis=-1)

    def exact_flow(self, X, t):
        """Closed-form Reeb flow of the unperturbed ellipsoid: ``z_j -> exp(2 pi i t / T_j) z_j``."""
        X = _batch(X)
        t = np.asarray(t, dtype=float).reshape(-1, 1)
        a1, a2 = 2 * np.pi * t / self.p, 2 * np.pi * t / self.q
        c1, s1, c2, s2 = np.cos(a1), np.sin(a1), np.cos(a2), np.sin(a2)
        x1, y1, x2, y2 = X[:, 0:1], X[:, 1:2], X[:, 2:3], X[:, 3:4]
        out = np.stack([c1 * x1 - s1 * y1, s1 * x1 + c1 * y1,
                        c2 * x2 - s2 * y2, s2 * x2 + c2 * y2], axis=-1)
        return out

    def describe(self):
        return {"kind": self.kind, "p": self.p, "q": self.q}


class _TorusBase(ContactChart):
    dim = 3
    periodic_index = 2

    def __init__(self, rho):
        self.rho = float(rho)

    def in_domain(self, X):
        X = _batch(X)
        return X[:, 0] ** 2 + X[:, 1] ** 2 < self.rho ** 2 * (1 + 1e-9)


class StandardDiskChart(_TorusBase):
    """``ds + (x dy - y dx)/2`` on ``D_rho x R/Z``; Reeb field ``d/ds``, volume ``pi rho^2``."""

    kind = "disk"

    def coeffs(self, X):
        X = _batch(X)
        return np.stack([-0.5 * X[:, 1], 0.5 * X[:, 0], np.ones(X.shape[0])], axis=1)

    def jac(self, X):
        X = _batch(X)
        A = np.zeros((X.shape[0], 3, 3))
        A[:, 0, 1] = -0.5
        A[:, 1, 0] = 0.5
        return A

    def describe(self):
        return {"kind": self.kind, "rho": self.rho}


class SeifertTorusChart(_TorusBase):
    """Local model ``((x dy - y dx) + (1 + 2 pi (alpha'/alpha1) r^2) ds) / alpha1``.

    Its Reeb field is ``-2 pi alpha' d/dtheta + alpha1 d/ds``: the core is a
    closed orbit of period ``1/alpha1`` and all other orbits have period 1.
    """

    kind = "solid_torus"

    def __init__(self, alpha1, alpha_prime, rho=1.0):
        super().__init__(rho)
        self.alpha1 = int(alpha1)
        self.alpha_prime = int(alpha_prime)

    def coeffs(self, X):
        X = _batch(X)
        a1, k = self.alpha1, 2 * np.pi * self.alpha_prime / self.alpha1
        r2 = X[:, 0] ** 2 + X[:, 1] ** 2
        return np.stack([-X[:, 1], X[:, 0], 1 + k * r2], axis=1) / a1

    def jac(self, X):
        X = _batch(X)
        a1, k = self.alpha1, 2 * np.pi * self.alpha_prime / self.alpha1
        A = np.zeros((X.shape[0], 3, 3))
        A[:, 0, 1] = -1.0
        A[:, 1, 0] = 1.0
        A[:, 2, 0] = 2 * k * X[:, 0]
        A[:, 2, 1] = 2 * k * X[:, 1]
        return A / a1

    def describe(self):
        return {"kind": self.kind, "alpha1": self.alpha1, "alpha_prime": self.alpha_prime, "rho": self.rho}


class Factor:
    """A smooth function on chart coordinates given by value and gradient evaluators."""

    def __init__(self, value, grad, name="custom"):
        self._value = value
        self._grad = grad
        self.name = name

    def __call__(self, X):
        return self._value(_batch(X))

    def grad(self, X):
        return self._grad(_batch(X))


def constant_factor(c, dim):
    return Factor(lambda X: np.full(X.shape[0], float(c)),
                  lambda X: np.zeros((X.shape[0], dim)), name=f"const({c})")


class PolynomialFactor(Factor):
    """``f(x) = sum_k c_k prod_i x_i^{e_ki}`` with integer exponent rows ``e_k``."""

    def __init__(self, exponents, coefficients):
        self.exponents = np.asarray(exponents, dtype=int)
        self.coefficients = np.asarray(coefficients, dtype=float)
        super().__init__(self._eval, self._eval_grad, name="polynomial")

    def _eval(self, X):
        return np.prod(X[:, None, :] ** self.exponents[None], axis=2) @ self.coefficients

    def _eval_grad(self, X):
        E = self.exponents
        out = np.zeros_like(X)
        for i in range(X.shape[1]):
            Ei = E.copy()
            Ei[:, i] = np.maximum(Ei[:, i] - 1, 0)
            mono = np.prod(X[:, None, :] ** Ei[None], axis=2)
            out[:, i] = mono @ (self.coefficients * E[:, i])
        return out

    @classmethod
    def random(cls, rng, dim=4, degree=2, scale=1.0):
        exps = [e for e in np.ndindex(*(degree + 1,) * dim) if 0 < sum(e) <= degree]
        coefs = rng.uniform(-scale, scale, size=len(exps))
        return cls(exps, coefs)


@dataclass(frozen=True)
class BumpSpec:
    """Radial profile ``chi(r) = -c_minus + (c_plus + c_minus) S(r^2/rho^2)``, ``S(v) = 1 - (1-v)^3``.

    ``chi`` equals ``c_plus`` with vanishing first and second derivatives at
    ``r = rho``, so ``1 + eps chi`` glues to the constant factor
    ``1 + eps c_plus`` on the rest of the manifold.  ``c_minus`` is fixed by
    the zero-mean condition ``int chi dvol + c_plus * outer_volume = 0``.
    """

    eps: float
    c_plus: float
    rho: float
    outer_volume: float = 0.0

    @property
    def disk_volume(self):
        return np.pi * self.rho ** 2

    @property
    def total_volume(self):
        return self.disk_volume + self.outer_volume

    @property
    def c_minus(self):
        d = self.disk_volume
        return self.c_plus * (4 * self.total_volume - d) / d

    def chi_of_v(self, v):
        v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        return -self.c_minus + (self.c_plus + self.c_minus) * (1 - (1 - v) ** 3)

    def dchi_dv(self, v):
        v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        return 3 * (self.c_plus + self.c_minus) * (1 - v) ** 2

    def chi(self, r):
        return self.chi_of_v(np.asarray(r, float) ** 2 / self.rho ** 2)

    def dchi(self, r):
        r = np.asarray(r, float)
        return self.dchi_dv(r ** 2 / self.rho ** 2) * 2 * r / self.rho ** 2

    def mean_integral(self):
        """``int chi dvol + c_plus * outer_volume``; zero up to rounding."""
        inner = self.disk_volume * (0.75 * self.c_plus - 0.25 * self.c_minus)
        return inner + self.c_plus * self.outer_volume

    def square_integral(self):
        """``c = int h^2 dvol`` over the whole manifold: the coefficient of ``eps^2`` in the volume."""
        cp, cm = self.c_plus, self.c_minus
        # int_0^1 chi(v)^2 dv with chi = -cm + s S(v), s = cp + cm
        s = cp + cm
        # with u = 1 - v: int S = int (1 - u^3) = 3/4, int S^2 = int (1 - u^3)^2 = 1 - 1/2 + 1/7
        int_S, int_S2 = 0.75, 1 - 0.5 + 1 / 7
        inner = cm ** 2 - 2 * cm * s * int_S + s ** 2 * int_S2
        return self.disk_volume * inner + cp ** 2 * self.outer_volume

    def max_winding(self):
        """Upper bound for the turns per return of any orbit in the disk."""
        return 3 * self.eps * (self.c_plus + self.c_minus) / self.disk_volume

    def admissible(self):
        e = self.eps
        return (1 - e * self.c_minus > 0 and self.max_winding() < 1
                and 2 * (1 - e * self.c_minus) > 1 + e * self.c_plus)

    def factor(self):
        def value(X):
            return self.chi(np.hypot(X[:, 0], X[:, 1]))

        def grad(X):
            v = (X[:, 0] ** 2 + X[:, 1] ** 2) / self.rho ** 2
            d = self.dchi_dv(v) * 2 / self.rho ** 2
            return np.stack([d * X[:, 0], d * X[:, 1], np.zeros(X.shape[0])], axis=1)

        return Factor(value, grad, name="smoothstep")

    def return_time(self, r):
        """Exact first-return time ``g^2 / (g + g' r / 2)`` of the circle of radius ``r``."""
        r = np.asarray(r, float)
        g = 1 + self.eps * self.chi(r)
        gp_r = self.eps * self.dchi_dv(r ** 2 / self.rho ** 2) * 2 * r ** 2 / self.rho ** 2
        return g ** 2 / (g + gp_r / 2)

    def winding_per_return(self, r):
        """Exact turns per return (clockwise) of the circle of radius ``r > 0``."""
        r = np.asarray(r, float)
        g = 1 + self.eps * self.chi(r)
        dchi_over_r = self.dchi_dv(r ** 2 / self.rho ** 2) * 2 / self.rho ** 2
        return self.eps * dchi_over_r / (2 * np.pi) * self.return_time(r) / g ** 2


class ConformalChart(ContactChart):
    """``(1 + eps f) lambda_base``; coefficient derivatives by the product rule."""

    kind = "conformal"

    def __init__(self, base: ContactChart, eps: float, factor: Factor):
        self.base = base
        self.eps = float(eps)
        self.factor = factor
        self.dim = base.dim
        self.constrained = base.constrained
        self.periodic_index = base.periodic_index
        if hasattr(base, "rho"):
            self.rho = base.rho

    def g(self, X):
        return 1 + self.eps * self.factor(X)

    def coeffs(self, X):
        X = _batch(X)
        return self.g(X)[:, None] * self.base.coeffs(X)

    def jac(self, X):
        X = _batch(X)
        a0 = self.base.coeffs(X)
        return (self.g(X)[:, None, None] * self.base.jac(X)
                + self.eps * a0[:, :, None] * self.factor.grad(X)[:, None, :])

    def in_domain(self, X):
        return self.base.in_domain(X)

    def project(self, X):
        return self.base.project(X)

    def __getattr__(self, name):
        # constraint, constraint_grad, point, ... come from the base chart
        if name in ("base", "factor", "eps"):
            raise AttributeError(name)
        return getattr(self.base, name)

    def describe(self):
        return {"kind": self.kind, "eps": self.eps, "factor": self.factor.name, "base": self.base.describe()}


def perturb_conformal(base: ContactChart, eps: float, f: Factor, check_points=None) -> ContactChart:
    """Chart of ``(1 + eps f) lambda_base``; ``eps = 0`` returns ``base`` itself.

    ``check_points`` (an ``(m, n)`` array) is used to verify ``1 + eps f > 0``;
    :class:`FactorNotPositive` is raised otherwise.
    """
    if eps == 0:
        return base
    chart = ConformalChart(base, eps, f)
    if check_points is not None:
        g = chart.g(np.asarray(check_points, float))
        if np.any(g <= 0):
            raise FactorNotPositive(f"1 + eps f reaches {g.min():.3e} <= 0")
    return chart


def bump_chart(spec: BumpSpec) -> ContactChart:
    """Standard disk model perturbed by the radial bump ``1 + eps chi``."""
    base = StandardDiskChart(spec.rho)
    if 1 - spec.eps * spec.c_minus <= 0:
        raise FactorNotPositive(f"1 - eps c_minus = {1 - spec.eps * spec.c_minus} <= 0")
    chart = ConformalChart(base, spec.eps, spec.factor())
    chart.bump = spec
    return chart
