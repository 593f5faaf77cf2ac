"""Batched Dormand-Prince 5(4) integrator with optional manifold projection.

All trajectories in a batch share one step size, which keeps the stepping
deterministic and lets a whole grid of initial conditions be advanced with
vectorised right-hand sides.
"""

import numpy as np

from .errors import LeftChartDomain, StepSizeUnderflow

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B4


class RKResult:
    __slots__ = ("t", "y", "steps", "rejected", "max_error")

    def __init__(self, t, y, steps, rejected, max_error):
        self.t = t
        self.y = y
        self.steps = steps
        self.rejected = rejected
        self.max_error = max_error


def dopri(f, t0, t1, y0, tol=1e-10, h0=None, max_steps=200000, project=None,
          in_domain=None, keep=True, hmin_rel=1e-14):
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t1``.

    ``y0`` has shape ``(n,)`` or ``(batch, n)``.  The local error of every
    accepted step satisfies ``|err| <= tol * (1 + |y|)`` componentwise.
    ``project`` (if given) maps states back onto a constraint manifold after
    each accepted step; ``in_domain`` returns a boolean mask and a ``False``
    entry raises :class:`LeftChartDomain`.

    Returns an :class:`RKResult`; with ``keep=True`` it carries every
    accepted state, otherwise only the endpoints.
    """
    y = np.array(y0, dtype=float)
    squeeze = y.ndim == 1
    if squeeze:
        y = y[None, :]
    span = float(t1) - float(t0)
    ts, ys = [float(t0)], [y.copy()]
    if span == 0.0:
        return _finish(ts, ys, 0, 0, 0.0, squeeze)
    direction = np.sign(span)
    t = float(t0)
    k = np.empty((7,) + y.shape)
    k[0] = f(t, y)
    if h0 is None:
        scale = tol * (1.0 + np.abs(y))
        d0 = np.max(np.abs(y) / scale)
        d1 = np.max(np.abs(k[0]) / scale)
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, abs(span))
    else:
        h = min(abs(h0), abs(span))
    hmin = hmin_rel * max(1.0, abs(span))
    steps = rejected = 0
    max_err = 0.0
    while direction * (float(t1) - t) > 0:
        if steps + rejected > max_steps:
            raise StepSizeUnderflow(f"exceeded {max_steps} steps at t={t}")
        last = h >= abs(float(t1) - t) * (1 - 1e-13)
        if last:
            h = abs(float(t1) - t)
        hs = direction * h
        for i in range(1, 7):
            yi = y + hs * np.tensordot(_A[i], k[:i], axes=1)
            k[i] = f(t + _C[i] * hs, yi)
        y_new = y + hs * np.tensordot(_B, k, axes=1)
        err_vec = hs * np.tensordot(_E, k, axes=1)
        scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        err = float(np.max(np.abs(err_vec) / scale))
        if not np.isfinite(err):
            err = np.inf
        if err <= 1.0:
            t = float(t1) if last else t + hs
            if project is not None:
                y_new = project(y_new)
            if in_domain is not None:
                ok = np.asarray(in_domain(y_new))
                if not np.all(ok):
                    bad = int(np.flatnonzero(~ok)[0])
                    raise LeftChartDomain(f"trajectory {bad} left the chart at t={t}")
            y = y_new
            max_err = max(max_err, err * tol)
            steps += 1
            if keep:
                ts.append(t)
                ys.append(y.copy())
            k[0] = f(t, y) if project is not None else k[6]
            fac = 0.9 * err ** -0.2 if err > 0 else 5.0
            h = h * min(5.0, max(0.2, fac))
        else:
            rejected += 1
            h = h * max(0.1, 0.9 * err ** -0.2) if np.isfinite(err) else h * 0.1
            if h < hmin:
                raise StepSizeUnderflow(f"step size {h:.3e} below {hmin:.3e} at t={t}")
    if not keep:
        ts.append(t)
        ys.append(y.copy())
    return _finish(ts, ys, steps, rejected, max_err, squeeze)


def _finish(ts, ys, steps, rejected, max_err, squeeze):
    Y = np.stack(ys)
    if squeeze:
        Y = Y[:, 0, :]
    return RKResult(np.array(ts), Y, steps, rejected, max_err)
