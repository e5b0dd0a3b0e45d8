"""Independent x-frame shooting for ``-u'' - x**alpha u + q u = E u``.

This path never uses the Liouville map or Prüfer variables, so it can
cross-check them.  The solution vector is rescaled whenever its norm
exceeds ``e**10``; the accumulated log-scale is kept per node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ArgumentError, IntegrationError
from .prufer import DEFAULT_TOL, reconstruct_phi, solve
from .transform import (X_FRAME, XI_FRAME, GridFunction, MappedPotential,
                        PiecewisePotential, StarkFrame, V_from_q, read_table,
                        write_table, x_of_xi, xi_of_x)

RENORM = math.exp(10.0)
MAX_SEGMENT = 25.0


@dataclass(frozen=True, eq=False)
class ShootingSolution:
    """Samples of ``(u, u')`` with ``true u = u * exp(log_scale)``."""

    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    log_scale: np.ndarray
    energy: float
    theta_bc: float
    alpha: float = 1.0

    def true_values(self):
        s = np.exp(self.log_scale)
        return self.u * s, self.du * s

    def residual(self, q=None) -> float:
        """Max mismatch of ``u'`` against a finite difference of ``u`` (spot check)."""
        u, du = self.true_values()
        mid = 0.5 * (du[1:] + du[:-1])
        fd = np.diff(u) / np.diff(self.x)
        scale = np.maximum(np.hypot(u[1:], du[1:]), 1e-300)
        return float(np.max(np.abs(fd - mid) / scale))

    def save(self, path):
        data = np.column_stack([self.x, self.u, self.du, self.log_scale])
        return write_table(path, data, f"E={self.energy!r} alpha={self.alpha!r} "
                           f"theta_bc={self.theta_bc!r} columns=x,u,du,log_scale")

    @classmethod
    def load(cls, path):
        meta, d = read_table(path)
        return cls(d[:, 0], d[:, 1], d[:, 2], d[:, 3],
                   float(meta.get("E", 0.0)), float(meta.get("theta_bc", 0.0)),
                   float(meta.get("alpha", 1.0)))


def _potential_x(q, frame: StarkFrame):
    """Normalize ``q`` to ``(kind, object, breakpoints in x)``."""
    if q is None:
        return "zero", None, np.zeros(0)
    if isinstance(q, MappedPotential):
        q = q.source
    if isinstance(q, GridFunction):
        if q.frame == X_FRAME:
            return "xgrid", q, q.grid
        q = q.to_piecewise()
    if isinstance(q, PiecewisePotential):
        if q.frame != XI_FRAME:
            raise ArgumentError("segment potentials must be in the xi-frame")
        return "segments", q, x_of_xi(q.knots, frame)
    if callable(q):
        return "callable", q, np.asarray(getattr(q, "breakpoints", []), float)
    raise ArgumentError("unsupported potential type")


def _segment_fn(kind, q, frame: StarkFrame, a: float, b: float):
    """Scalar ``q(x)`` valid on the open segment ``(a, b)``."""
    if kind == "zero":
        return lambda x: 0.0
    mid = 0.5 * (a + b)
    if kind == "xgrid":
        g, v = q.grid, q.values
        if mid < g[0] or mid > g[-1]:
            raise ArgumentError("potential grid does not cover the range")
        k = min(max(int(np.searchsorted(g, mid, side="right")) - 1, 0),
                g.size - 2)
        if q.interp == "piecewise-linear":
            x0, y0 = g[k], v[k]
            sl = (v[k + 1] - v[k]) / (g[k + 1] - g[k])
            return lambda x: y0 + sl * (x - x0)
        c = float(v[k])
        return lambda x: c
    if kind == "segments":
        kk = 1.0 + frame.alpha / 2.0
        xi_mid = mid ** kk / kk
        k = int(np.searchsorted(q.knots, xi_mid, side="right")) - 1
        if k < 0 or k >= q.knots.size - 1:
            return lambda x: 0.0
        ca, cb, cc, cs = (float(q.a[k]), float(q.b[k]), float(q.c[k]),
                          float(q.s[k]))
        cpa, pe = frame.c_pow_alpha, frame.weight_exponent

        def f(x):
            xi = x ** kk / kk
            v = ca + cb * xi + (cc / (xi - cs) if cc != 0.0 else 0.0)
            return cpa * xi ** pe * v
        return f
    lo, hi = a + 1e-13 * (1 + a), b - 1e-13 * (1 + b)
    return lambda x: float(q(min(max(x, lo), hi)))


def shoot(q, E: float, frame: StarkFrame, x0: float, x1: float,
          theta_bc: float, tol: float = 1e-11, *, x_eval=None,
          initial=None) -> ShootingSolution:
    """Integrate ``u'' = (q - x**alpha - E) u`` from ``x0`` to ``x1``.

    Initial data ``(u, u') = (cos theta_bc, sin theta_bc)`` unless
    ``initial`` gives ``(u, u')``.  Output is at ``x_eval`` when given,
    otherwise at the solver's own steps.  ``q`` may be ``None``, an x-frame
    GridFunction, a xi-frame GridFunction or PiecewisePotential (mapped
    exactly), or any callable with an optional ``breakpoints`` attribute.
    The range is cut at every breakpoint, so jumps are never straddled.
    """
    if not (0 <= x0 < x1):
        raise ArgumentError("need 0 <= x0 < x1")
    kind, qo, bps = _potential_x(q, frame)
    alpha = frame.alpha
    bps = bps[(bps > x0) & (bps < x1)]
    n_fill = int(math.ceil((x1 - x0) / MAX_SEGMENT))
    cuts = np.unique(np.concatenate([[x0, x1], bps,
                                     np.linspace(x0, x1, n_fill + 1)]))
    if x_eval is not None:
        x_eval = np.asarray(x_eval, dtype=float)
        if np.any(x_eval < x0) or np.any(x_eval > x1):
            raise ArgumentError("x_eval outside [x0, x1]")
    y = (np.array([math.cos(theta_bc), math.sin(theta_bc)]) if initial is None
         else np.asarray(initial, dtype=float).copy())

    def coeff(a, b):
        qf = _segment_fn(kind, qo, frame, a, b)
        return lambda x: qf(x) - x ** alpha - E

    return _run_segments(coeff, cuts, y, tol, x_eval, float(E),
                         float(theta_bc), alpha)


def _run_segments(coeff, cuts, y, tol, x_eval, E=0.0, theta_bc=0.0,
                  alpha=1.0) -> ShootingSolution:
    """Renormalized DOP853 integration of ``y'' = coeff(x) y`` over ``cuts``."""
    log_scale = 0.0
    X, U, D, L = [[cuts[0]]], [[y[0]]], [[y[1]]], [[0.0]]
    if x_eval is not None:
        X, U, D, L = [], [], [], []
    last = -math.inf
    for a, b in zip(cuts[:-1], cuts[1:]):
        cf = coeff(a, b)
        sol = solve_ivp(lambda x, yy: (yy[1], cf(x) * yy[0]), (a, b), y,
                        method="DOP853", rtol=tol,
                        atol=tol * 1e-3 * float(np.abs(y).max()),
                        dense_output=x_eval is not None)
        if not sol.success or not np.all(np.isfinite(sol.y)):
            raise IntegrationError(f"shooting failed on [{a}, {b}]: "
                                   f"{sol.message}")
        if x_eval is not None:
            m = (x_eval >= a) & (x_eval <= b) & (x_eval > last)
            if m.any():
                yy = sol.sol(x_eval[m])
                X.append(x_eval[m])
                U.append(yy[0])
                D.append(yy[1])
                L.append(np.full(int(m.sum()), log_scale))
                last = x_eval[m][-1]
        else:
            X.append(sol.t[1:])
            U.append(sol.y[0, 1:])
            D.append(sol.y[1, 1:])
            L.append(np.full(sol.t.size - 1, log_scale))
        y = sol.y[:, -1].copy()
        nrm = float(np.hypot(y[0], y[1]))
        if nrm > RENORM or (0 < nrm < 1.0 / RENORM):
            y /= nrm
            log_scale += math.log(nrm)
        if not math.isfinite(log_scale) or nrm == 0:
            raise IntegrationError("overflow despite renormalization")
    cat = np.concatenate
    return ShootingSolution(cat(X), cat(U), cat(D), cat(L), E, theta_bc,
                            alpha)


def liouville_data(x, u, du, frame: StarkFrame):
    """``(phi, dphi/dxi)`` from ``(u, du/dx)`` via ``phi = x**(alpha/4) u``."""
    a = frame.alpha
    x = np.asarray(x, dtype=float)
    phi = x ** (a / 4) * u
    dphi = x ** (-a / 2) * ((a / 4) * x ** (a / 4 - 1) * u + x ** (a / 4) * du)
    return phi, dphi


def x_frame_data(xi, phi, dphi, frame: StarkFrame):
    """Inverse of :func:`liouville_data`."""
    a = frame.alpha
    x = x_of_xi(np.asarray(xi, dtype=float), frame)
    u = phi * x ** (-a / 4)
    du = (dphi * x ** (a / 2) - (a / 4) * x ** (a / 4 - 1) * u) * x ** (-a / 4)
    return x, u, du


def _xi_potential(q, frame: StarkFrame):
    if q is None:
        return None
    if isinstance(q, MappedPotential):
        return q.source
    if isinstance(q, GridFunction) and q.frame == X_FRAME:
        return V_from_q(q, frame)
    if isinstance(q, (GridFunction, PiecewisePotential)):
        return q
    raise ArgumentError("cross_validate needs a tabulated potential")


def cross_validate(q, E: float, frame: StarkFrame, xi_range, theta_bc: float,
                   *, tol: float = 1e-12, prufer_tol: float = 1e-12,
                   modified: bool | None = None, max_points: int = 20000,
                   return_details: bool = False):
    """Sup deviation between the oracle and the Prüfer pipeline.

    The oracle solution, started at ``x(xi_range[0])`` with angle
    ``theta_bc``, is mapped to ``phi`` and compared with
    ``reconstruct_phi`` after matching the two at one node.  The deviation
    at each node is measured relative to the local amplitude ``R`` (a plain
    relative error is meaningless at the zeros of ``phi``).

    An x-frame GridFunction is converted node-wise to the xi-frame and both
    pipelines then use that same function.
    """
    lo, hi = map(float, xi_range)
    V = _xi_potential(q, frame)
    mod = (frame.alpha != 1.0) if modified is None else modified
    x0 = x_of_xi(lo, frame)
    phi0, dphi0 = liouville_data(x0, math.cos(theta_bc), math.sin(theta_bc),
                                 frame)
    s0 = 1.0
    if mod:
        s0 = math.sqrt(1.0 + E / (frame.c_pow_alpha * lo ** frame.weight_exponent))
    th0 = math.atan2(s0 * phi0, dphi0)
    lr0 = math.log(math.hypot(s0 * phi0, dphi0))
    traj = solve(frame, [E], th0, lr0, lo, hi, prufer_tol, V=V,
                 modified=mod)[0]
    phi_p = reconstruct_phi(traj).values
    amp = np.exp(traj.logR) / traj.frame_factor()
    pick = np.unique(np.linspace(0, len(traj) - 1,
                                 min(max_points, len(traj))).astype(int))
    xi_k = traj.xi[pick]
    x_k = x_of_xi(xi_k, frame)
    x_k[0] = x0
    sol = shoot(V, E, frame, x0, float(x_k[-1]),
                theta_bc, tol, x_eval=x_k)
    u, du = sol.true_values()
    phi_o, _ = liouville_data(sol.x, u, du, frame)
    phi_p, amp = phi_p[pick], amp[pick]
    # single-point normalization; skip nodes where phi is small
    ok = np.abs(phi_p) >= 0.1 * amp
    j = int(np.argmax(ok)) if ok.any() else 0
    scale = phi_p[j] / phi_o[j]
    dev = np.abs(phi_p - scale * phi_o) / amp
    out = float(dev.max())
    if return_details:
        return out, {"xi": xi_k, "deviation": dev, "scale": scale,
                     "norm_index": j}
    return out


def negative_tail_solution(qtilde, M: float, x_start: float,
                           x_end: float | None = None, *, tol: float = 1e-11,
                           retries: int = 3, n_out: int = 2001
                           ) -> GridFunction:
    """Decaying solution of ``-y'' + qtilde y = 0`` as ``x -> -inf``.

    The solution is integrated from a far point ``x_far < x_end`` toward
    ``x_start`` (increasing x), where the wanted mode dominates.  The
    returned GridFunction holds ``y`` normalized to 1 at ``x_start`` on
    ``[x_end, x_start]``; its ``log_slope`` attribute holds ``y'/y``.
    Contamination (the log-slope falling below ``M`` on the returned range)
    triggers a restart from twice the distance, up to ``retries`` times.
    """
    if x_start >= 0:
        raise ArgumentError("x_start must be negative")
    x_end = 5.0 * x_start if x_end is None else float(x_end)
    if not x_end < x_start:
        raise ArgumentError("need x_end < x_start")
    buffer = max(10.0, 0.25 * abs(x_end))
    xs = np.linspace(x_end, x_start, n_out)
    for attempt in range(retries + 1):
        x_far = x_end - buffer
        k = math.sqrt(max(float(qtilde(x_far)), 0.0))
        sol = _shoot_plain(qtilde, x_far, x_start, np.array([1.0, k]), tol, xs)
        slope = sol.du / sol.u
        if np.all(np.isfinite(slope)) and np.all(slope >= M):
            y = sol.u * np.exp(sol.log_scale - sol.log_scale[-1]) / sol.u[-1]
            out = GridFunction(xs, y, frame=X_FRAME)
            object.__setattr__(out, "log_slope", slope)
            object.__setattr__(out, "attempts", attempt + 1)
            return out
        buffer *= 2.0
    raise IntegrationError("decaying mode not isolated within retry budget")


def _shoot_plain(qtilde, x0, x1, y0, tol, x_eval):
    """Renormalized integration of ``y'' = qtilde y`` on ``[x0, x1]``."""
    cuts = np.linspace(x0, x1, int(math.ceil((x1 - x0) / 5.0)) + 1)
    return _run_segments(lambda a, b: (lambda x: float(qtilde(x))), cuts,
                         np.asarray(y0, dtype=float).copy(), tol, x_eval)


def tail_potential(alpha: float = 1.0):
    """The concrete extension ``v(x) = |x|**alpha`` used for ``x < 0``."""
    return lambda x: abs(x) ** alpha


def boundary_angle(E: float, frame: StarkFrame, *, x_far: float = -60.0,
                   tol: float = 1e-11) -> float:
    """Angle ``theta_E`` with ``tan theta_E = u'(0)/u(0)`` of the solution
    decaying at ``-inf`` for ``-u'' + (|x|**alpha - E) u = 0`` on ``x < 0``.
    Returned in ``[0, pi)``.
    """
    v = tail_potential(frame.alpha)
    qt = lambda x: v(x) - E  # noqa: E731
    if qt(x_far) <= 1.0:
        raise ArgumentError("x_far not deep enough in the forbidden region")
    y0 = np.array([1.0, math.sqrt(qt(x_far))])
    sol = _shoot_plain(qt, x_far, 0.0, y0, tol, np.array([0.0]))
    th = math.atan2(sol.du[-1], sol.u[-1])
    return th % math.pi


__all__ = ["ShootingSolution", "shoot", "cross_validate",
           "negative_tail_solution", "boundary_angle", "liouville_data",
           "x_frame_data", "tail_potential"]
