"""Prüfer states and trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ArgumentError
from ..transform import (CONSTANT_LEFT, LINEAR, XI_FRAME, GridFunction,
                         StarkFrame, read_table, write_table)


@dataclass(frozen=True)
class PruferState:
    xi: float
    theta: float
    logR: float

    def __post_init__(self):
        if not self.xi > 0:
            raise ArgumentError("xi must be positive")
        if not (np.isfinite(self.theta) and np.isfinite(self.logR)):
            raise ArgumentError("non-finite state")


@dataclass(frozen=True)
class ModifiedPruferState(PruferState):
    s: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if not self.s > 0:
            raise ArgumentError("frame factor s must be positive")


def frame_factor(xi, energy: float, frame: StarkFrame):
    """``s = sqrt(1 - H)`` with ``H = -E p(xi)``; NaN where undefined."""
    xi = np.asarray(xi, dtype=float)
    one_minus_h = 1.0 + energy / (frame.c_pow_alpha * xi ** frame.weight_exponent)
    with np.errstate(invalid="ignore"):
        return np.sqrt(np.where(one_minus_h > 0, one_minus_h, np.nan))


def phase_rates(xi, theta, V, energy: float, frame: StarkFrame,
                modified: bool):
    """Right-hand sides ``(dtheta/dxi, dlogR/dxi)`` evaluated pointwise."""
    xi = np.asarray(xi, dtype=float)
    sn, cs = np.sin(theta), np.cos(theta)
    pw = frame.c_pow_alpha * xi ** frame.weight_exponent
    g = frame.curvature_coefficient / xi ** 2 + V
    h = -energy / pw
    if not modified:
        q = g + h
        return 1.0 - q * sn * sn, q * sn * cs
    s2 = 1.0 - h
    s = np.sqrt(s2)
    ls = -(energy * frame.weight_exponent / (pw * xi)) / (2.0 * s2)
    return (s + ls * sn * cs - g / s * sn * sn,
            ls * sn * sn + g / s * sn * cs)


def hermite(x0, x1, y0, y1, d0, d1, pts):
    """Cubic Hermite interpolant on ``[x0, x1]`` evaluated at ``pts``."""
    h = x1 - x0
    t = (pts - x0) / h
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1)


@dataclass(frozen=True, eq=False)
class PruferTrajectory:
    """Accepted integrator nodes for one energy.

    ``v_left``/``v_right`` are the one-sided values of the potential at each
    node (they differ where the potential jumps), which makes the node
    slopes, and hence the cubic Hermite dense output, exact to the
    integrator's order on every interval.  Synthetic trajectories may
    instead pass ``slopes = (dtheta, dlogR)`` or the one-sided
    ``(dtheta_right, dtheta_left, dlogR_right, dlogR_left)``.  ``weight``
    overrides the default L^2 weight ``p(xi)`` (used by x-frame runs).
    """

    energy: float
    frame: StarkFrame
    xi: np.ndarray
    theta: np.ndarray
    logR: np.ndarray
    boundary_theta0: float
    v_left: np.ndarray | None = None
    v_right: np.ndarray | None = None
    modified: bool = False
    tol: float = 1e-9
    n_events: int = 0
    slopes: tuple | None = None
    weight: object = None

    def __post_init__(self):
        xi = np.ascontiguousarray(self.xi, dtype=float)
        if xi.size == 0:
            raise ArgumentError("empty trajectory")
        if xi.size > 1 and not np.all(np.diff(xi) > 0):
            raise ArgumentError("trajectory xi must be strictly increasing")
        for name in ("xi", "theta", "logR", "v_left", "v_right"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.ascontiguousarray(arr, dtype=float)
            if arr.shape != xi.shape:
                raise ArgumentError(f"{name} has wrong length")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.v_left is None and self.slopes is None:
            z = np.zeros_like(xi)
            object.__setattr__(self, "v_left", z)
            object.__setattr__(self, "v_right", z)

    def __len__(self):
        return self.xi.size

    def state(self, i: int) -> PruferState:
        if self.modified:
            s = float(frame_factor(self.xi[i], self.energy, self.frame))
            return ModifiedPruferState(float(self.xi[i]), float(self.theta[i]),
                                       float(self.logR[i]), s)
        return PruferState(float(self.xi[i]), float(self.theta[i]),
                           float(self.logR[i]))

    @property
    def states(self):
        return (self.state(i) for i in range(len(self)))

    @property
    def final(self) -> PruferState:
        return self.state(len(self) - 1)

    @property
    def xi_range(self) -> tuple[float, float]:
        return float(self.xi[0]), float(self.xi[-1])

    @cached_property
    def node_slopes(self):
        """``(dtheta_right, dtheta_left, dlogR_right, dlogR_left)`` at nodes."""
        if self.slopes is not None:
            arrs = [np.asarray(a, dtype=float) for a in self.slopes]
            if len(arrs) == 4:
                return tuple(arrs)
            dt, dl = arrs
            return dt, dt, dl, dl
        tr, lr = phase_rates(self.xi, self.theta, self.v_right, self.energy,
                             self.frame, self.modified)
        tl, ll = phase_rates(self.xi, self.theta, self.v_left, self.energy,
                             self.frame, self.modified)
        return tr, tl, lr, ll

    def locate(self, pts) -> np.ndarray:
        """Interval index ``i`` with ``xi[i] <= pt <= xi[i+1]``."""
        pts = np.asarray(pts, dtype=float)
        if np.any(pts < self.xi[0]) or np.any(pts > self.xi[-1]):
            raise ArgumentError("points outside the trajectory range")
        idx = np.searchsorted(self.xi, pts, side="right") - 1
        return np.clip(idx, 0, max(self.xi.size - 2, 0))

    def dense(self, pts, idx=None):
        """Cubic Hermite values ``(theta, logR)`` at arbitrary points."""
        pts = np.asarray(pts, dtype=float)
        if self.xi.size == 1:
            return (np.full(pts.shape, self.theta[0]),
                    np.full(pts.shape, self.logR[0]))
        i = self.locate(pts) if idx is None else idx
        tr, tl, lr, ll = self.node_slopes
        x0, x1 = self.xi[i], self.xi[i + 1]
        th = hermite(x0, x1, self.theta[i], self.theta[i + 1], tr[i],
                     tl[i + 1], pts)
        lg = hermite(x0, x1, self.logR[i], self.logR[i + 1], lr[i],
                     ll[i + 1], pts)
        return th, lg

    def dense_slope(self, pts, idx=None):
        """Derivative of the Hermite interpolant of theta."""
        pts = np.asarray(pts, dtype=float)
        i = self.locate(pts) if idx is None else idx
        tr, tl, _, _ = self.node_slopes
        x0, x1 = self.xi[i], self.xi[i + 1]
        h = x1 - x0
        t = (pts - x0) / h
        y0, y1 = self.theta[i], self.theta[i + 1]
        return ((6 * t * t - 6 * t) * (y0 - y1) / h
                + (3 * t * t - 4 * t + 1) * tr[i] + (3 * t * t - 2 * t) * tl[i + 1])

    def frame_factor(self, xi=None):
        xi = self.xi if xi is None else xi
        if not self.modified:
            return np.ones_like(np.asarray(xi, dtype=float))
        return frame_factor(xi, self.energy, self.frame)

    def weight_at(self, xi):
        if self.weight is not None:
            return self.weight(xi)
        from ..transform import weight_p
        return weight_p(xi, self.frame)

    def realized_V(self) -> GridFunction:
        """Right-continuous samples of the potential seen by the integrator."""
        return GridFunction(self.xi, self.v_right, interp=CONSTANT_LEFT,
                            frame=XI_FRAME, alpha=self.frame.alpha)

    def slope_fit(self, lo: float, hi: float, n: int = 2000) -> float:
        """Least-squares slope of logR against ln xi on ``[lo, hi]``."""
        pts = np.geomspace(lo, hi, n)
        _, lg = self.dense(pts)
        return float(np.polyfit(np.log(pts), lg, 1)[0])

    def header(self) -> str:
        return (f"E={self.energy!r} alpha={self.frame.alpha!r} "
                f"tol={self.tol!r} theta0={self.boundary_theta0!r} "
                f"modified={int(self.modified)}")

    def save(self, path, stride: int = 1):
        """Write columns ``xi theta logR V_left V_right`` (every ``stride``-th node)."""
        sel = np.arange(0, len(self), max(1, int(stride)))
        if sel[-1] != len(self) - 1:
            sel = np.append(sel, len(self) - 1)
        cols = [self.xi[sel], self.theta[sel], self.logR[sel]]
        if self.v_left is not None:
            cols += [self.v_left[sel], self.v_right[sel]]
        return write_table(path, np.column_stack(cols), self.header())

    @classmethod
    def load(cls, path) -> "PruferTrajectory":
        meta, data = read_table(path)
        frame = StarkFrame(float(meta.get("alpha", 1.0)))
        vl = data[:, 3] if data.shape[1] > 3 else None
        vr = data[:, 4] if data.shape[1] > 4 else None
        return cls(float(meta.get("E", 0.0)), frame, data[:, 0], data[:, 1],
                   data[:, 2], float(meta.get("theta0", data[0, 1])), vl, vr,
                   modified=bool(int(meta.get("modified", 0))),
                   tol=float(meta.get("tol", 1e-9)))


__all__ = ["PruferState", "ModifiedPruferState", "PruferTrajectory",
           "phase_rates", "frame_factor", "hermite", "LINEAR"]
