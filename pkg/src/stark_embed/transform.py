"""Liouville change of variables for the Stark-type operator.

The physical equation ``-u'' - x**alpha u + q u = E u`` on the half line is
mapped to the unit-energy problem ``-phi'' + Q(xi, E) phi = phi`` with

    xi = x**(1 + alpha/2) / (1 + alpha/2),
    x  = c_alpha * xi**(2/(2 + alpha)),
    p(xi) = 1 / (c_alpha**alpha * xi**(2 alpha/(2 + alpha))),

and ``V(xi) = p(xi) * q(x(xi))``.  Everything here is pure and immutable.
"""

from __future__ import annotations

import gzip
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, DomainError

LINEAR = "piecewise-linear"
CONSTANT_LEFT = "piecewise-constant-left"
X_FRAME = "x-frame"
XI_FRAME = "xi-frame"
_INTERPS = (LINEAR, CONSTANT_LEFT)
_FRAMES = (X_FRAME, XI_FRAME)


@dataclass(frozen=True)
class StarkFrame:
    """The unperturbed potential ``-x**alpha`` and its derived constants."""

    alpha: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ArgumentError(f"alpha must lie in (0, 2), got {self.alpha}")

    @cached_property
    def c_alpha(self) -> float:
        a = self.alpha
        return (1.0 + a / 2.0) ** (2.0 / (2.0 + a))

    @cached_property
    def c_pow_alpha(self) -> float:
        return self.c_alpha ** self.alpha

    @cached_property
    def weight_exponent(self) -> float:
        """Exponent ``2 alpha/(2 + alpha)`` of xi in ``1/p``."""
        return 2.0 * self.alpha / (2.0 + self.alpha)

    @cached_property
    def curvature_coefficient(self) -> float:
        """Coefficient of ``xi**-2`` in Q; equals -5/36 at alpha = 1."""
        a = self.alpha
        return (-1.25 * a * a + a * (a - 1.0)) / (2.0 + a) ** 2

    @cached_property
    def envelope_factor(self) -> float:
        """Ratio ``x**(1 - alpha/2) |q(x)| / (xi |V(xi)|)``, i.e. ``1 + alpha/2``."""
        return 1.0 + self.alpha / 2.0

    @cached_property
    def critical_coupling(self) -> float:
        """Threshold d for sign potentials ``-(2d/xi) sgn(sin 2 theta)``.

        ``pi (2 - alpha) / (4 (2 + alpha))``; pi/12 at alpha = 1.
        """
        a = self.alpha
        return math.pi * (2.0 - a) / (4.0 * (2.0 + a))

    @cached_property
    def critical_amplitude(self) -> float:
        """Threshold ``(2 - alpha) pi / 4`` for ``limsup x**(1-alpha/2)|q|``."""
        return (2.0 - self.alpha) * math.pi / 4.0


def xi_of_x(x, frame: StarkFrame):
    """Liouville coordinate ``int_0^x t**(alpha/2) dt``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("xi_of_x requires x >= 0")
    k = 1.0 + frame.alpha / 2.0
    out = arr ** k / k
    return float(out) if out.ndim == 0 else out


def x_of_xi(xi, frame: StarkFrame):
    """Inverse of :func:`xi_of_x`, ``c_alpha * xi**(2/(2+alpha))``."""
    arr = np.asarray(xi, dtype=float)
    if np.any(arr < 0):
        raise DomainError("x_of_xi requires xi >= 0")
    out = frame.c_alpha * arr ** (2.0 / (2.0 + frame.alpha))
    return float(out) if out.ndim == 0 else out


def weight_p(xi, frame: StarkFrame):
    """Weight ``p(xi) = 1/v(x(xi))``."""
    arr = np.asarray(xi, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("weight_p requires xi > 0")
    out = 1.0 / (frame.c_pow_alpha * arr ** frame.weight_exponent)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a real function on a strictly increasing grid.

    ``interp`` selects linear interpolation or left-continuous piecewise
    constants (value ``values[i]`` on ``[grid[i], grid[i+1])``).
    Evaluation outside ``[grid[0], grid[-1]]`` raises.
    """

    grid: np.ndarray
    values: np.ndarray
    interp: str = LINEAR
    frame: str = XI_FRAME
    alpha: float = 1.0

    def __post_init__(self):
        g = np.ascontiguousarray(self.grid, dtype=float)
        v = np.ascontiguousarray(self.values, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise ArgumentError("grid must be a non-empty 1-D array")
        if v.shape != g.shape:
            raise ArgumentError("grid and values lengths differ")
        if g.size > 1 and not np.all(np.diff(g) > 0):
            raise ArgumentError("grid must be strictly increasing")
        if self.interp not in _INTERPS:
            raise ArgumentError(f"unknown interpolation rule {self.interp!r}")
        if self.frame not in _FRAMES:
            raise ArgumentError(f"unknown frame {self.frame!r}")
        g.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.grid.size

    @property
    def breakpoints(self) -> np.ndarray:
        return self.grid

    def __call__(self, pts):
        p = np.asarray(pts, dtype=float)
        g = self.grid
        if np.any(p < g[0]) or np.any(p > g[-1]):
            raise DomainError(
                f"evaluation outside [{g[0]}, {g[-1]}] for {self.frame} grid")
        if self.interp == LINEAR:
            out = np.interp(p, g, self.values)
        else:
            idx = np.searchsorted(g, p, side="right") - 1
            out = self.values[np.clip(idx, 0, g.size - 1)]
        return float(out) if out.ndim == 0 else out

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.interp, self.frame,
                            self.alpha)

    def to_piecewise(self) -> "PiecewisePotential":
        """Exact segment form (linear or constant pieces) of this function."""
        g, v = self.grid, self.values
        if g.size < 2:
            raise ArgumentError("need at least two nodes")
        if self.interp == LINEAR:
            slope = np.diff(v) / np.diff(g)
            a = v[:-1] - slope * g[:-1]
            b = slope
        else:
            a = v[:-1].copy()
            b = np.zeros(g.size - 1)
        z = np.zeros(g.size - 1)
        return PiecewisePotential(g, a, b, z, z, frame=self.frame,
                                  alpha=self.alpha)

    def header(self) -> str:
        return f"frame={self.frame} alpha={self.alpha!r} interp={self.interp}"

    def save(self, path) -> Path:
        data = np.column_stack([self.grid, self.values])
        return write_table(path, data, self.header())

    @classmethod
    def load(cls, path) -> "GridFunction":
        meta, data = read_table(path)
        return cls(data[:, 0], data[:, 1], interp=meta.get("interp", LINEAR),
                   frame=meta.get("frame", XI_FRAME),
                   alpha=float(meta.get("alpha", 1.0)))


@dataclass(frozen=True, eq=False)
class PiecewisePotential:
    """Segments ``V = a_k + b_k xi + c_k/(xi - s_k)`` on ``[knots[k], knots[k+1])``.

    Zero outside ``[knots[0], knots[-1])``.  Sign-switching potentials
    ``-(2d/xi) sgn(...)`` are represented exactly with ``c_k = -2 d sigma_k``.
    """

    knots: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    s: np.ndarray
    frame: str = XI_FRAME
    alpha: float = 1.0

    def __post_init__(self):
        arrs = [np.ascontiguousarray(getattr(self, k), dtype=float)
                for k in ("knots", "a", "b", "c", "s")]
        knots = arrs[0]
        if knots.size < 2 or not np.all(np.diff(knots) > 0):
            raise ArgumentError("knots must be strictly increasing, >= 2")
        for name, arr in zip(("a", "b", "c", "s"), arrs[1:]):
            if arr.shape != (knots.size - 1,):
                raise ArgumentError(f"coefficient {name} has wrong length")
        for name, arr in zip(("knots", "a", "b", "c", "s"), arrs):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knots

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def tables(self):
        return self.knots, self.a, self.b, self.c, self.s

    def __call__(self, pts):
        p = np.asarray(pts, dtype=float)
        k = np.searchsorted(self.knots, p, side="right") - 1
        inside = (k >= 0) & (k < self.knots.size - 1)
        kk = np.clip(k, 0, self.knots.size - 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.a[kk] + self.b[kk] * p + np.where(
                self.c[kk] != 0.0, self.c[kk] / (p - self.s[kk]), 0.0)
        out = np.where(inside, val, 0.0)
        return float(out) if out.ndim == 0 else out

    def sample(self, grid=None) -> GridFunction:
        """Left-continuous samples on ``grid`` (default: the knots)."""
        g = self.knots if grid is None else np.asarray(grid, dtype=float)
        return GridFunction(g, self(g), interp=CONSTANT_LEFT, frame=self.frame,
                            alpha=self.alpha)

    def save(self, path) -> Path:
        data = np.column_stack([self.knots[:-1], self.knots[1:], self.a,
                                self.b, self.c, self.s])
        return write_table(path, data,
                           f"segments frame={self.frame} alpha={self.alpha!r}")

    @classmethod
    def load(cls, path) -> "PiecewisePotential":
        meta, data = read_table(path)
        data = np.atleast_2d(data)
        knots = np.append(data[:, 0], data[-1, 1])
        return cls(knots, data[:, 2], data[:, 3], data[:, 4], data[:, 5],
                   frame=meta.get("frame", XI_FRAME),
                   alpha=float(meta.get("alpha", 1.0)))


@dataclass(frozen=True, eq=False)
class MappedPotential:
    """x-frame view ``q(x) = V(xi(x)) / p(xi(x))`` of a xi-frame potential."""

    source: object
    frame_params: StarkFrame
    frame: str = field(default=X_FRAME, init=False)

    @property
    def breakpoints(self) -> np.ndarray:
        bp = getattr(self.source, "breakpoints", np.zeros(0))
        return x_of_xi(np.asarray(bp, dtype=float), self.frame_params)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        xi = xi_of_x(xa, self.frame_params)
        xi = np.asarray(xi, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.asarray(self.source(xi), dtype=float)
            out = np.where(xi > 0, v * self.frame_params.c_pow_alpha
                           * xi ** self.frame_params.weight_exponent, 0.0)
        return float(out) if out.ndim == 0 else out


def _check_grid(fn, frame_name):
    if not isinstance(fn, GridFunction):
        raise ArgumentError("expected a GridFunction")
    if fn.grid.size == 0:
        raise ArgumentError("empty grid")
    if fn.frame != frame_name:
        raise ArgumentError(f"expected a {frame_name} GridFunction, got {fn.frame}")


def q_from_V(V: GridFunction, frame: StarkFrame) -> GridFunction:
    """Map ``V(xi)`` to ``q(x) = c_alpha**alpha xi**(2a/(2+a)) V(xi)`` node by node."""
    _check_grid(V, XI_FRAME)
    xi = V.grid
    if xi[0] <= 0:
        raise DomainError("q_from_V needs a grid on xi > 0")
    q = frame.c_pow_alpha * xi ** frame.weight_exponent * V.values
    return GridFunction(x_of_xi(xi, frame), q, V.interp, X_FRAME, frame.alpha)


def V_from_q(q: GridFunction, frame: StarkFrame) -> GridFunction:
    """Inverse of :func:`q_from_V`."""
    _check_grid(q, X_FRAME)
    x = q.grid
    if x[0] <= 0:
        raise DomainError("V_from_q needs a grid on x > 0")
    xi = xi_of_x(x, frame)
    V = q.values / (frame.c_pow_alpha * xi ** frame.weight_exponent)
    return GridFunction(xi, V, q.interp, XI_FRAME, frame.alpha)


@dataclass(frozen=True, eq=False)
class EffectivePotential:
    """``Q(xi, E) = k/xi**2 - E p(xi) + V(xi)`` for one energy."""

    frame: StarkFrame
    energy: float
    V: object = None

    def curvature(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.frame.curvature_coefficient / xi ** 2

    def stark_term(self, xi):
        """``H_alpha(xi, E) = -E p(xi)``."""
        return -self.energy * weight_p(xi, self.frame)

    def perturbation(self, xi):
        if self.V is None:
            return np.zeros_like(np.asarray(xi, dtype=float))
        return np.asarray(self.V(xi), dtype=float)

    def __call__(self, xi):
        out = (self.curvature(xi) + self.stark_term(xi)
               + self.perturbation(xi))
        return float(out) if np.ndim(out) == 0 else out


def assemble_Q(V, E: float, frame: StarkFrame) -> EffectivePotential:
    """Bundle ``V`` (xi-frame or ``None`` for zero) with an energy."""
    if V is not None and getattr(V, "frame", XI_FRAME) != XI_FRAME:
        raise ArgumentError("assemble_Q expects V in the xi-frame")
    return EffectivePotential(frame, float(E), V)


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Logarithmically spaced grid on ``[lo, hi]`` with exact endpoints."""
    g = np.geomspace(lo, hi, n)
    g[0], g[-1] = lo, hi
    return g


# ---------------------------------------------------------------------------
# plain-text tables with a one-line ``# key=value`` header


def _parse_header(line: str) -> dict:
    meta = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            meta[k] = v
    return meta


def write_table(path, data: np.ndarray, header: str,
                compress_above: int = 200_000) -> Path:
    """Write columns as text; files with many rows are gzipped deterministically.

    Returns the path actually written (``.gz`` appended when compressed).
    """
    path = Path(path)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    row = " ".join(["%.17g"] * data.shape[1]) + "\n"
    # one C-level format call instead of savetxt's per-row loop
    body = (row * data.shape[0]) % tuple(data.ravel().tolist())
    lines = "".join(f"# {h}\n" for h in header.splitlines())
    payload = (lines + body).encode()
    if data.shape[0] > compress_above and path.suffix != ".gz":
        path = path.with_name(path.name + ".gz")
    if path.suffix == ".gz":
        with open(path, "wb") as raw, gzip.GzipFile(
                fileobj=raw, mode="wb", mtime=0, filename="",
                compresslevel=1) as gz:
            gz.write(payload)
    else:
        path.write_bytes(payload)
    return path


def resolve_table(path) -> Path:
    path = Path(path)
    if not path.exists():
        gz = path.with_name(path.name + ".gz")
        if gz.exists():
            return gz
    return path


def read_table(path) -> tuple[dict, np.ndarray]:
    path = resolve_table(path)
    opener: Callable = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt") as fh:
        first = fh.readline()
        meta = _parse_header(first) if first.startswith("#") else {}
        rest = fh.read()
    body = rest if first.startswith("#") else first + rest
    data = np.loadtxt(io.StringIO(body), ndmin=2)
    return meta, data


def envelope(fn: GridFunction, frame: StarkFrame) -> np.ndarray:
    """Pointwise ``x**(1 - alpha/2) |q(x)|`` of an x-frame function."""
    _check_grid(fn, X_FRAME)
    return fn.grid ** (1.0 - frame.alpha / 2.0) * np.abs(fn.values)


def as_frame(alpha: float | StarkFrame) -> StarkFrame:
    return alpha if isinstance(alpha, StarkFrame) else StarkFrame(float(alpha))


__all__: Sequence[str] = (
    "StarkFrame", "GridFunction", "PiecewisePotential", "MappedPotential",
    "EffectivePotential", "xi_of_x", "x_of_xi", "weight_p", "q_from_V",
    "V_from_q", "assemble_Q", "log_grid", "envelope", "LINEAR",
    "CONSTANT_LEFT", "X_FRAME", "XI_FRAME",
)
