"""Prüfer phase/amplitude integration in the Liouville frame.

For ``-phi'' + Q phi = phi`` write ``phi = R sin(theta)``,
``phi' = R cos(theta)``; then

    theta' = 1 - Q sin^2 theta,    (log R)' = Q sin(2 theta) / 2.

The modified form for general alpha uses ``s = sqrt(1 - H)``,
``H = -E p(xi)``, and ``phi = R sin(theta)/s``, ``phi' = R cos(theta)``.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import (ArgumentError, EventError, FrameError, IntegrationError,
                      StiffnessError)
from ..transform import (CONSTANT_LEFT, XI_FRAME, EffectivePotential,
                         GridFunction, PiecewisePotential, StarkFrame)
from . import _kernel
from .trajectory import (ModifiedPruferState, PruferState, PruferTrajectory,
                         frame_factor, hermite, phase_rates)

SIGN = "sgn"
SIN = "sin"
DEFAULT_TOL = 1e-9
H_MAX = 1.0

_STATUS_ERRORS = {
    _kernel.STATUS_NONFINITE: (IntegrationError, "non-finite right-hand side"),
    _kernel.STATUS_STEP_UNDERFLOW: (StiffnessError, "step size underflow"),
    _kernel.STATUS_FRAME: (FrameError, "1 - H <= 0: modified frame undefined"),
    _kernel.STATUS_EVENT: (EventError, "sign switch could not be localized"),
    _kernel.STATUS_MAX_STEPS: (IntegrationError, "step budget exhausted"),
}


def passive_tables(V, lo: float, hi: float):
    """Kernel tables ``(knots, a, b, c, s)`` for a xi-frame potential."""
    if V is None:
        return None
    if isinstance(V, GridFunction):
        if V.frame != XI_FRAME:
            raise ArgumentError("potential must be in the xi-frame")
        V = V.to_piecewise()
    if not isinstance(V, PiecewisePotential):
        raise ArgumentError(
            "V must be None, a GridFunction or a PiecewisePotential")
    if V.frame != XI_FRAME:
        raise ArgumentError("potential must be in the xi-frame")
    return V.tables()


def _check_range(xi0, xi1, tol):
    if not 0 < xi0 < xi1:
        raise ArgumentError(f"need 0 < xi0 < xi1, got {xi0}, {xi1}")
    if not 0 < tol <= 1e-3:
        raise ArgumentError(f"tol must lie in (0, 1e-3], got {tol}")


def solve(frame: StarkFrame, energies: Sequence[float], theta0, logR0,
          xi0: float, xi1: float, tol: float = DEFAULT_TOL, *, V=None,
          modified: bool = False, mode: int = _kernel.MODE_NONE,
          target: int = 0, d_table=None, pieces=None, stops=(),
          h_max: float = H_MAX) -> list[PruferTrajectory]:
    """Jointly integrate several energies through one (possibly active) potential.

    All returned trajectories share the same ``xi`` nodes, so quantities
    involving two energies can be evaluated without cross-interpolation.
    """
    _check_range(xi0, xi1, tol)
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    n = energies.size
    th0 = np.broadcast_to(np.asarray(theta0, dtype=float), (n,))
    lr0 = np.broadcast_to(np.asarray(logR0, dtype=float), (n,))
    y0 = np.empty(2 * n)
    y0[0::2], y0[1::2] = th0, lr0

    passive = passive_tables(V, xi0, xi1)
    knots = [np.asarray(stops, dtype=float)]
    if passive is not None:
        knots.append(passive[0])
    if d_table is not None:
        knots.append(np.asarray(d_table[0], dtype=float))
    if pieces is not None:
        knots += [np.asarray(pieces[0], dtype=float),
                  np.asarray(pieces[1], dtype=float)]
    st = np.unique(np.concatenate(knots)) if knots else np.zeros(0)
    st = st[(st > xi0 * (1 + 1e-13)) & (st < xi1 * (1 - 1e-13))]
    if st.size > 1:
        # merge knots that differ only by rounding
        st = st[np.concatenate([[True], np.diff(st) > 1e-12 * st[1:]])]

    if modified:
        s_lo = frame_factor(np.array([xi0, xi1]), energies.min(), frame)
        if np.any(np.isnan(s_lo)):
            raise FrameError(f"1 - H <= 0 at xi0 = {xi0}; start further out")

    status, nn, xs, Ys, vl, vr, nev = _kernel.run(
        y0, xi0, xi1, tol, energies, frame.curvature_coefficient,
        frame.c_pow_alpha, frame.weight_exponent, modified, stops=st,
        passive=passive, mode=mode, target=target, d_table=d_table,
        pieces=pieces, h_max=h_max)

    trajs = [PruferTrajectory(float(energies[j]), frame, xs, Ys[:, 2 * j],
                              Ys[:, 2 * j + 1], float(th0[j]), vl, vr,
                              modified=modified, tol=tol, n_events=int(nev))
             for j in range(n)]
    if status != _kernel.STATUS_OK:
        cls, msg = _STATUS_ERRORS[status]
        raise cls(f"{msg} near xi = {xs[-1]:.6g}",
                  last_state=trajs[0].final)
    return trajs


def integrate(Qeff: EffectivePotential, xi0: float, xi1: float,
              theta0: float, logR0: float = 0.0,
              tol: float = DEFAULT_TOL) -> PruferTrajectory:
    """Integrate the standard Prüfer system for one energy.

    Parameters
    ----------
    Qeff : EffectivePotential
        Frame, energy and a xi-frame potential (``None`` for zero).
    xi0, xi1 : float
        Integration range, ``0 < xi0 < xi1``.
    theta0, logR0 : float
        Initial phase and log-amplitude.
    tol : float
        Absolute local error tolerance per step.
    """
    return solve(Qeff.frame, [Qeff.energy], theta0, logR0, xi0, xi1, tol,
                 V=Qeff.V)[0]


def integrate_modified(Qparts: EffectivePotential, xi0: float, xi1: float,
                       theta0: float, logR0: float = 0.0,
                       tol: float = DEFAULT_TOL) -> PruferTrajectory:
    """Integrate the modified Prüfer system (any alpha).

    The curvature and ``s'/s`` terms are kept exactly.  Raises
    :class:`FrameError` where ``1 - H <= 0``.
    """
    return solve(Qparts.frame, [Qparts.energy], theta0, logR0, xi0, xi1, tol,
                 V=Qparts.V, modified=True)[0]


def coupling_table(coupling, xi0: float, xi1: float):
    """Normalize a coupling into a piecewise-constant ``(knots, values)`` table.

    ``coupling`` may be a number, a pair ``(knots, values)`` with
    ``len(values) == len(knots) - 1``, or a callable, which is sampled at
    the midpoints of 4096 logarithmic cells (smooth couplings only).
    """
    if np.isscalar(coupling):
        knots, vals = np.array([xi0, xi1]), np.array([float(coupling)])
    elif callable(coupling):
        knots = np.geomspace(xi0, xi1, 4097)
        vals = np.asarray(coupling(np.sqrt(knots[:-1] * knots[1:])), float)
    else:
        knots, vals = (np.asarray(a, dtype=float) for a in coupling)
    if vals.size != knots.size - 1:
        raise ArgumentError("coupling table needs len(values) == len(knots)-1")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ArgumentError("coupling must be finite and nonnegative")
    return knots, vals


def integrate_sign_coupled(E: float, coupling, frame: StarkFrame, xi0: float,
                           xi1: float, theta0: float, tol: float = DEFAULT_TOL,
                           *, mode: str = SIGN, M: float = 0.0, b: float = 0.0,
                           window: float = 0.0, passive_energies=(),
                           passive_theta0=None):
    """Solve the closed system where V is fed back from the phase.

    ``mode="sgn"``: ``V = -(2 d(xi)/xi) sgn(sin 2 theta)``, with ``coupling``
    giving ``d`` (number, table or callable).  ``mode="sin"``:
    ``V = -(4M/(1 + xi - b)) sin(2 theta) chi(xi)``, ``chi`` a smooth cutoff
    of width ``window`` at both ends (``coupling`` is ignored).

    Returns ``(trajectory, V)`` where ``V`` is the realized potential as a
    left-continuous GridFunction on the trajectory nodes.  Extra
    ``passive_energies`` are carried along through the same V; their
    trajectories are attached as ``trajectory.companions``.
    """
    energies = [float(E)] + [float(e) for e in passive_energies]
    th = [theta0] + list(passive_theta0 if passive_theta0 is not None
                         else [theta0] * len(passive_energies))
    if mode == SIGN:
        table = coupling_table(coupling, xi0, xi1)
        trajs = solve(frame, energies, th, 0.0, xi0, xi1, tol,
                      mode=_kernel.MODE_SIGN, d_table=table)
    elif mode == SIN:
        pieces = ([xi0], [xi1], [b], [0], [M], [window])
        trajs = solve(frame, energies, th, 0.0, xi0, xi1, tol,
                      mode=_kernel.MODE_SIN, pieces=pieces)
    else:
        raise ArgumentError(f"unknown mode {mode!r}")
    main = trajs[0]
    object.__setattr__(main, "companions", trajs[1:])
    return main, sign_potential_samples(main)


def sign_potential_samples(traj: PruferTrajectory) -> GridFunction:
    """Realized potential on the trajectory nodes (value to the right of each node)."""
    return GridFunction(traj.xi, traj.v_right, interp=CONSTANT_LEFT,
                        frame=XI_FRAME, alpha=traj.frame.alpha)


def reconstruct_phi(traj: PruferTrajectory) -> GridFunction:
    """``phi = exp(logR) sin(theta)`` (divided by ``s`` in the modified frame)."""
    if len(traj) == 0:
        raise ArgumentError("empty trajectory")
    phi = np.exp(traj.logR) * np.sin(traj.theta)
    if traj.modified:
        phi = phi / traj.frame_factor()
    return GridFunction(traj.xi, phi, frame=XI_FRAME, alpha=traj.frame.alpha)


def warmup() -> None:
    """Trigger compilation of the kernel on a tiny problem."""
    f = StarkFrame(1.0)
    solve(f, [0.0], 0.3, 0.0, 1.0, 3.0, 1e-6, mode=_kernel.MODE_SIGN,
          d_table=(np.array([1.0, 3.0]), np.array([0.5])))
    solve(f, [0.0, 1.0], 0.3, 0.0, 1.0, 3.0, 1e-6, mode=_kernel.MODE_SIN,
          pieces=([1.0], [3.0], [0.0], [0], [1.0], [0.1]), modified=True)


__all__ = [
    "PruferState", "ModifiedPruferState", "PruferTrajectory", "integrate",
    "integrate_modified", "integrate_sign_coupled", "reconstruct_phi",
    "solve", "phase_rates", "frame_factor", "hermite", "coupling_table",
    "SIGN", "SIN", "DEFAULT_TOL",
]
