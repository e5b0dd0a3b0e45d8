"""Potentials that embed prescribed eigenvalues.

* sign potentials ``V = -(2d/xi) sgn(sin 2 theta)`` for one energy, with a
  constant coupling or the critical block schedule;
* the same mechanism for ``-u'' + V u = lambda u`` directly in x;
* single pieces ``V = -(4M/(1+xi-b)) sin(2 theta_E) chi`` that make the
  target amplitude decay while keeping other energies bounded;
* the block-by-block gluing of such pieces for several energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import analysis
from .errors import ArgumentError, InfeasibleScheduleError, PreconditionError
from .prufer import (DEFAULT_TOL, PruferTrajectory, _kernel, coupling_table,
                     solve)
from .transform import (CONSTANT_LEFT, LINEAR, XI_FRAME, GridFunction,
                        PiecewisePotential, StarkFrame, q_from_V, x_of_xi)

DEFAULT_XI_MAX = 1e6
DEFAULT_WINDOW = 0.01


# ---------------------------------------------------------------------------
# plans and schedules


@dataclass(frozen=True)
class CriticalSchedule:
    """Couplings ``d_0 + 1/n`` on ``[a_n, a_{n+1})``, ``a_n = 2**((4/pi) n**3)``."""

    d0: float = math.pi / 12

    @staticmethod
    def breakpoint(n: int) -> float:
        return 2.0 ** ((4.0 / math.pi) * n ** 3)

    @staticmethod
    def epsilon(n: int) -> float:
        return 1.0 / n

    def coupling(self, n: int) -> float:
        return self.d0 + self.epsilon(n)

    def onset(self) -> float:
        """Where the sign potential is switched on: ``max(a_1, 4 d_1)``.

        Below ``2 d/xi = 1`` the phase can stall on a switching level
        (sliding motion), so block 1 starts once ``2 d_1/xi <= 1/2``.
        """
        return max(self.breakpoint(1), 4.0 * self.coupling(1))

    def table(self, xi_max: float):
        """``(knots, d)`` for all blocks starting below ``xi_max`` (last one cut)."""
        if xi_max < self.breakpoint(2):
            raise ArgumentError(
                f"xi_max must reach a_2 = {self.breakpoint(2):.6g}")
        knots, vals = [self.onset()], []
        n = 1
        while knots[-1] < xi_max:
            vals.append(self.coupling(n))
            knots.append(min(self.breakpoint(n + 1), xi_max))
            n += 1
        return np.array(knots), np.array(vals)

    def blocks(self, xi_max: float):
        knots, vals = self.table(xi_max)
        return [{"n": i + 1, "start": float(knots[i]), "end": float(knots[i + 1]),
                 "complete": bool(knots[i + 1] == self.breakpoint(i + 2)),
                 "d": float(vals[i])} for i in range(vals.size)]


@dataclass(frozen=True)
class PieceSpec:
    energy: float
    avoid: tuple = ()
    xi0: float = 1e3
    xi1: float = 1e4
    b: float = 0.0
    theta0: float = 0.0
    M: float = 1.0
    avoid_theta0: tuple | None = None

    def __post_init__(self):
        if not (self.xi1 > self.xi0 > self.b >= 0):
            raise ArgumentError("need xi1 > xi0 > b >= 0")
        if self.energy in self.avoid:
            raise ArgumentError("target energy in avoid set")
        if len(set(self.avoid)) != len(self.avoid):
            raise ArgumentError("avoid energies must be distinct")
        if self.M < 0:
            raise ArgumentError("M must be nonnegative")


@dataclass(frozen=True)
class ConstructionPlan:
    """Energies, boundary angles at the anchor and the block schedule.

    ``block_k[w]`` is the number of energies cycled in block ``w`` (all by
    default) and ``block_M[w]`` the coupling used there (``M`` by default).
    """

    energies: tuple
    boundary_angles: tuple
    M: float
    blocks: tuple
    S: float = 1.0
    block_k: tuple | None = None
    block_M: tuple | None = None
    anchor: float = 1.0

    def __post_init__(self):
        e = tuple(float(x) for x in self.energies)
        a = tuple(float(x) for x in self.boundary_angles)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "boundary_angles", a)
        object.__setattr__(self, "blocks", tuple(float(t) for t in self.blocks))
        if len(set(e)) != len(e) or not e:
            raise ArgumentError("energies must be nonempty and distinct")
        if len(a) != len(e):
            raise ArgumentError("one boundary angle per energy")
        if self.M <= 0 or any(t <= 0 for t in self.blocks):
            raise ArgumentError("M and block lengths must be positive")
        for name in ("block_k", "block_M"):
            v = getattr(self, name)
            if v is not None and len(v) != len(self.blocks):
                raise ArgumentError(f"{name} needs one entry per block")

    @property
    def N(self) -> int:
        return len(self.energies)

    @property
    def W(self) -> int:
        return len(self.blocks)

    def k(self, w: int) -> int:
        return self.N if self.block_k is None else int(self.block_k[w - 1])

    def coupling(self, w: int) -> float:
        return self.M if self.block_M is None else float(self.block_M[w - 1])

    @property
    def J(self) -> np.ndarray:
        """``J_0 = anchor``, ``J_w = J_{w-1} + k_w T_w`` (``1 + N sum T`` by default)."""
        out = [self.anchor]
        for w, T in enumerate(self.blocks, start=1):
            out.append(out[-1] + self.k(w) * T)
        return np.array(out)

    def to_dict(self):
        return {"energies": list(self.energies),
                "boundary_angles": list(self.boundary_angles), "M": self.M,
                "blocks": list(self.blocks), "J": self.J.tolist(),
                "block_k": None if self.block_k is None else list(self.block_k),
                "block_M": None if self.block_M is None else list(self.block_M)}


@dataclass(frozen=True)
class FiniteSchedule:
    N: int
    W: int
    epsilon: float
    M: float
    T: tuple
    J: tuple
    envelope_bound: float
    limit_ratio: float
    target_ratio: float
    w0: int | None

    def plan(self, energies, angles) -> ConstructionPlan:
        if len(energies) != self.N:
            raise ArgumentError(f"schedule was built for N = {self.N}")
        return ConstructionPlan(tuple(energies), tuple(angles), self.M, self.T)


def schedule_finite(N: int, W: int = 4,
                    frame: StarkFrame | None = None) -> FiniteSchedule:
    """Block lengths ``T_w = N**((1+eps) w)`` with ``eps = 1/sqrt(ln N)``.

    ``M = kappa (1 + 1/eps)`` with ``kappa`` half the critical decay rate of
    R (``1/6`` at alpha = 1), so ``6 eps M = 1 + eps`` there.  The
    envelope bound refers to ``limsup x**(1-alpha/2) |q|``.
    """
    if int(N) != N or N < 2:
        raise ArgumentError("N must be an integer >= 2 (use construct_single)")
    if W < 1:
        raise ArgumentError("W must be positive")
    frame = StarkFrame(1.0) if frame is None else frame
    a = frame.alpha
    eps = 1.0 / math.sqrt(math.log(N))
    kappa = (2.0 - a) / (2.0 * (2.0 + a))
    M = kappa * (1.0 + 1.0 / eps)
    T = tuple(float(N) ** ((1.0 + eps) * w) for w in range(1, W + 1))
    J = [1.0]
    for t in T:
        J.append(J[-1] + N * t)
    target = N ** eps + 0.25
    w0 = None
    for w in range(1, W + 1):
        if (J[w - 1] + T[w - 1]) / J[w - 1] >= target:
            w0 = w
            break
    bound = (2.0 - a) * math.exp(2.0 * math.sqrt(math.log(N))) * N
    return FiniteSchedule(int(N), int(W), eps, M, T, tuple(J), bound,
                          N ** eps - 1.0 / N + 1.0, target, w0)


def schedule_infinite_prefix(energies: Sequence[float], h: Callable, W: int,
                             frame: StarkFrame | None = None, *,
                             M_cap: float = 100.0, M_floor: float = 0.05,
                             ratio: float = 1.0, angles=None,
                             samples: int = 64) -> ConstructionPlan:
    """Finite prefix of a plan admitting energies one block at a time.

    Block ``w`` cycles the first ``k_w = min(w, len(energies))`` energies
    with ``T_w = ratio * J_{w-1}``.  Its coupling is the largest
    ``M_w <= M_cap`` for which the a priori envelope
    ``(1 + alpha/2) 4 M_w (1 + (k_w - 1) T_w / J_{w-1})`` keeps
    ``|q(x)| (1 + x**(1-alpha/2)) <= h(x)`` on the block (checked on
    ``samples`` points).  ``M_w < M_floor`` is infeasible.
    """
    frame = StarkFrame(1.0) if frame is None else frame
    energies = [float(e) for e in energies]
    if not energies or W < 1:
        raise ArgumentError("need energies and W >= 1")
    a = frame.alpha
    J = 1.0
    T, ks, Ms = [], [], []
    for w in range(1, W + 1):
        k = min(w, len(energies))
        t = ratio * J
        f = 1.0 + (k - 1) * t / J
        xi = np.geomspace(J, J + k * t, samples)
        x = x_of_xi(xi, frame)
        hv = np.array([float(h(v)) for v in x])
        if np.any(hv <= 0):
            raise InfeasibleScheduleError("h must be positive")
        need = (1 + a / 2) * 4.0 * f * (1.0 + x ** (a / 2 - 1.0))
        Mw = min(M_cap, float(np.min(hv / need)))
        if Mw < M_floor:
            raise InfeasibleScheduleError(
                f"block {w}: admissible coupling {Mw:.3g} below {M_floor}")
        T.append(t)
        ks.append(k)
        Ms.append(Mw)
        J += k * t
    angles = tuple(angles) if angles is not None else (0.0,) * len(energies)
    return ConstructionPlan(tuple(energies), angles, max(Ms), tuple(T),
                            block_k=tuple(ks), block_M=tuple(Ms))


# ---------------------------------------------------------------------------
# results


@dataclass(eq=False)
class Construction:
    """A realized potential with its trajectories.

    ``V`` samples the potential on the trajectory nodes (value to the right
    of each node), ``q`` is its x-frame image, ``potential`` the exact
    segment form when available.
    """

    V: GridFunction
    q: GridFunction | None
    trajectory: PruferTrajectory
    potential: PiecewisePotential | None = None
    companions: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.V, self.q, self.trajectory))

    @property
    def trajectories(self):
        return [self.trajectory] + list(self.companions)


def sign_segments(traj: PruferTrajectory) -> PiecewisePotential:
    """Exact ``c_k / xi`` segments of a realized sign potential."""
    xi = traj.xi
    c = traj.v_right[:-1] * xi[:-1]
    keep = np.concatenate([[True], c[1:] != c[:-1]])
    knots = np.append(xi[:-1][keep], xi[-1])
    cc = c[keep]
    z = np.zeros_like(cc)
    return PiecewisePotential(knots, z, z, cc, z, frame=XI_FRAME,
                              alpha=traj.frame.alpha)


def _sign_run(E, table, frame, xi0, xi_max, theta0, tol, passive):
    energies = [float(E)] + [float(e) for e in passive]
    trajs = solve(frame, energies, theta0, 0.0, xi0, xi_max, tol,
                  mode=_kernel.MODE_SIGN, d_table=table)
    t = trajs[0]
    V = GridFunction(t.xi, t.v_right, interp=CONSTANT_LEFT, frame=XI_FRAME,
                     alpha=frame.alpha)
    return Construction(V, q_from_V(V, frame), t, sign_segments(t), trajs[1:])


def construct_single(E: float, d, theta0: float = 0.0,
                     xi_max: float = DEFAULT_XI_MAX,
                     frame: StarkFrame | None = None, tol: float = DEFAULT_TOL,
                     *, xi0: float = 1.0, passive_energies=()) -> Construction:
    """Sign potential ``V = -(2d/xi) sgn(sin 2 theta(xi, E))`` on ``[xi0, xi_max]``.

    ``d`` is a number or a ``(knots, values)`` table.  Energies in
    ``passive_energies`` are integrated through the same V.
    """
    frame = StarkFrame(1.0) if frame is None else frame
    if xi_max < 1e3:
        raise ArgumentError("xi_max must be at least 1e3")
    table = coupling_table(d, xi0, xi_max)
    out = _sign_run(E, table, frame, xi0, xi_max, theta0, tol,
                    passive_energies)
    env = analysis.envelope_values(out.V, frame)
    out.info = {"mode": "single", "d": table[1].tolist(),
                "a": frame.envelope_factor * 2.0 * float(np.max(table[1])),
                "envelope_sup": float(env.max()),
                "critical_coupling": frame.critical_coupling}
    return out


def construct_single_critical(E: float, theta0: float = 0.0,
                              xi_max: float = DEFAULT_XI_MAX,
                              frame: StarkFrame | None = None,
                              tol: float = DEFAULT_TOL, *, passive_energies=()
                              ) -> Construction:
    """Critical schedule: ``V = 0`` below ``a_1``, then ``d_0 + 1/n`` on block n.

    Blocks beyond ``xi_max`` are not realized; the last one is cut.
    """
    frame = StarkFrame(1.0) if frame is None else frame
    sched = CriticalSchedule(frame.critical_coupling)
    table = sched.table(xi_max)
    out = _sign_run(E, table, frame, 1.0, xi_max, theta0, tol,
                    passive_energies)
    blocks = sched.blocks(xi_max)
    for b in blocks:
        env = analysis.envelope_values(out.V, frame, b["start"], b["end"])
        b["envelope_sup"] = float(env.max(initial=0.0))
    out.info = {"mode": "critical", "blocks": blocks,
                "limit_envelope": frame.critical_amplitude}
    return out


def construct_schrodinger_critical(a: float, theta0: float = 0.0,
                                   x_max: float = DEFAULT_XI_MAX,
                                   tol: float = DEFAULT_TOL, *,
                                   x0: float = 1.0) -> Construction:
    """Critical sign potential for ``-u'' + V u = lambda u``, ``lambda = 4a^2/pi^2``.

    With ``k = 2a/pi`` and ``t = k x`` the equation is the unit-frequency
    Prüfer system with ``Q = V/k**2``.  Block n (``x`` in
    ``[a_n, a_{n+1})``) uses ``Q = -(2 d_n/t) sgn(sin 2 theta)`` with
    ``d_n = pi/4 + 1/n``, i.e. ``x |V| = a (1 + 4/(pi n)) -> a``, and the
    amplitude decays like ``x**(-2 d_n/pi)``.  The
    returned trajectory is in x with unit weight.
    """
    if a <= 0:
        raise ArgumentError("a must be positive")
    k = 2.0 * a / math.pi
    sched = CriticalSchedule(math.pi / 4.0)
    if x_max < sched.breakpoint(2):
        raise ArgumentError(f"x_max must reach a_2 = {sched.breakpoint(2):.6g}")
    knots, d = sched.table(x_max)
    t0, t1 = k * x0, k * x_max
    tk = knots * k
    tk[0] = max(k * sched.breakpoint(1), sched.onset())
    tk[-1] = t1
    st = tk[(tk > t0) & (tk < t1)]
    status, nn, ts, Ys, vl, vr, nev = _kernel.run(
        np.array([theta0, 0.0]), t0, t1, tol, np.zeros(1), 0.0, 1.0, 0.0,
        False, stops=st, mode=_kernel.MODE_SIGN, d_table=(tk, d))
    if status != _kernel.STATUS_OK:
        raise PreconditionError(f"integration failed with status {status}")
    x = ts / k
    x[-1] = x_max
    th, lg = Ys[:, 0], Ys[:, 1]

    def rates(v):
        sn, cs = np.sin(th), np.cos(th)
        return k * (1.0 - v * sn * sn), k * v * sn * cs

    tr_, lr_ = rates(vr)
    tl_, ll_ = rates(vl)
    frame = StarkFrame(1.0)
    traj = PruferTrajectory(0.0, frame, x, th, lg, theta0, tol=tol,
                            n_events=int(nev), slopes=(tr_, tl_, lr_, ll_),
                            weight=lambda z: np.ones_like(np.asarray(z, float)))
    Vx = GridFunction(x, k * k * vr, interp=CONSTANT_LEFT, frame="x-frame")
    blocks = sched.blocks(x_max)
    blocks[0]["start"] = float(tk[0] / k)
    for b in blocks:
        b["coupling"] = 2.0 * b["d"] * k
        m = (x >= b["start"]) & (x < b["end"])
        b["x_abs_V_max"] = float(np.max(x[m] * np.abs(Vx.values[m]),
                                        initial=0.0))
    out = Construction(Vx, Vx, traj, None)
    out.info = {"mode": "schrodinger-critical", "a": a, "lambda": k * k,
                "k": k, "blocks": blocks}
    return out


# ---------------------------------------------------------------------------
# pieces and gluing


def smooth_step(t):
    """C-infinity step, 0 for t <= 0 and 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        f0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        f1 = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return f0 / (f0 + f1)


def cutoff(xi, x0: float, x1: float, window: float):
    if window <= 0:
        return np.ones_like(np.asarray(xi, dtype=float))
    return smooth_step((xi - x0) / window) * smooth_step((x1 - xi) / window)


def mollify_endpoints(V: GridFunction, window: float) -> GridFunction:
    """Multiply V by a smooth cutoff vanishing to all orders at both ends."""
    g = V.grid
    if window <= 0 or window >= (g[-1] - g[0]) / 10.0:
        raise ArgumentError("window must lie in (0, (xi1 - xi0)/10)")
    return V.with_values(V.values * cutoff(g, g[0], g[-1], window))


@dataclass(eq=False)
class PieceResult:
    V: GridFunction
    trajectory: PruferTrajectory
    avoid_trajectories: list
    corrections: dict
    flagged: bool
    spec: PieceSpec
    window: float


def _growth(traj, lo, hi):
    """``max_{lo <= xi <= hi} logR(xi) - logR(lo)`` and the end change."""
    i0 = np.searchsorted(traj.xi, lo, side="left")
    i1 = np.searchsorted(traj.xi, hi, side="right")
    seg = traj.logR[i0:i1]
    base = traj.logR[i0]
    return float(seg.max() - base), float(seg[-1] - base)


def piece_corrections(trajs, target: int, x0: float, x1: float, b: float,
                      M: float):
    """Measured factors ``1 + slack``: target excess over the ideal decay,
    and the largest growth of every other energy on the piece."""
    out = {}
    for j, t in enumerate(trajs):
        mx, end = _growth(t, x0, x1)
        if j == target:
            excess = end + M * math.log((x1 - b) / (x0 - b))
            out[t.energy] = math.exp(max(0.0, excess))
        else:
            out[t.energy] = math.exp(max(0.0, mx))
    return out


def construct_piece(spec: PieceSpec, frame: StarkFrame | None = None,
                    tol: float = DEFAULT_TOL, *,
                    window_frac: float = DEFAULT_WINDOW) -> PieceResult:
    """One piece ``V = -(4M/(1+xi-b)) sin(2 theta_E) chi(xi)`` on ``(xi0, xi1)``.

    All energies start with ``logR = 0`` at ``xi0``.  Correction factors
    above 2 flag the piece (it is still returned).
    """
    frame = StarkFrame(1.0) if frame is None else frame
    energies = [spec.energy] + list(spec.avoid)
    th = [spec.theta0] + list(spec.avoid_theta0 if spec.avoid_theta0
                              is not None else [spec.theta0] * len(spec.avoid))
    w = window_frac * (spec.xi1 - spec.xi0)
    trajs = solve(frame, energies, th, 0.0, spec.xi0, spec.xi1, tol,
                  mode=_kernel.MODE_SIN,
                  pieces=([spec.xi0], [spec.xi1], [spec.b], [0], [spec.M], [w]))
    corr = piece_corrections(trajs, 0, spec.xi0, spec.xi1, spec.b, spec.M)
    t = trajs[0]
    V = GridFunction(t.xi, t.v_right, interp=LINEAR, frame=XI_FRAME,
                     alpha=frame.alpha)
    return PieceResult(V, t, trajs[1:], corr, max(corr.values()) > 2.0, spec, w)


@dataclass(eq=False)
class GlueResult:
    V: GridFunction
    trajectories: list
    plan: ConstructionPlan
    pieces: list
    blocks: list
    warnings: list
    xi_max: float

    @property
    def q(self) -> GridFunction:
        return q_from_V(self.V, self.trajectories[0].frame)

    @property
    def realized_blocks(self) -> int:
        return sum(1 for b in self.blocks if b["complete"])

    def w0(self) -> int | None:
        """First block from which every target's block-end logR is nonincreasing."""
        for w in range(1, len(self.blocks) + 1):
            tail = self.blocks[w - 1:]
            if all(all(d <= 1e-12 for d in b["delta"]) for b in tail
                   if b["complete"]):
                return w
        return None

    def summary(self) -> dict:
        return {"plan": self.plan.to_dict(), "blocks": self.blocks,
                "warnings": self.warnings, "w0": self.w0(),
                "xi_max": self.xi_max}


def glue(plan: ConstructionPlan, frame: StarkFrame | None = None,
         tol: float = DEFAULT_TOL, *, xi_max: float | None = None,
         window_frac: float = DEFAULT_WINDOW) -> GlueResult:
    """Chain pieces block by block for all energies of ``plan``.

    Block ``w`` holds sub-pieces ``t = 0 .. k_w - 1`` on
    ``[J_{w-1} + t T_w, J_{w-1} + (t+1) T_w]`` with target ``E_{t+1}`` and
    offset ``b = t T_w``.  All energies are integrated jointly from the
    anchor with ``logR = 0``.  ``xi_max`` caps the realized range.
    """
    frame = StarkFrame(1.0) if frame is None else frame
    J = plan.J
    end = float(J[-1]) if xi_max is None else min(float(J[-1]), float(xi_max))
    x0s, x1s, bs, ts, Ms, ws, meta = [], [], [], [], [], [], []
    for w in range(1, plan.W + 1):
        T = plan.blocks[w - 1]
        for t in range(plan.k(w)):
            a0 = J[w - 1] + t * T
            if a0 >= end:
                break
            x0s.append(a0)
            x1s.append(J[w] if t == plan.k(w) - 1 else a0 + T)
            bs.append(t * T)
            ts.append(t)
            Ms.append(plan.coupling(w))
            ws.append(window_frac * T)
            meta.append((w, t))
    trajs = solve(frame, plan.energies, plan.boundary_angles, 0.0, plan.anchor,
                  end, tol, mode=_kernel.MODE_SIN,
                  pieces=(x0s, x1s, bs, ts, Ms, ws), stops=J)
    t0 = trajs[0]
    V = GridFunction(t0.xi, t0.v_right, interp=LINEAR, frame=XI_FRAME,
                     alpha=frame.alpha)
    warnings, pieces = [], []
    for i, (w, t) in enumerate(meta):
        hi = min(x1s[i], end)
        corr = piece_corrections(trajs, t, x0s[i], hi, bs[i], Ms[i]) \
            if hi == x1s[i] else {}
        flagged = bool(corr) and max(corr.values()) > 2.0
        pieces.append({"w": w, "t": t, "target": plan.energies[t],
                       "xi0": x0s[i], "xi1": x1s[i], "b": bs[i], "M": Ms[i],
                       "complete": hi == x1s[i],
                       "corrections": {str(k): v for k, v in corr.items()},
                       "flagged": flagged})
        if flagged:
            warnings.append(f"piece (w={w}, t={t}) correction "
                            f"{max(corr.values()):.3g} exceeds 2")
    blocks = []
    for w in range(1, plan.W + 1):
        lo = float(J[w - 1])
        if lo >= end:
            break
        hi = min(float(J[w]), end)
        T = plan.blocks[w - 1]
        M = plan.coupling(w)
        k = plan.k(w)
        i0 = np.searchsorted(t0.xi, lo)
        i1 = np.searchsorted(t0.xi, hi, side="right")
        deltas = [float(tr.logR[i1 - 1] - tr.logR[i0]) for tr in trajs]
        facs = [v for p in pieces if p["w"] == w
                for v in p["corrections"].values()]
        slack = max(facs) - 1.0 if facs else math.nan
        ratio = (lo + T) / lo
        bound = -M * math.log(ratio) + k * math.log1p(slack) \
            if facs else math.nan
        env_bound = 4.0 * M * (1.0 + (k - 1) * T / lo)
        env = float(np.max(t0.xi[i0:i1] * np.abs(t0.v_right[i0:i1])))
        env_left = float(np.max(t0.xi[i0:i1] * np.abs(t0.v_left[i0:i1])))
        env = max(env, env_left)
        blocks.append({"w": w, "J_prev": lo, "J": hi, "T": T, "M": M, "k": k,
                       "complete": hi == float(J[w]), "delta": deltas,
                       "slack": slack, "ratio": ratio,
                       "contraction_bound": bound,
                       "envelope_max": env, "envelope_bound": env_bound,
                       "envelope_ok": env <= env_bound * (1 + 1e-12)})
    return GlueResult(V, trajs, plan, pieces, blocks, warnings, end)


def envelope_within(V: GridFunction, h: Callable, frame: StarkFrame):
    """Pointwise ``|q(x)| (1 + x**(1-alpha/2)) <= h(x)`` at every node."""
    q = q_from_V(V, frame)
    x = q.grid
    lhs = np.abs(q.values) * (1.0 + x ** (1.0 - frame.alpha / 2.0))
    rhs = np.array([float(h(v)) for v in x]) if x.size < 50_000 else \
        np.asarray(h(x), dtype=float)
    return bool(np.all(lhs <= rhs)), float(np.max(lhs / rhs))


__all__ = [
    "ConstructionPlan", "PieceSpec", "CriticalSchedule", "FiniteSchedule",
    "Construction", "PieceResult", "GlueResult", "construct_single",
    "construct_single_critical", "construct_schrodinger_critical",
    "construct_piece", "glue", "schedule_finite", "schedule_infinite_prefix",
    "mollify_endpoints", "sign_segments", "envelope_within", "cutoff",
]
