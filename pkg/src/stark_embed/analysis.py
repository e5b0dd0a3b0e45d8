"""Diagnostics computed from Prüfer trajectories.

All integrals are evaluated with Gauss-Legendre rules on the trajectory's
own nodes, using the cubic Hermite dense output between nodes.  For
``|sin 2 theta|`` each interval is split where theta crosses a multiple of
pi/2, so the rule never straddles a kink.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ArgumentError, NonApplicableError
from .prufer import PruferTrajectory
from .transform import StarkFrame, weight_p

L2_CERTIFIED = "L2-certified"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

_CHUNK = 200_000
_HALF_PI = 0.5 * math.pi


# ---------------------------------------------------------------------------
# quadrature along trajectories


def _clip_nodes(xi: np.ndarray, a: float, b: float) -> np.ndarray:
    i0 = np.searchsorted(xi, a, side="right")
    i1 = np.searchsorted(xi, b, side="left")
    return np.concatenate([[a], xi[i0:i1], [b]])


def _covers(traj: PruferTrajectory, a: float, b: float) -> None:
    lo, hi = traj.xi_range
    tol = 1e-12 * max(1.0, abs(hi))
    if a < lo - tol or b > hi + tol or not a < b:
        raise ArgumentError(
            f"range [{a}, {b}] not covered by trajectory [{lo}, {hi}]")


def _edges(trajs: Sequence[PruferTrajectory], a: float, b: float):
    for t in trajs:
        _covers(t, a, b)
    lo, hi = max(a, trajs[0].xi[0]), min(b, trajs[0].xi[-1])
    grids = [trajs[0].xi]
    for t in trajs[1:]:
        if t.xi is not trajs[0].xi and not (
                t.xi.size == trajs[0].xi.size and t.xi[-1] == trajs[0].xi[-1]
                and np.array_equal(t.xi, trajs[0].xi)):
            grids.append(t.xi)
    xi = grids[0] if len(grids) == 1 else np.unique(np.concatenate(grids))
    return _clip_nodes(xi, lo, hi)


def _crossing_fraction(traj: PruferTrajectory, x0, x1):
    """Local fraction in (0, 1) where theta hits a multiple of pi/2 (1 if none)."""
    th0, _ = traj.dense(x0)
    th1, _ = traj.dense(x1)
    lo = np.minimum(th0, th1)
    hi = np.maximum(th0, th1)
    level = _HALF_PI * np.ceil(lo / _HALF_PI)
    eps = 1e-12 * np.maximum(1.0, np.abs(level))
    has = (level > lo + eps) & (level < hi - eps)
    tau = np.ones_like(x0)
    if not np.any(has):
        return tau
    a, b, L = x0[has], x1[has], level[has]
    t0, t1 = th0[has], th1[has]
    t = np.clip((L - t0) / (t1 - t0), 0.0, 1.0)
    idx = traj.locate(0.5 * (a + b))
    # Newton on the Hermite cubic from the linear guess, kept inside [0, 1]
    for _ in range(12):
        x = a + t * (b - a)
        th, _ = traj.dense(x, idx)
        dth = traj.dense_slope(x, idx)
        step = (th - L) / np.where(dth != 0, dth * (b - a), 1.0)
        t = np.clip(t - step, 0.0, 1.0)
        if np.all(np.abs(step) < 1e-14):
            break
    tau[has] = t
    return tau


def integrate_along(trajs: Sequence[PruferTrajectory], fn: Callable, a: float,
                    b: float, *, n_gauss: int = 8, split_on=None,
                    cumulative: bool = False):
    """Integrate ``fn(xi, thetas, logRs)`` over ``[a, b]``.

    ``thetas`` and ``logRs`` are lists with one array per trajectory.
    ``split_on`` (a trajectory) enables kink splitting at its pi/2 levels.
    With ``cumulative=True`` returns ``(edges, per_interval_integrals)``.
    """
    trajs = list(trajs)
    edges = _edges(trajs, a, b)
    gx, gw = leggauss(n_gauss)
    gx = 0.5 * (gx + 1.0)
    gw = 0.5 * gw
    parts = []
    for s in range(0, edges.size - 1, _CHUNK):
        x0 = edges[s:s + _CHUNK]
        x1 = edges[s + 1:s + 1 + _CHUNK]
        x0 = x0[:x1.size]
        if split_on is not None:
            tau = _crossing_fraction(split_on, x0, x1)
            subs = [(x0, x0 + tau * (x1 - x0)), (x0 + tau * (x1 - x0), x1)]
        else:
            subs = [(x0, x1)]
        acc = np.zeros(x0.size)
        for lo, hi in subs:
            h = hi - lo
            if not np.any(h > 0):
                continue
            pts = lo[:, None] + h[:, None] * gx[None, :]
            flat = pts.ravel()
            ths, lgs = [], []
            for t in trajs:
                idx = np.repeat(t.locate(0.5 * (lo + hi)), n_gauss)
                th, lg = t.dense(flat, idx)
                ths.append(th)
                lgs.append(lg)
            vals = np.asarray(fn(flat, ths, lgs)).reshape(pts.shape)
            acc += h * (vals @ gw)
        parts.append(acc)
    per = np.concatenate(parts) if parts else np.zeros(0)
    if cumulative:
        return edges, per
    return float(math.fsum(per))


# ---------------------------------------------------------------------------
# oscillatory integrals


@dataclass
class OscillatoryReport:
    a: float
    b: float
    kind: str
    beta1: float | None
    beta2: float
    value: float
    applicable: bool = True
    density: float | None = None
    gamma: float | None = None
    beta_fit: float | None = None
    constant_fit: float | None = None
    beta_required: float | None = None
    envelope_ok: bool | None = None
    note: str = ""

    def to_dict(self):
        return asdict(self)


def _envelope_slope(x, env):
    ok = env > 0
    if ok.sum() < 2:
        return math.inf, 0.0
    slope, icpt = np.polyfit(np.log(x[ok]), np.log(env[ok]), 1)
    return float(-slope), float(icpt)


def phase_law(traj: PruferTrajectory, a: float, b: float,
              per_decade: int = 5):
    """Measured ``gamma`` and ``beta1`` in ``theta' = gamma + O(xi**-beta1)``."""
    _covers(traj, a, b)
    tr = traj.node_slopes[0]
    sel = (traj.xi >= a) & (traj.xi <= b)
    xs, dth = traj.xi[sel], tr[sel]
    if xs.size < 4:
        raise ArgumentError("too few nodes for a phase law fit")
    tail = xs >= xs[0] + 0.9 * (xs[-1] - xs[0])
    gamma = float(np.median(dth[tail]))
    if abs(gamma) < 1e-8:
        return gamma, None
    dev = np.abs(dth - gamma)
    edges = np.geomspace(a, b, max(2, int(per_decade * math.log10(b / a)) + 1))
    mids, env = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (xs >= lo) & (xs < hi)
        if m.any():
            mids.append(lo)
            env.append(dev[m].max())
    env = np.asarray(env)
    if np.all(env < 1e-13):
        return gamma, math.inf
    beta1, _ = _envelope_slope(np.asarray(mids), env)
    return gamma, beta1


def oscillatory_integral(traj: PruferTrajectory, beta2: float, a: float,
                         b: float, kind: str = "sin", *,
                         per_decade: int = 5, n_gauss: int = 8
                         ) -> OscillatoryReport:
    """Quadrature of ``int_a^b f(theta)/xi**beta2`` along a trajectory.

    ``kind`` is ``"sin"``, ``"cos"`` or ``"abs_sin2"``.  For ``abs_sin2``
    (``beta2 = 1``) the report carries ``density = value / ln(b/a)``.  For
    ``sin``/``cos`` the lower limit is swept over ``per_decade`` points per
    decade and ``|I(a')| <= C a'**-beta`` is fitted to the running envelope.
    """
    if kind not in ("sin", "cos", "abs_sin2"):
        raise ArgumentError(f"unknown kind {kind!r}")
    if not 1 < a < b:
        raise ArgumentError("need 1 < a < b")
    if kind == "abs_sin2" and beta2 != 1:
        raise ArgumentError("abs_sin2 requires beta2 = 1")
    _covers(traj, a, b)
    gamma, beta1 = phase_law(traj, a, b)
    if beta1 is None:
        return OscillatoryReport(a, b, kind, None, beta2, math.nan,
                                 applicable=False, gamma=gamma,
                                 note="theta' = 0: phase law hypothesis fails")

    if kind == "abs_sin2":
        val = integrate_along(
            [traj], lambda x, th, lg: np.abs(np.sin(2 * th[0])) / x, a, b,
            n_gauss=n_gauss, split_on=traj)
        return OscillatoryReport(a, b, kind, beta1, 1.0, val, gamma=gamma,
                                 density=val / math.log(b / a))

    f = np.sin if kind == "sin" else np.cos
    edges, per = integrate_along(
        [traj], lambda x, th, lg: f(th[0]) / x ** beta2, a, b,
        n_gauss=n_gauss, cumulative=True)
    tail = np.concatenate([np.cumsum(per[::-1])[::-1], [0.0]])
    value = float(tail[0])
    report = OscillatoryReport(a, b, kind, beta1, beta2, value, gamma=gamma)
    hyp = beta2 > 0.5 and beta1 + beta2 > 1
    beta_req = min(beta2, beta1 + beta2 - 1, 2 * beta2 - 1)
    report.beta_required = float(beta_req)
    if not hyp:
        report.applicable = False
        report.note = "beta2 <= 1/2 or beta1 + beta2 <= 1"
        return report
    # sweep lower limits; stop a decade short of b so |I| is not trivially small
    top = b / 10.0 if b / a > 100 else math.sqrt(a * b)
    n = max(6, int(per_decade * math.log10(top / a)) + 1)
    sweep = np.geomspace(a, top, n)
    env = np.empty(n - 1)
    for k in range(n - 1):
        m = (edges >= sweep[k]) & (edges < sweep[k + 1])
        env[k] = np.abs(tail[m]).max() if m.any() else abs(value)
    beta_fit, icpt = _envelope_slope(sweep[:-1], env)
    report.beta_fit = beta_fit
    report.constant_fit = float(np.max(env * sweep[:-1] ** min(beta_fit, 50)))
    report.envelope_ok = bool(beta_fit >= beta_req - 0.1)
    return report


# ---------------------------------------------------------------------------
# Gram matrices, almost orthogonality, Bessel


@dataclass
class GramReport:
    B: float
    energies: list
    A: list
    offdiag: list
    max_offdiag: float
    alpha: float
    half_log_B: float

    def to_dict(self):
        return asdict(self)


def _distinct(trajs):
    es = [t.energy for t in trajs]
    if len(set(es)) != len(es):
        raise ArgumentError("energies must be pairwise distinct")
    return es


def gram_matrix(trajs: Sequence[PruferTrajectory], B: float,
                lo: float = 1.0) -> GramReport:
    """Normalized inner products of ``e_i = sin 2 theta_i / ((1 + xi) sqrt(A_i))``.

    The space is ``L^2([lo, B], (1 + xi) d xi)``.
    """
    trajs = list(trajs)
    es = _distinct(trajs)
    n = len(trajs)

    def integrand(x, th, lg):
        s = [np.sin(2 * t) for t in th]
        rows = [s[i] * s[k] for i in range(n) for k in range(i, n)]
        return np.stack(rows, axis=-1) / (1.0 + x)[:, None]

    vals = _vector_integral(trajs, integrand, lo, B, n * (n + 1) // 2)
    G = np.empty((n, n))
    c = 0
    for i in range(n):
        for k in range(i, n):
            G[i, k] = G[k, i] = vals[c]
            c += 1
    A = np.diag(G).copy()
    C = G / np.sqrt(np.outer(A, A))
    np.fill_diagonal(C, 1.0)
    off = np.abs(C - np.eye(n))
    mx = float(off.max()) if n > 1 else 0.0
    return GramReport(float(B), es, A.tolist(), C.tolist(), mx, n * mx,
                      0.5 * math.log(B))


def _vector_integral(trajs, fn, a, b, m, n_gauss=8):
    edges = _edges(trajs, a, b)
    gx, gw = leggauss(n_gauss)
    gx, gw = 0.5 * (gx + 1.0), 0.5 * gw
    total = np.zeros(m)
    for s in range(0, edges.size - 1, _CHUNK):
        x0 = edges[s:s + _CHUNK]
        x1 = edges[s + 1:s + 1 + _CHUNK]
        x0 = x0[:x1.size]
        h = x1 - x0
        pts = (x0[:, None] + h[:, None] * gx[None, :]).ravel()
        ths, lgs = [], []
        for t in trajs:
            idx = np.repeat(t.locate(0.5 * (x0 + x1)), n_gauss)
            th, lg = t.dense(pts, idx)
            ths.append(th)
            lgs.append(lg)
        vals = fn(pts, ths, lgs).reshape(x0.size, n_gauss, m)
        total += np.einsum("i,ijk,j->k", h, vals, gw)
    return total


def gram_sweep(trajs, Bs=(1e3, 1e4, 1e5, 1e6)):
    """Gram reports over several horizons plus ``max_offdiag * ln B``."""
    reps = [gram_matrix(trajs, B) for B in Bs if B <= trajs[0].xi[-1]]
    consts = [r.max_offdiag * math.log(r.B) for r in reps]
    return reps, consts


def almost_orthogonality(traj1: PruferTrajectory, traj2: PruferTrajectory,
                         xi0: float, Xi: float) -> float:
    """``int_{xi0}^{Xi} sin 2theta_1 sin 2theta_2 / (1 + xi) dxi``."""
    if traj1.energy == traj2.energy:
        raise ArgumentError("almost orthogonality needs distinct energies")
    if not 1 < xi0 < Xi:
        raise ArgumentError("need 1 < xi0 < Xi")
    return integrate_along(
        [traj1, traj2],
        lambda x, th, lg: np.sin(2 * th[0]) * np.sin(2 * th[1]) / (1 + x),
        xi0, Xi)


def almost_orthogonality_sweep(traj1, traj2, xi0s, Xi):
    """Values at several lower limits and the fitted decay exponent."""
    xi0s = np.asarray(xi0s, dtype=float)
    if traj1.energy == traj2.energy:
        raise ArgumentError("almost orthogonality needs distinct energies")
    a = float(xi0s.min())
    edges, per = integrate_along(
        [traj1, traj2],
        lambda x, th, lg: np.sin(2 * th[0]) * np.sin(2 * th[1]) / (1 + x),
        a, Xi, cumulative=True)
    tail = np.concatenate([np.cumsum(per[::-1])[::-1], [0.0]])
    vals = np.interp(xi0s, edges, tail)
    # running envelope: sup of |tail| beyond each lower limit
    env = np.array([np.abs(tail[edges >= x]).max() for x in xi0s])
    exponent, _ = _envelope_slope(xi0s, env)
    return vals, env, exponent


@dataclass
class BesselReport:
    lhs: float
    rhs: float
    alpha: float
    norm2: float
    applicable: bool
    holds: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class FrameBasis:
    """Frame vectors sampled on quadrature nodes of ``L^2([lo, B], (1+xi) dxi)``."""

    nodes: np.ndarray
    weights: np.ndarray
    vectors: np.ndarray
    energies: list = field(default_factory=list)

    def inner(self, f, g) -> float:
        return float(np.sum(self.weights * f * g))


def frame_basis(trajs: Sequence[PruferTrajectory], B: float, lo: float = 1.0,
                n_gauss: int = 4) -> FrameBasis:
    trajs = list(trajs)
    es = _distinct(trajs)
    edges = _edges(trajs, lo, B)
    gx, gw = leggauss(n_gauss)
    gx, gw = 0.5 * (gx + 1.0), 0.5 * gw
    h = np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * gx[None, :]).ravel()
    w = (h[:, None] * gw[None, :]).ravel() * (1.0 + nodes)
    vecs = []
    for t in trajs:
        s = np.sin(2 * t.dense(nodes)[0]) / (1.0 + nodes)
        vecs.append(s / math.sqrt(np.sum(w * s * s)))
    return FrameBasis(nodes, w, np.array(vecs), es)


def bessel_bound_check(g, frames, weights=None) -> BesselReport:
    """Both sides of ``sum_i <g, e_i>**2 <= (1 + alpha) ||g||**2``.

    ``frames`` is a :class:`FrameBasis` or an ``(N, n)`` array of vectors
    (then ``weights`` gives the inner-product weights, default 1).  ``g``
    is an array on the same nodes or a callable evaluated at the nodes.
    ``alpha = N max_{j != k} |<e_j, e_k>|``; ``alpha >= 1`` marks the
    report not applicable.
    """
    if isinstance(frames, FrameBasis):
        E, w = frames.vectors, frames.weights
        if callable(g):
            g = g(frames.nodes)
    else:
        E = np.atleast_2d(np.asarray(frames, dtype=float))
        w = np.ones(E.shape[1]) if weights is None else np.asarray(weights)
    g = np.asarray(g, dtype=float)
    if g.shape != (E.shape[1],):
        raise ArgumentError("g and frame vectors live on different nodes")
    n = E.shape[0]
    G = (E * w) @ E.T
    off = np.abs(G - np.diag(np.diag(G)))
    alpha = float(n * off.max()) if n > 1 else 0.0
    coeffs = (E * w) @ g
    lhs = float(np.sum(coeffs ** 2))
    norm2 = float(np.sum(w * g * g))
    rhs = (1.0 + alpha) * norm2
    return BesselReport(lhs, rhs, alpha, norm2, alpha < 1.0,
                        bool(lhs <= rhs * (1 + 1e-12)))


def count_bound(a: float, frame: StarkFrame | None = None) -> int:
    """``floor(2 a**2 / (2 - alpha)**2)``."""
    if a < 0:
        raise ArgumentError("a must be nonnegative")
    alpha = 1.0 if frame is None else frame.alpha
    return int(math.floor(2.0 * a * a / (2.0 - alpha) ** 2 + 1e-12))


# ---------------------------------------------------------------------------
# decay and L^2 accounting


def decay_exponent(traj: PruferTrajectory, window: tuple[float, float], *,
                   n_points: int = 4000, n_sub: int = 20, n_boot: int = 400,
                   seed: int = 0) -> tuple[float, tuple[float, float]]:
    """Slope of logR against ln xi with a bootstrap CI over sub-windows."""
    lo, hi = window
    if not 0 < lo < hi or hi / lo < 100 * (1 - 1e-9):
        raise ArgumentError("window must span at least two decades")
    _covers(traj, lo, hi)
    pts = np.geomspace(lo, hi, n_points)
    _, lg = traj.dense(pts)
    x = np.log(pts)
    slope = float(np.polyfit(x, lg, 1)[0])
    blocks = np.array_split(np.arange(n_points), n_sub)
    rng = np.random.default_rng(seed)
    boots = np.empty(n_boot)
    for k in range(n_boot):
        pick = rng.integers(0, n_sub, n_sub)
        if np.unique(pick).size < 2:
            pick[0] = (pick[0] + 1) % n_sub
        sel = np.concatenate([blocks[i] for i in pick])
        boots[k] = np.polyfit(x[sel], lg[sel], 1)[0]
    ci = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5)))
    return slope, ci


@dataclass
class TailReport:
    decades: list
    edges: list
    masses: list
    ratios: list
    verdict: str
    ratio_threshold: float

    def to_dict(self):
        return asdict(self)


def tail_verdict(masses: Sequence[float], r: float = 0.7) -> str:
    """Classify the last (up to) four decade masses.

    Certified when the last three ratios are all at most ``r``.  Divergent
    when the masses never decrease, or when every mass is at least half
    the window median and the geometric-mean ratio is at least 0.9 (no
    visible decay).  Anything else, e.g. a slow but steady decay, is
    inconclusive.
    """
    m = np.asarray(masses, dtype=float)[-4:]
    if m.size < 3:
        raise ArgumentError("need at least three decades")
    ratios = m[1:] / m[:-1]
    if ratios.size >= 3 and np.all(ratios[-3:] <= r):
        return L2_CERTIFIED
    flat = m.min() >= 0.5 * np.median(m) and \
        (m[-1] / m[0]) ** (1.0 / ratios.size) >= 0.9
    if np.all(ratios >= 1.0) or flat:
        return DIVERGENT
    return INCONCLUSIVE


def mass_integral(traj: PruferTrajectory, a: float, b: float,
                  frame: StarkFrame | None = None) -> float:
    """``int_a^b R**2 p dxi``."""
    frame = traj.frame if frame is None else frame
    return integrate_along(
        [traj], lambda x, th, lg: np.exp(2 * lg[0]) * (
            traj.weight_at(x) if frame is traj.frame else weight_p(x, frame)),
        a, b, n_gauss=4)


def l2_tail(traj: PruferTrajectory, frame: StarkFrame | None = None, *,
            r: float = 0.7) -> TailReport:
    """Per-decade masses ``int R**2 p`` over full decades inside the range.

    Decade ``k`` is ``[10**(k-1), 10**k]``.
    """
    frame = traj.frame if frame is None else frame
    lo, hi = traj.xi_range
    k0 = math.ceil(math.log10(lo) - 1e-12) + 1
    k1 = math.floor(math.log10(hi) + 1e-12)
    ks = list(range(k0, k1 + 1))
    if len(ks) < 3:
        raise ArgumentError("trajectory must span at least three decades")
    edges, per = integrate_along(
        [traj], lambda x, th, lg: np.exp(2 * lg[0]) * (
            traj.weight_at(x) if frame is traj.frame else weight_p(x, frame)),
        10.0 ** (k0 - 1), 10.0 ** k1, n_gauss=4, cumulative=True)
    cum = np.concatenate([[0.0], np.cumsum(per)])
    bounds = [10.0 ** (k - 1) for k in ks] + [10.0 ** k1]
    at = np.interp(bounds, edges, cum)
    masses = np.diff(at)
    ratios = (masses[1:] / masses[:-1]).tolist()
    return TailReport(ks, bounds, masses.tolist(), ratios,
                      tail_verdict(masses, r), r)


def block_masses(traj: PruferTrajectory, edges: Sequence[float],
                 frame: StarkFrame | None = None) -> list[float]:
    """``int R**2 p`` over consecutive ``[edges[i], edges[i+1]]``."""
    e = list(edges)
    return [mass_integral(traj, a, b, frame) for a, b in zip(e[:-1], e[1:])]


# ---------------------------------------------------------------------------
# reports


def envelope_values(V, frame: StarkFrame, lo: float | None = None,
                    hi: float | None = None) -> np.ndarray:
    """``x**(1-alpha/2) |q(x)| = (1 + alpha/2) xi |V(xi)|`` at the grid nodes."""
    g, v = V.grid, V.values
    m = np.ones(g.size, dtype=bool)
    if lo is not None:
        m &= g >= lo
    if hi is not None:
        m &= g <= hi
    return frame.envelope_factor * g[m] * np.abs(v[m])


@dataclass
class SpectralReport:
    alpha: float
    energies: list
    slopes: list
    slope_ci: list
    tails: list
    verdicts: list
    envelope: dict
    checks: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(v == L2_CERTIFIED for v in self.verdicts)

    def to_dict(self):
        d = asdict(self)
        d["certified"] = self.certified
        return d


def spectral_report(trajs: Sequence[PruferTrajectory], V=None,
                    window: tuple[float, float] | None = None,
                    r: float = 0.7) -> SpectralReport:
    trajs = list(trajs)
    frame = trajs[0].frame
    lo, hi = trajs[0].xi_range
    if window is None:
        window = (max(lo, hi / 1e3), hi) if hi / lo >= 1e3 else (lo, hi)
    slopes, cis, tails, verdicts = [], [], [], []
    for t in trajs:
        try:
            s, ci = decay_exponent(t, window)
        except ArgumentError:
            s, ci = t.slope_fit(*window), (math.nan, math.nan)
        slopes.append(s)
        cis.append(list(ci))
        try:
            tr = l2_tail(t, frame, r=r)
            tails.append(tr.to_dict())
            verdicts.append(tr.verdict)
        except ArgumentError:
            tails.append(None)
            verdicts.append(INCONCLUSIVE)
    env = {}
    if V is not None:
        vals = envelope_values(V, frame)
        last = envelope_values(V, frame, lo=hi / 10.0)
        env = {"sup": float(vals.max(initial=0.0)),
               "sup_last_decade": float(last.max(initial=0.0))}
    return SpectralReport(frame.alpha, [t.energy for t in trajs], slopes, cis,
                          tails, verdicts, env)


__all__ = [
    "OscillatoryReport", "GramReport", "SpectralReport", "TailReport",
    "BesselReport", "FrameBasis", "oscillatory_integral", "phase_law",
    "gram_matrix", "gram_sweep", "almost_orthogonality",
    "almost_orthogonality_sweep", "bessel_bound_check", "frame_basis",
    "count_bound", "decay_exponent", "l2_tail", "tail_verdict",
    "block_masses", "mass_integral", "envelope_values", "spectral_report",
    "integrate_along", "L2_CERTIFIED", "DIVERGENT", "INCONCLUSIVE",
]
