"""Compiled DOP853 integrator for coupled Prüfer systems.

One call integrates the phase/amplitude pairs ``(theta_j, logR_j)`` of
several energies through a shared potential.  The potential is the sum of

* a passive part, tabulated per segment as ``a + b*xi + c/(xi - s)``;
* an optional active part fed back from one component's phase:
  ``SIGN`` mode, ``-2 d(xi)/xi * sgn(sin 2 theta_t)`` with a piecewise
  constant coupling table, or ``SIN`` mode, a list of pieces
  ``-4 M/(1 + xi - b) * sin 2 theta_t * chi(xi)`` each with its own target.

Steps never straddle a breakpoint of any table.  In ``SIGN`` mode the
switching points (``theta_t`` crossing a multiple of pi/2) are located by
Newton iteration on the frozen-sign step map, safeguarded by bisection.
"""

import math

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

MODE_NONE = 0
MODE_SIGN = 1
MODE_SIN = 2

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_STEP_UNDERFLOW = 2
STATUS_FRAME = 3
STATUS_EVENT = 4
STATUS_MAX_STEPS = 5

_NS = _dop.N_STAGES
_A = np.ascontiguousarray(_dop.A[:_NS, :_NS])
_B = np.ascontiguousarray(_dop.B)
_C = np.ascontiguousarray(_dop.C[:_NS])
_E3 = np.ascontiguousarray(_dop.E3)
_E5 = np.ascontiguousarray(_dop.E5)

_HALF_PI = 0.5 * math.pi


@njit(cache=True)
def _psi(t):
    # C-infinity step: 0 for t <= 0, 1 for t >= 1
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    f0 = math.exp(-1.0 / t)
    f1 = math.exp(-1.0 / (1.0 - t))
    return f0 / (f0 + f1)


@njit(cache=True)
def cutoff(xi, x0, x1, w):
    if w <= 0.0:
        return 1.0
    return _psi((xi - x0) / w) * _psi((x1 - xi) / w)


@njit(cache=True)
def _potential(xi, y, ctx, mode):
    # ctx layout: [pa, pb, pc, ps, p_on, d, sigma, d_on,
    #              x0, x1, b, tgt, M, w, pc_on]
    v = 0.0
    if ctx[4] > 0.0:
        v += ctx[0] + ctx[1] * xi + ctx[2] / (xi - ctx[3])
    if mode == MODE_SIGN and ctx[7] > 0.0:
        v -= 2.0 * ctx[5] / xi * ctx[6]
    elif mode == MODE_SIN and ctx[14] > 0.0:
        th = y[2 * int(ctx[11])]
        v -= (4.0 * ctx[12] / (1.0 + xi - ctx[10]) * math.sin(2.0 * th)
              * cutoff(xi, ctx[8], ctx[9], ctx[13]))
    return v


@njit(cache=True)
def _rhs(xi, y, out, ctx, mode, energies, k2, cpa, pexp, modified):
    v = _potential(xi, y, ctx, mode)
    g = k2 / (xi * xi) + v
    pw = cpa * xi ** pexp
    ok = True
    for j in range(energies.shape[0]):
        th = y[2 * j]
        sn = math.sin(th)
        cs = math.cos(th)
        h = -energies[j] / pw
        if modified:
            s2 = 1.0 - h
            if s2 <= 0.0:
                ok = False
                s2 = 1e-300
            s = math.sqrt(s2)
            dh = energies[j] * pexp / (pw * xi)
            ls = -dh / (2.0 * s2)
            out[2 * j] = s + ls * sn * cs - g / s * sn * sn
            out[2 * j + 1] = ls * sn * sn + g / s * sn * cs
        else:
            q = g + h
            out[2 * j] = 1.0 - q * sn * sn
            out[2 * j + 1] = q * sn * cs
    return ok


@njit(cache=True)
def _step(xi, y, h, K, ynew, tmp, ctx, mode, energies, k2, cpa, pexp,
          modified, A, B, C):
    # K[0] must hold f(xi, y) on entry
    n = y.shape[0]
    ok = True
    for s in range(1, 12):
        for i in range(n):
            acc = 0.0
            for r in range(s):
                acc += A[s, r] * K[r, i]
            tmp[i] = y[i] + h * acc
        ok &= _rhs(xi + C[s] * h, tmp, K[s], ctx, mode, energies, k2, cpa,
                   pexp, modified)
    for i in range(n):
        acc = 0.0
        for r in range(12):
            acc += B[r] * K[r, i]
        ynew[i] = y[i] + h * acc
    ok &= _rhs(xi + h, ynew, K[12], ctx, mode, energies, k2, cpa, pexp,
               modified)
    return ok


@njit(cache=True)
def _error_norm(K, h, tol, E3, E5):
    n = K.shape[1]
    e5 = 0.0
    e3 = 0.0
    for i in range(n):
        a5 = 0.0
        a3 = 0.0
        for r in range(13):
            a5 += E5[r] * K[r, i]
            a3 += E3[r] * K[r, i]
        e5 += (a5 / tol) ** 2
        e3 += (a3 / tol) ** 2
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * n)


@njit(cache=True)
def _seg_index(knots, xi):
    # index k with knots[k] <= xi < knots[k+1]; -1 outside
    if knots.shape[0] < 2 or xi < knots[0] or xi >= knots[-1]:
        return -1
    return np.searchsorted(knots, xi, side="right") - 1


@njit(cache=True)
def _set_context(xi, ctx, p_knots, p_a, p_b, p_c, p_s, mode, d_knots, d_vals,
                 pc_x0, pc_x1, pc_b, pc_t, pc_M, pc_w):
    k = _seg_index(p_knots, xi)
    if k >= 0:
        ctx[0] = p_a[k]
        ctx[1] = p_b[k]
        ctx[2] = p_c[k]
        ctx[3] = p_s[k]
        ctx[4] = 1.0
    else:
        ctx[4] = 0.0
    if mode == MODE_SIGN:
        k = _seg_index(d_knots, xi)
        if k >= 0:
            ctx[5] = d_vals[k]
            ctx[7] = 1.0
        else:
            ctx[7] = 0.0
    elif mode == MODE_SIN:
        ctx[14] = 0.0
        for i in range(pc_x0.shape[0]):
            if pc_x0[i] <= xi < pc_x1[i]:
                ctx[8] = pc_x0[i]
                ctx[9] = pc_x1[i]
                ctx[10] = pc_b[i]
                ctx[11] = pc_t[i]
                ctx[12] = pc_M[i]
                ctx[13] = pc_w[i]
                ctx[14] = 1.0
                break


@njit(cache=True)
def _grow(arr, cap):
    out = np.empty((cap,) + arr.shape[1:], dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def integrate_kernel(y0, xi0, xi1, tol, h_init, h_max, energies, k2, cpa,
                     pexp, modified, stops, p_knots, p_a, p_b, p_c, p_s, mode,
                     target, d_knots, d_vals, pc_x0, pc_x1, pc_b, pc_t, pc_M,
                     pc_w, cap, max_steps, A, B, C, E3, E5):
    """Integrate from ``xi0`` to ``xi1``; see module docstring.

    Returns ``(status, n_nodes, xi, Y, v_left, v_right, n_events)`` where
    the arrays are trimmed to ``n_nodes``.  On failure the last good state
    is the final recorded node.
    """
    n = y0.shape[0]
    xs = np.empty(cap)
    Ys = np.empty((cap, n))
    vl = np.empty(cap)
    vr = np.empty(cap)

    K = np.empty((13, n))
    y = y0.copy()
    ynew = np.empty(n)
    tmp = np.empty(n)
    ytry = np.empty(n)
    Ktry = np.empty((13, n))
    f0 = np.empty(n)
    ctx = np.zeros(15)
    ctx_old = np.zeros(15)

    xi = xi0
    _set_context(xi, ctx, p_knots, p_a, p_b, p_c, p_s, mode, d_knots, d_vals,
                 pc_x0, pc_x1, pc_b, pc_t, pc_M, pc_w)

    # sign bookkeeping: theta_t in [m pi/2, (m+1) pi/2]
    m = 0
    up = False
    if mode == MODE_SIGN:
        tht = y[2 * target]
        m = int(math.floor(tht / _HALF_PI))
        ctx[6] = 1.0
        _rhs(xi, y, f0, ctx, mode, energies, k2, cpa, pexp, modified)
        if tht == m * _HALF_PI and f0[2 * target] < 0.0:
            m -= 1
        ctx[6] = 1.0 if (m % 2 == 0) else -1.0

    status = STATUS_OK
    if not _rhs(xi, y, K[0], ctx, mode, energies, k2, cpa, pexp, modified):
        status = STATUS_FRAME

    xs[0] = xi
    Ys[0] = y
    v0 = _potential(xi, y, ctx, mode)
    vl[0] = v0
    vr[0] = v0
    nn = 1
    n_events = 0
    ip = np.searchsorted(stops, xi, side="right")

    h = min(h_init, h_max, xi1 - xi0)
    err_prev = 1e-4
    steps = 0
    span = max(1.0, abs(xi1))
    while status == STATUS_OK and xi < xi1:
        steps += 1
        if steps > max_steps:
            status = STATUS_MAX_STEPS
            break
        while ip < stops.shape[0] and stops[ip] <= xi:
            ip += 1
        nxt = stops[ip] if ip < stops.shape[0] else xi1
        if nxt > xi1:
            nxt = xi1
        land = False
        if xi + h >= nxt - 1e-14 * span:
            h = nxt - xi
            land = True
        if h < 1e-13 * max(1.0, abs(xi)):
            status = STATUS_STEP_UNDERFLOW
            break

        ok = _step(xi, y, h, K, ynew, tmp, ctx, mode, energies, k2, cpa,
                   pexp, modified, A, B, C)
        finite = True
        for i in range(n):
            if not math.isfinite(ynew[i]):
                finite = False
        if not finite:
            err = 1e10
        else:
            err = _error_norm(K, h, tol, E3, E5)
        if not ok and finite:
            status = STATUS_FRAME
            break
        if err > 1.0:
            fac = max(0.2, 0.9 * err ** (-1.0 / 8.0))
            h *= fac
            if not finite and h < 1e-13 * max(1.0, abs(xi)):
                status = STATUS_NONFINITE
                break
            continue

        xnew = nxt if land else xi + h
        crossed = False
        if mode == MODE_SIGN and ctx[7] > 0.0:
            tht_new = ynew[2 * target]
            lo = m * _HALF_PI
            hi = lo + _HALF_PI
            band = 1e-12 * max(1.0, abs(hi))
            if tht_new > hi + band or tht_new < lo - band:
                crossed = True
                up = tht_new > hi
                level = hi if up else lo
                # safeguarded Newton on g(s) = theta_t(xi + s) - level
                a_lo = 0.0
                a_hi = h
                g_lo = y[2 * target] - level
                s = h * g_lo / (g_lo - (tht_new - level))
                found = False
                for it in range(60):
                    if not (a_lo < s < a_hi):
                        s = 0.5 * (a_lo + a_hi)
                    for i in range(n):
                        Ktry[0, i] = K[0, i]
                    _step(xi, y, s, Ktry, ytry, tmp, ctx, mode, energies, k2,
                          cpa, pexp, modified, A, B, C)
                    g = ytry[2 * target] - level
                    if (g > 0.0) == (g_lo > 0.0):
                        a_lo = s
                    else:
                        a_hi = s
                    slope = Ktry[12, 2 * target]
                    if abs(g) <= 4e-16 * max(1.0, abs(level)) or \
                            (a_hi - a_lo) <= 1e-12 * max(1.0, xi):
                        found = True
                        break
                    if slope != 0.0:
                        s = s - g / slope
                    else:
                        s = 0.5 * (a_lo + a_hi)
                if not found:
                    status = STATUS_EVENT
                    break
                xnew = xi + s
                for i in range(n):
                    ynew[i] = ytry[i]
                for r in range(13):
                    for i in range(n):
                        K[r, i] = Ktry[r, i]
                land = False
                n_events += 1

        # accept
        for i in range(15):
            ctx_old[i] = ctx[i]
        if land:
            xnew = nxt
        if nn >= xs.shape[0]:
            newcap = 2 * xs.shape[0]
            xs = _grow(xs, newcap)
            Ys = _grow(Ys, newcap)
            vl = _grow(vl, newcap)
            vr = _grow(vr, newcap)
        xs[nn] = xnew
        Ys[nn] = ynew
        vl[nn] = _potential(xnew, ynew, ctx_old, mode)
        _set_context(xnew, ctx, p_knots, p_a, p_b, p_c, p_s, mode, d_knots,
                     d_vals, pc_x0, pc_x1, pc_b, pc_t, pc_M, pc_w)
        if crossed:
            m = m + 1 if up else m - 1
        if mode == MODE_SIGN:
            ctx[6] = 1.0 if (m % 2 == 0) else -1.0
        vr[nn] = _potential(xnew, ynew, ctx, mode)
        nn += 1

        xi = xnew
        for i in range(n):
            y[i] = ynew[i]
        if not _rhs(xi, y, K[0], ctx, mode, energies, k2, cpa, pexp,
                    modified):
            status = STATUS_FRAME
            break

        if not crossed:
            # PI controller
            e = max(err, 1e-10)
            fac = 0.9 * e ** (-0.7 / 8.0) * err_prev ** (0.4 / 8.0)
            fac = min(5.0, max(0.2, fac))
            err_prev = e
            h = min(h * fac, h_max)
        else:
            h = min(max(h, 1e-3), h_max)

    vr[nn - 1] = vl[nn - 1] if nn > 1 else vr[nn - 1]
    return (status, nn, xs[:nn].copy(), Ys[:nn].copy(), vl[:nn].copy(),
            vr[:nn].copy(), n_events)


def run(y0, xi0, xi1, tol, energies, k2, cpa, pexp, modified, *, stops=None,
        passive=None, mode=MODE_NONE, target=0, d_table=None, pieces=None,
        h_init=0.05, h_max=0.5, max_steps=200_000_000):
    """Python-side wrapper packing optional tables into typed arrays."""
    f = np.float64
    empty = np.zeros(0, dtype=f)
    if passive is None:
        p_knots, p_a, p_b, p_c, p_s = empty, empty, empty, empty, empty
    else:
        p_knots, p_a, p_b, p_c, p_s = (np.asarray(a, dtype=f) for a in passive)
    if d_table is None:
        d_knots, d_vals = empty, empty
    else:
        d_knots, d_vals = (np.asarray(a, dtype=f) for a in d_table)
    if pieces is None:
        pc = [empty] * 6
    else:
        pc = [np.asarray(a, dtype=f) for a in pieces]
    stops = empty if stops is None else np.asarray(stops, dtype=f)
    cap = int(min(2.5 * (xi1 - xi0) + 1024, 2e7))
    return integrate_kernel(
        np.asarray(y0, dtype=f), f(xi0), f(xi1), f(tol), f(h_init), f(h_max),
        np.asarray(energies, dtype=f), f(k2), f(cpa), f(pexp), bool(modified),
        stops, p_knots, p_a, p_b, p_c, p_s, int(mode), int(target), d_knots,
        d_vals, pc[0], pc[1], pc[2], pc[3], pc[4], pc[5], cap, int(max_steps),
        _A, _B, _C, _E3, _E5)
