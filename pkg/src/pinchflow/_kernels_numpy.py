"""Pure numpy/scipy fallback for the stepping kernels.

Same contract and same discretization as :mod:`pinchflow._kernels_numba`
(see the scheme notes there), with vectorized coefficient assembly and
``scipy.linalg.solve_banded`` in place of the compiled Thomas sweep.  The
run loop lives at Python level, so this path is one to two orders of
magnitude slower; it exists as a dependency-light reference and for
cross-checking the compiled path (see ``benchmarks/backend_bench.py``).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from ._profile_math import profile_deriv, profile_value
from ._kernels_numba import (  # status codes and shared constants
    ARGMAX_TOL,
    CONTINUE,
    CURVATURE_CAP,
    FAULT,
    HORIZON,
    RADIUS_FLOOR,
    R_JUMP_MAX,
    SNAPSHOT,
    STEP_FLOOR,
)

NAME = "numpy"


def step_once(u, r, rdot, dt, n, kind, p0, dxi, picard_tol, picard_max):
    """Single step; returns (ok, iters, unew, r_new, rdot_new).

    As in the compiled backend: the advection velocity stays frozen at the
    supplied ``rdot`` for the whole step, and the tridiagonal system is
    solved in increment form so solver roundoff scales with the step
    increment rather than the heights.
    """
    N = u.shape[0] - 1
    xi = np.arange(1, N) * dxi
    dxi2 = dxi * dxi
    ab = np.zeros((3, N + 1))
    rhs = np.empty(N + 1)

    upic = u.copy()
    r_p = float(r)
    rd_p = float(rdot)
    unew = u.copy()

    for it in range(1, picard_max + 1):
        sigp = profile_deriv(kind, p0, upic[N])
        s = -r_p * sigp
        r2 = r_p * r_p

        sl = (upic[2:] - upic[:-2]) / (2.0 * dxi)
        a = 1.0 / (r2 + sl * sl)
        b = (n - 1.0) / (r2 * xi) + xi * rd_p / r_p
        ca = dt * a / dxi2
        cb = dt * b / (2.0 * dxi)

        dl = np.zeros(N + 1)
        d = np.empty(N + 1)
        du = np.zeros(N + 1)

        a0 = n * dt / (r2 * dxi2)
        d[0] = 1.0 + 2.0 * a0
        du[0] = -2.0 * a0
        rhs[0] = 2.0 * a0 * (u[1] - u[0])
        dl[1:N] = -(ca - cb)
        d[1:N] = 1.0 + 2.0 * ca
        du[1:N] = -(ca + cb)
        rhs[1:N] = ca * (u[2:] - 2.0 * u[1:-1] + u[:-2]) \
            + cb * (u[2:] - u[:-2])
        # implicit boundary advection: rdot = sigma' * du_N/dt becomes the
        # diagonal factor (1 + sigma'^2); see the numba backend
        sig2 = sigp * sigp
        aN = 1.0 / (r2 + s * s)
        caN = dt * aN / dxi2
        dl[N] = -2.0 * caN
        d[N] = (1.0 + sig2) + 2.0 * caN
        rhs[N] = 2.0 * caN * (u[N - 1] - u[N]) \
            + dt * (2.0 * aN * s / dxi + (n - 1.0) * s / r2)

        ab[0, 1:] = du[:-1]
        ab[1, :] = d
        ab[2, :-1] = dl[1:]
        delta = solve_banded((1, 1), ab, rhs, check_finite=False)
        unew = u + delta

        if not np.all(np.isfinite(unew)) or not np.all(unew > 0.0):
            return False, it, unew, r_p, rd_p
        r_new = profile_value(kind, p0, unew[N])
        if not np.isfinite(r_new) or r_new <= 0.0:
            return False, it, unew, r_p, rd_p
        if abs(r_new - r) > R_JUMP_MAX * r:
            return False, it, unew, r_p, rd_p

        duN = abs(unew[N] - upic[N])
        r_p = r_new
        upic = unew.copy()
        if duN <= picard_tol * (1.0 + abs(unew[N])):
            return True, it, unew, r_p, (r_p - r) / dt

    return False, picard_max, unew, r_p, (r_p - r) / dt


FD_NOISE_ULPS = 1024.0 * 2.220446049250313e-16


def _curv_diag_full(u, r, n, dxi, sigp, uNdot):
    """Shared curvature diagnostics; see the numba backend for the scheme."""
    N = u.shape[0] - 1
    r2 = r * r
    dxi2 = dxi * dxi
    H = np.empty(N + 1)
    A2 = np.empty(N + 1)

    uscale = max(abs(u[0]), abs(u[N]))
    fl_wp = FD_NOISE_ULPS * uscale / (dxi * r)
    fl_wpp = FD_NOISE_ULPS * uscale / (dxi2 * r2)

    wpp0 = 2.0 * (u[1] - u[0]) / dxi2 / r2
    if abs(wpp0) < fl_wpp:
        wpp0 = 0.0
    H[0] = -n * wpp0
    A2[0] = n * wpp0 * wpp0

    wp = (u[2:] - u[:-2]) / (2.0 * dxi) / r
    wp[np.abs(wp) < fl_wp] = 0.0
    wpp = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dxi2 / r2
    wpp[np.abs(wpp) < fl_wpp] = 0.0
    y = np.arange(1, N) * dxi * r
    v2 = 1.0 + wp * wp
    v = np.sqrt(v2)
    H[1:N] = -wpp / (v2 * v) - (n - 1.0) * wp / (v * y)
    A2[1:N] = wpp * wpp / (v2 * v2 * v2) + (n - 1.0) * wp * wp / (v2 * y * y)

    uxi = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dxi)
    ratio = sigp / r
    v2b = 1.0 + sigp * sigp
    vb = np.sqrt(v2b)
    if np.isfinite(uNdot):
        Hb = -vb * uNdot
        radial = (n - 1.0) * ratio / vb - Hb
        H[N] = Hb
        A2[N] = radial * radial + (n - 1.0) * ratio * ratio / v2b
    else:
        wppb = (2.0 * u[N] - 5.0 * u[N - 1] + 4.0 * u[N - 2] - u[N - 3]) \
            / dxi2 / r2
        if abs(wppb) < fl_wpp:
            wppb = 0.0
        H[N] = -wppb / (v2b * vb) + (n - 1.0) * ratio / vb
        A2[N] = wppb * wppb / (v2b * v2b * v2b) \
            + (n - 1.0) * ratio * ratio / v2b

    arg = int(np.argmax(A2))
    sup = float(A2[arg])
    neu = abs(uxi / r + sigp)
    neu_valid = fl_wp <= 1e-3 * (1.0 + abs(sigp))
    flag = A2[N] >= sup * (1.0 - ARGMAX_TOL)
    return H, A2, sup, arg, float(H[N]), float(neu), bool(neu_valid), bool(flag)


def curvature_diag(u, r, n, dxi, sigp, uNdot=float("nan")):
    """Returns (H, A2, supA2, argmax, H_boundary, neumann_residual, flag)."""
    H, A2, sup, arg, Hb, neu, _, flag = _curv_diag_full(u, r, n, dxi, sigp, uNdot)
    return H, A2, sup, arg, Hb, neu, flag


def advance(u, cursor, params, limits, buffers, scratch):
    """Chunked run loop; mutates ``u`` and ``buffers`` in place.

    Same protocol as the numba backend.  ``scratch`` is accepted for
    signature compatibility and ignored.
    """
    r, t_hi, t_lo, rdot, uNdot, dt_prev, steps_done, last_rec_t = cursor
    (n, kind, p0, dxi, cfl, dt_min, dt_max, picard_tol, picard_max) = params
    (r_stop, a2_stop, t_stop, snap_a2, snap_t, stride) = limits
    out_t, out_r, out_uN, out_A2, out_Hb, out_dt, out_flag = buffers

    nbuf = out_t.shape[0]
    n_out = 0
    accepted = 0
    rejected = 0
    picard_total = 0
    max_neu = 0.0
    max_slope = 0.0
    min_u = float(np.min(u))
    N = u.shape[0] - 1

    sigp = profile_deriv(kind, p0, u[N])
    _, _, supA2, _, Hb, neu, _, flag = _curv_diag_full(u, r, n, dxi, sigp, uNdot)
    status = CONTINUE

    while True:
        if r < r_stop:
            status = RADIUS_FLOOR
            break
        if supA2 > a2_stop:
            status = CURVATURE_CAP
            break
        if t_hi >= t_stop - 1e-12 * (1.0 + abs(t_stop)):
            status = HORIZON
            break
        if supA2 >= snap_a2 or t_hi >= snap_t:
            status = SNAPSHOT
            break
        if not np.isfinite(supA2):
            status = FAULT
            break

        t1 = 1.0 / supA2 if supA2 > 0.0 else np.inf
        t2 = dxi * dxi / supA2 if supA2 > 0.0 else np.inf
        t3 = r * dxi / max(abs(rdot), 1e-300)
        t4 = dxi * abs(u[N]) / max(abs(uNdot), 1e-300)
        dt = cfl * min(t1, t2, t3, t4)
        dt = min(dt, 2.0 * dt_prev, dt_max)
        dt = max(dt, dt_min)
        if t_stop < np.inf and t_hi + dt > t_stop:
            dt = t_stop - t_hi
            if dt <= 0.0:
                status = HORIZON
                break

        while True:
            ok, iters, unew, r_new, rdot_new = step_once(
                u, r, rdot, dt, n, kind, p0, dxi, picard_tol, picard_max)
            picard_total += iters
            if ok:
                break
            rejected += 1
            dt = 0.5 * dt
            if dt < dt_min:
                status = STEP_FLOOR
                break
        if status == STEP_FLOOR:
            break

        uNdot = (unew[N] - u[N]) / dt
        u[:] = unew
        mu = float(np.min(u))
        if mu < min_u:
            min_u = mu
        rdot = (r_new - r) / dt
        r = r_new
        y = dt + t_lo
        t_new = t_hi + y
        t_lo = y - (t_new - t_hi)
        t_hi = t_new
        dt_prev = dt
        accepted += 1
        steps_done += 1

        sigp = profile_deriv(kind, p0, u[N])
        _, _, supA2, _, Hb, neu, neu_ok, flag = _curv_diag_full(
            u, r, n, dxi, sigp, uNdot)
        if neu_ok:
            max_neu = max(max_neu, neu)
        max_slope = max(max_slope, abs(sigp))

        if steps_done % stride == 0 and t_hi > last_rec_t:
            out_t[n_out] = t_hi
            out_r[n_out] = r
            out_uN[n_out] = u[N]
            out_A2[n_out] = supA2
            out_Hb[n_out] = Hb
            out_dt[n_out] = dt
            out_flag[n_out] = 1 if flag else 0
            last_rec_t = t_hi
            n_out += 1
            if n_out == nbuf:
                status = CONTINUE
                break

    cursor = (r, t_hi, t_lo, rdot, uNdot, dt_prev, steps_done, last_rec_t)
    stats = (accepted, rejected, picard_total, max_neu, max_slope, min_u)
    return int(status), int(n_out), cursor, stats


def make_scratch(npts):
    return ()
