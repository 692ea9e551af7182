"""Numba-compiled stepping kernels.

This module and :mod:`pinchflow._kernels_numpy` implement the same contract
(see ``_backend.py``): a semi-implicit backward-Euler step of the rescaled
graph equation on the unit grid, with the nonlinear boundary coupling
resolved by Picard iteration, plus a fused multi-step ``advance`` loop with
adaptive dt, stop conditions, snapshot triggers and sample recording.

Scheme notes (shared by both backends):

* unknowns u_i = omega(xi_i * r, t) on xi_i = i/N; the moving domain is fixed
  to [0, 1], which introduces the advection term xi*(rdot/r)*u_xi.
* diffusion and drift are implicit with coefficients frozen at the current
  Picard iterate; the diffusion coefficient is written 1/(r^2 + u_xi^2) to
  avoid overflowing 1/r^2 separately.
* xi = 0 is a symmetry node (ghost u_{-1} = u_1, rhs n*u_xixi/r^2); xi = 1
  carries the boundary condition u_xi(1) = -r * sigma'(u_N) through a ghost
  node, keeping the matrix tridiagonal and second order.
* the boundary radius is updated algebraically, r := omega_Sigma(u_N), inside
  the Picard loop; a step is rejected when the iteration fails to converge,
  produces a non-positive or non-finite height, or moves r by more than 25%.
* time is accumulated in compensated (Kahan) form: deep runs reach
  dt/t ~ 1e-19 which a bare float64 sum cannot advance.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from . import _profile_math as pm

# advance() status codes
CONTINUE = 0       # sample buffer full, call again
RADIUS_FLOOR = 1
CURVATURE_CAP = 2
HORIZON = 3
STEP_FLOOR = 4
SNAPSHOT = 5
FAULT = 6

# a step may not move the boundary radius by more than this fraction
R_JUMP_MAX = 0.25
# boundary counts as carrying the sup of |A|^2 when within this relative gap
ARGMAX_TOL = 1e-3

_jit = njit(cache=True, nogil=True)

profile_value = _jit(pm.profile_value)
profile_deriv = _jit(pm.profile_deriv)
profile_second = _jit(pm.profile_second)


@_jit
def _step(u, r, rdot_hint, dt, n, kind, p0, dxi,
          picard_tol, picard_max,
          unew, upic, cl, cr):
    """One semi-implicit step; returns (ok, iters, r_new, rdot_new).

    The advection velocity stays frozen at ``rdot_hint`` for the whole step
    (iterating it has unit loop gain on steep supports); the Picard loop
    iterates the Neumann slope, the radius and the frozen coefficients only.
    The linear system is solved in increment form (I - dt*L) delta = dt*L u,
    so that roundoff scales with the step increment rather than with the
    heights — with dt*L ~ 1e8 near pinch-off the direct form carries solver
    noise far above the Picard tolerance.  Coefficient assembly is fused into
    the Thomas forward sweep.  On success ``unew`` holds the accepted
    heights; ``u`` is left untouched so the caller can retry with a smaller
    dt.
    """
    N = u.shape[0] - 1
    for i in range(N + 1):
        upic[i] = u[i]
    r_p = r
    rd_p = rdot_hint
    dxi2 = dxi * dxi

    for it in range(1, picard_max + 1):
        sigp = profile_deriv(kind, p0, upic[N])
        s = -r_p * sigp
        r2 = r_p * r_p

        # fused assembly + forward elimination on the increment system
        a0 = n * dt / (r2 * dxi2)
        d0 = 1.0 + 2.0 * a0
        cl[0] = -2.0 * a0 / d0
        cr[0] = 2.0 * a0 * (u[1] - u[0]) / d0
        for i in range(1, N):
            sl = (upic[i + 1] - upic[i - 1]) / (2.0 * dxi)
            a = 1.0 / (r2 + sl * sl)
            xi = i * dxi
            b = (n - 1.0) / (r2 * xi) + xi * rd_p / r_p
            ca = dt * a / dxi2
            cb = dt * b / (2.0 * dxi)
            dli = -(ca - cb)
            m = (1.0 + 2.0 * ca) - dli * cl[i - 1]
            cl[i] = -(ca + cb) / m
            rhs = ca * (u[i + 1] - 2.0 * u[i] + u[i - 1]) \
                + cb * (u[i + 1] - u[i - 1])
            cr[i] = (rhs - dli * cr[i - 1]) / m
        # boundary row: substituting rdot = sigma' * du_N/dt turns the
        # advection term into the implicit diagonal factor (1 + sigma'^2),
        # i.e. the material derivative identity du_N/dt = -H/v; no explicit
        # radius velocity enters here.
        sig2 = sigp * sigp
        aN = 1.0 / (r2 + s * s)
        caN = dt * aN / dxi2
        dlN = -2.0 * caN
        rhsN = 2.0 * caN * (u[N - 1] - u[N]) \
            + dt * (2.0 * aN * s / dxi + (n - 1.0) * s / r2)
        m = ((1.0 + sig2) + 2.0 * caN) - dlN * cl[N - 1]
        dN = (rhsN - dlN * cr[N - 1]) / m
        uN = u[N] + dN

        ok = np.isfinite(uN) and uN > 0.0
        r_new = r_p
        if ok:
            r_new = profile_value(kind, p0, uN)
            ok = (np.isfinite(r_new) and r_new > 0.0
                  and abs(r_new - r) <= R_JUMP_MAX * r)
        if not ok:
            return False, it, r_p, (r_p - r) / dt

        # back substitution with fused positivity check
        unew[N] = uN
        dprev = dN
        for i in range(N - 1, -1, -1):
            di = cr[i] - cl[i] * dprev
            ui = u[i] + di
            unew[i] = ui
            dprev = di
            if not (ui > 0.0 and np.isfinite(ui)):
                ok = False
        if not ok:
            return False, it, r_p, (r_p - r) / dt

        duN = abs(uN - upic[N])
        r_p = r_new
        for i in range(N + 1):
            upic[i] = unew[i]
        if duN <= picard_tol * (1.0 + abs(uN)):
            return True, it, r_p, (r_p - r) / dt

    return False, picard_max, r_p, (r_p - r) / dt


# finite differences of the stored heights are indistinguishable from zero
# below this many ulps of the height scale; the pinch drives r so far below
# the heights that 1/(dxi^2 r^2) amplification would otherwise turn pure
# representation noise into fake curvature
FD_NOISE_ULPS = 1024.0 * 2.220446049250313e-16


@_jit
def _curv_diag(u, r, n, dxi, sigp, uNdot, H, A2):
    """Mean curvature and |A|^2 per node by second-order stencils.

    Interior differences below the float64 noise floor are treated as zero.
    At the boundary node the slope is the imposed Neumann value and, when
    ``uNdot`` (the boundary height velocity) is finite, H follows from the
    material derivative identity du_N/dt = -H/v — both stay accurate at
    radii where raw finite differences are pure roundoff.  Returns
    (supA2, argmax, H_boundary, neumann_residual, residual_valid,
    boundary_flag); the residual is the one-sided measure
    |u_xi(1)/r + sigma'(u_N)|, flagged invalid once the slope noise floor
    reaches 0.1% of the slope scale.
    """
    N = u.shape[0] - 1
    r2 = r * r
    dxi2 = dxi * dxi

    uscale = max(abs(u[0]), abs(u[N]))
    fl_wp = FD_NOISE_ULPS * uscale / (dxi * r)
    fl_wpp = FD_NOISE_ULPS * uscale / (dxi2 * r2)

    wpp = 2.0 * (u[1] - u[0]) / dxi2 / r2
    if abs(wpp) < fl_wpp:
        wpp = 0.0
    H[0] = -n * wpp
    A2[0] = n * wpp * wpp

    for i in range(1, N):
        wp = (u[i + 1] - u[i - 1]) / (2.0 * dxi) / r
        if abs(wp) < fl_wp:
            wp = 0.0
        wpp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / dxi2 / r2
        if abs(wpp) < fl_wpp:
            wpp = 0.0
        y = i * dxi * r
        v2 = 1.0 + wp * wp
        v = np.sqrt(v2)
        H[i] = -wpp / (v2 * v) - (n - 1.0) * wp / (v * y)
        A2[i] = wpp * wpp / (v2 * v2 * v2) + (n - 1.0) * wp * wp / (v2 * y * y)

    uxi = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dxi)
    ratio = sigp / r
    v2 = 1.0 + sigp * sigp
    v = np.sqrt(v2)
    if np.isfinite(uNdot):
        Hb = -v * uNdot
        radial = (n - 1.0) * ratio / v - Hb  # omega''/v^3
        H[N] = Hb
        A2[N] = radial * radial + (n - 1.0) * ratio * ratio / v2
    else:
        wpp = (2.0 * u[N] - 5.0 * u[N - 1] + 4.0 * u[N - 2] - u[N - 3]) \
            / dxi2 / r2
        if abs(wpp) < fl_wpp:
            wpp = 0.0
        H[N] = -wpp / (v2 * v) + (n - 1.0) * ratio / v
        A2[N] = wpp * wpp / (v2 * v2 * v2) + (n - 1.0) * ratio * ratio / v2

    sup = A2[0]
    arg = 0
    for i in range(1, N + 1):
        if A2[i] > sup:
            sup = A2[i]
            arg = i
    neu = abs(uxi / r + sigp)
    neu_valid = fl_wp <= 1e-3 * (1.0 + abs(sigp))
    flag = A2[N] >= sup * (1.0 - ARGMAX_TOL)
    return sup, arg, H[N], neu, neu_valid, flag


@_jit
def _advance(u, r, t_hi, t_lo, rdot, uNdot, dt_prev,
             n, kind, p0, dxi,
             cfl, dt_min, dt_max, picard_tol, picard_max,
             r_stop, a2_stop, t_stop, snap_a2, snap_t,
             stride, steps_done, last_rec_t,
             out_t, out_r, out_uN, out_A2, out_Hb, out_dt, out_flag,
             H, A2, unew, upic, cl, cr):
    N = u.shape[0] - 1
    nbuf = out_t.shape[0]
    n_out = 0
    accepted = 0
    rejected = 0
    picard_total = 0
    max_neu = 0.0
    max_slope = 0.0
    min_u = u[0]
    for i in range(N + 1):
        if u[i] < min_u:
            min_u = u[i]

    sigp = profile_deriv(kind, p0, u[N])
    supA2, arg, Hb, neu, neu_ok, flag = _curv_diag(u, r, n, dxi, sigp, uNdot,
                                                   H, A2)
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
        dt = cfl * min(min(t1, t2), min(t3, t4))
        if dt > 2.0 * dt_prev:
            dt = 2.0 * dt_prev
        if dt > dt_max:
            dt = dt_max
        if dt < dt_min:
            dt = dt_min
        if t_stop < np.inf and t_hi + dt > t_stop:
            dt = t_stop - t_hi
            if dt <= 0.0:
                status = HORIZON
                break

        while True:
            ok, iters, r_new, rdot_new = _step(
                u, r, rdot, dt, n, kind, p0, dxi,
                picard_tol, picard_max,
                unew, upic, cl, cr)
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

        # accept
        uNdot = (unew[N] - u[N]) / dt
        for i in range(N + 1):
            u[i] = unew[i]
            if u[i] < min_u:
                min_u = u[i]
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
        supA2, arg, Hb, neu, neu_ok, flag = _curv_diag(u, r, n, dxi, sigp,
                                                       uNdot, H, A2)
        if neu_ok and neu > max_neu:
            max_neu = neu
        if abs(sigp) > max_slope:
            max_slope = abs(sigp)

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

    return (status, n_out, r, t_hi, t_lo, rdot, uNdot, dt_prev,
            accepted, rejected, picard_total, max_neu, max_slope, min_u,
            last_rec_t, steps_done)


# ---------------------------------------------------------------------------
# python-facing wrappers (allocation, plain types)
# ---------------------------------------------------------------------------

NAME = "numba"


def step_once(u, r, rdot, dt, n, kind, p0, dxi, picard_tol, picard_max):
    """Single step; returns (ok, iters, unew, r_new, rdot_new)."""
    unew = np.empty_like(u)
    upic, cl, cr = (np.empty_like(u) for _ in range(3))
    ok, iters, r_new, rdot_new = _step(
        u, float(r), float(rdot), float(dt), float(n), int(kind), float(p0),
        float(dxi), float(picard_tol), int(picard_max),
        unew, upic, cl, cr)
    return bool(ok), int(iters), unew, float(r_new), float(rdot_new)


def curvature_diag(u, r, n, dxi, sigp, uNdot=float("nan")):
    """Returns (H, A2, supA2, argmax, H_boundary, neumann_residual, flag).

    Without ``uNdot`` the boundary falls back to one-sided differences
    (adequate until the pinch is deep).
    """
    H = np.empty_like(u)
    A2 = np.empty_like(u)
    sup, arg, Hb, neu, _, flag = _curv_diag(u, float(r), float(n), float(dxi),
                                            float(sigp), float(uNdot), H, A2)
    return H, A2, float(sup), int(arg), float(Hb), float(neu), bool(flag)


def advance(u, cursor, params, limits, buffers, scratch):
    """Chunked run loop; mutates ``u`` and ``buffers`` in place.

    ``cursor`` carries (r, t_hi, t_lo, rdot, uNdot, dt_prev, steps_done,
    last_rec_t); returns (status, n_out, new_cursor, stats).
    """
    r, t_hi, t_lo, rdot, uNdot, dt_prev, steps_done, last_rec_t = cursor
    (n, kind, p0, dxi, cfl, dt_min, dt_max, picard_tol, picard_max) = params
    (r_stop, a2_stop, t_stop, snap_a2, snap_t, stride) = limits
    out_t, out_r, out_uN, out_A2, out_Hb, out_dt, out_flag = buffers
    H, A2, unew, upic, cl, cr = scratch

    (status, n_out, r, t_hi, t_lo, rdot, uNdot, dt_prev,
     accepted, rejected, picard_total, max_neu, max_slope, min_u,
     last_rec_t, steps_done) = _advance(
        u, float(r), float(t_hi), float(t_lo), float(rdot), float(uNdot),
        float(dt_prev),
        float(n), int(kind), float(p0), float(dxi),
        float(cfl), float(dt_min), float(dt_max), float(picard_tol),
        int(picard_max),
        float(r_stop), float(a2_stop), float(t_stop), float(snap_a2),
        float(snap_t),
        int(stride), int(steps_done), float(last_rec_t),
        out_t, out_r, out_uN, out_A2, out_Hb, out_dt, out_flag,
        H, A2, unew, upic, cl, cr)

    cursor = (r, t_hi, t_lo, rdot, uNdot, dt_prev, steps_done, last_rec_t)
    stats = (accepted, rejected, picard_total, max_neu, max_slope, min_u)
    return int(status), int(n_out), cursor, stats


def make_scratch(npts):
    """Preallocate the scratch arrays reused across advance() calls."""
    return tuple(np.empty(npts) for _ in range(6))
