"""Time integration of the rescaled graph flow on the moving domain.

The physical problem evolves omega(y, t) on (0, r(t)) by

    omega_t = omega_yy / (1 + omega_y^2) + (n-1) * omega_y / y

with the sliding-boundary coupling omega_y(r, t) = -omega_Sigma'(omega(r, t))
and r(t) = omega_Sigma(omega(r, t)).  The front-fixing substitution
u(xi, t) = omega(xi * r(t), t) maps the shrinking domain onto [0, 1] and adds
the advection term xi * (rdot/r) * u_xi; resolution then stays proportional
to the domain all the way into the pinch.  Stepping is semi-implicit
(tridiagonal solves, coefficients frozen per Picard iterate) because the
diffusion coefficient grows like 1/r^2 near pinch-off.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np

from . import _kernels_numba as status_codes
from ._backend import get_backend
from .errors import (
    ConsistencyFault,
    ConstructionError,
    NumericalBlowupError,
    StepRejected,
    UnsupportedProfileError,
)
from .geometry import CurvatureField
from .profiles import ProfileCurve

_BUFFER = 65536


@dataclass
class GraphState:
    """Evolving graph on the rescaled unit grid.

    ``u[i]`` is the height omega(xi_i * r, t) at xi_i = i/N; ``r`` is the
    boundary radius, ``n`` the ambient dimension parameter (flow of n-disks
    in R^(n+1)), and ``t`` carries length-squared units under the geometric
    scaling of the flow.
    """

    t: float
    n: int
    r: float
    u: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 1 or self.u.shape[0] < 5:
            raise ValueError("u must be a 1-d array with at least 5 nodes")
        if self.n < 2:
            raise ValueError("dimension parameter n must be >= 2")

    @property
    def N(self) -> int:
        return self.u.shape[0] - 1

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.u.shape[0])

    @property
    def u_boundary(self) -> float:
        return float(self.u[-1])

    def copy(self) -> "GraphState":
        return GraphState(t=self.t, n=self.n, r=self.r, u=self.u.copy())


def state_residuals(state: GraphState, profile: ProfileCurve) -> dict:
    """Invariant residuals of a state against its support profile.

    Returns the boundary-consistency residual |r - omega_Sigma(u_N)|, the
    one-sided Neumann residual |u_xi(1)/r + omega_Sigma'(u_N)|, the one-sided
    axis slope |u_xi(0)| and the minimum height.
    """
    u = state.u
    N = state.N
    dxi = state.dx
    uxi1 = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dxi)
    uxi0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dxi)
    return {
        "boundary_consistency": abs(state.r - profile.value_at(float(u[N]))),
        "neumann": abs(uxi1 / state.r + profile.deriv_at(float(u[N]))),
        "axis_slope": abs(uxi0),
        "min_u": float(np.min(u)),
    }


class StopReason(enum.Enum):
    RADIUS_FLOOR = "RadiusFloor"
    CURVATURE_CAP = "CurvatureCap"
    HORIZON = "Horizon"
    STEP_FLOOR = "StepFloor"


@dataclass
class SolverConfig:
    """Run controls.

    ``r_stop`` defaults to 1e-4 of the initial radius when left unset; the
    default curvature cap and step floor leave at least four decades of
    remaining time for exponent fitting.  ``max_samples`` bounds the recorded
    series: when exceeded, every other sample is dropped and the recording
    stride doubles, which keeps near log-uniform coverage of the approach to
    the singular time.
    """

    N: int = 200
    dt_init: float = 1e-6
    dt_min: float = 1e-14
    dt_max: float = math.inf
    cfl_safety: float = 0.2
    r_stop: Optional[float] = None
    A2_stop: float = 1e10
    t_stop: float = math.inf
    picard_tol: float = 1e-11
    picard_max: int = 25
    snapshot_schedule: str = "dyadic"
    max_snapshots: int = 64
    max_samples: int = 262144

    def __post_init__(self):
        if self.N < 16:
            raise ValueError(f"N must be >= 16, got {self.N}")
        if not (0.0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError(
                f"need 0 < dt_min <= dt_init <= dt_max, got "
                f"{self.dt_min}, {self.dt_init}, {self.dt_max}")
        if not 0.0 < self.cfl_safety < 1.0:
            raise ValueError("cfl_safety must lie in (0, 1)")
        if self.r_stop is not None and not self.r_stop > 0.0:
            raise ValueError("r_stop must be positive")
        if not self.A2_stop > 0.0:
            raise ValueError("A2_stop must be positive")
        if not self.t_stop > 0.0:
            raise ValueError("t_stop must be positive")
        if self.picard_max < 1:
            raise ValueError("picard_max must be >= 1")
        if not self.picard_tol > 0.0:
            raise ValueError("picard_tol must be positive")
        if self.snapshot_schedule not in ("dyadic", "uniform"):
            raise ValueError("snapshot_schedule must be 'dyadic' or 'uniform'")
        if self.max_samples < 1000:
            raise ValueError("max_samples must be >= 1000")


@dataclass
class Trajectory:
    """Recorded time series of a run plus full-state snapshots.

    The sample arrays share an index: (t, r, u_boundary, supA2, H_boundary,
    dt, argmax_at_boundary).  ``argmax_at_boundary`` marks samples whose
    boundary node attains sup|A|^2 within 0.1% (ties included, since exact
    spherical solutions have constant |A|^2).
    """

    t: np.ndarray
    r: np.ndarray
    u_boundary: np.ndarray
    supA2: np.ndarray
    H_boundary: np.ndarray
    dt: np.ndarray
    argmax_at_boundary: np.ndarray
    snapshots: list
    stop_reason: StopReason
    stats: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.shape[0]

    def samples(self) -> Iterator[tuple]:
        for i in range(len(self)):
            yield (self.t[i], self.r[i], self.u_boundary[i], self.supA2[i],
                   self.H_boundary[i], self.dt[i],
                   bool(self.argmax_at_boundary[i]))


def rescaled_rhs(state: GraphState, r_dot: float) -> np.ndarray:
    """du/dt on the unit grid for a given boundary-radius speed.

    Interior nodes carry diffusion, rotational drift and the front-fixing
    advection; the axis entry is the symmetry limit n * u_xixi / r^2.  The
    boundary entry is evaluated with one-sided differences as a diagnostic —
    in the scheme that node is governed by the Neumann coupling.
    """
    u = state.u
    r = state.r
    n = state.n
    N = state.N
    dxi = state.dx
    xi = state.grid
    rhs = np.empty(N + 1)

    rhs[0] = n * (2.0 * (u[1] - u[0]) / dxi**2) / r**2
    uxi = (u[2:] - u[:-2]) / (2.0 * dxi)
    uxixi = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dxi**2
    rhs[1:N] = uxixi / (r * r + uxi * uxi) \
        + (n - 1.0) * uxi / (r * r * xi[1:N]) \
        + xi[1:N] * (r_dot / r) * uxi
    uxiN = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dxi)
    uxixiN = (2.0 * u[N] - 5.0 * u[N - 1] + 4.0 * u[N - 2] - u[N - 3]) / dxi**2
    rhs[N] = uxixiN / (r * r + uxiN * uxiN) + (n - 1.0) * uxiN / (r * r) \
        + (r_dot / r) * uxiN

    bad = np.flatnonzero(~np.isfinite(rhs))
    if bad.size:
        raise NumericalBlowupError(int(bad[0]))
    return rhs


def _require_steppable(profile: ProfileCurve) -> None:
    if profile.kind < 0:
        raise UnsupportedProfileError(
            f"{profile.label}: only registered closed-form families can be stepped")


def step(state: GraphState, dt: float, profile: ProfileCurve,
         picard_tol: float = 1e-11, picard_max: int = 25,
         r_dot: Optional[float] = None) -> GraphState:
    """Advance one semi-implicit step; raises :class:`StepRejected` on failure.

    The Picard loop iterates the boundary slope u_xi(1) = -r * sigma'(u_N)
    and the algebraic radius update r = omega_Sigma(u_N) to ``picard_tol`` on
    the boundary height.  The front-fixing advection velocity is frozen per
    step: pass the current ``r_dot`` when known (as the run loop does), else
    a predictor pass with zero velocity supplies it.  Callers are expected to
    halve dt and retry on rejection.
    """
    _require_steppable(profile)
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    backend = get_backend()
    if r_dot is None:
        ok, iters, _, _, rd_est = backend.step_once(
            state.u, state.r, 0.0, dt, float(state.n), profile.kind,
            profile.param, state.dx, picard_tol, picard_max)
        if not ok:
            raise StepRejected(
                f"predictor step dt={dt} rejected after {iters} Picard iterations")
        r_dot = rd_est
    ok, iters, unew, r_new, _ = backend.step_once(
        state.u, state.r, float(r_dot), dt, float(state.n), profile.kind,
        profile.param, state.dx, picard_tol, picard_max)
    if not ok:
        raise StepRejected(
            f"step dt={dt} rejected after {iters} Picard iterations")
    return GraphState(t=state.t + dt, n=state.n, r=r_new, u=unew)


def adapt_dt(state: GraphState, curv: CurvatureField, config: SolverConfig,
             r_dot: float = 0.0, uN_dot: float = 0.0) -> float:
    """Adaptive step from the blow-up scale and boundary motion.

    dt = cfl * min(1/sup|A|^2, dxi^2/sup|A|^2, r*dxi/|rdot|, dxi*u_N/|uNdot|),
    clamped to [dt_min, dt_max].  The dxi^2/sup|A|^2 term keeps the temporal
    error at the spatial order while the curvature scale shrinks, and
    guarantees sup|A|^2 * dt <= cfl; the velocity terms keep the boundary
    from crossing more than a cell per step.
    """
    sup = curv.sup_A2
    t1 = 1.0 / sup if sup > 0.0 else math.inf
    t2 = state.dx**2 / sup if sup > 0.0 else math.inf
    t3 = state.r * state.dx / max(abs(r_dot), 1e-300)
    t4 = state.dx * abs(state.u_boundary) / max(abs(uN_dot), 1e-300)
    dt = config.cfl_safety * min(t1, t2, t3, t4)
    return min(max(dt, config.dt_min), config.dt_max)


def make_initial_cap(profile: ProfileCurve, boundary_height: float,
                     n: int, N: int) -> GraphState:
    """Circular-arc initial graph meeting the support orthogonally.

    The cap is the axis-centred sphere piece through the boundary point
    (r0, h) with slope -omega_Sigma'(h) there, where r0 = omega_Sigma(h); a
    zero support slope degenerates to the flat disk.  Raises
    :class:`ConstructionError` when no positive graph results.
    """
    profile.require_interior(boundary_height)
    h = float(boundary_height)
    r0 = profile.value_at(h)
    if not r0 > 0.0:
        raise ConstructionError(
            f"{profile.label}: omega_Sigma({h}) = {r0} is not a positive radius")
    sigp = profile.deriv_at(h)
    xi = np.linspace(0.0, 1.0, N + 1)
    if sigp == 0.0:
        u = np.full(N + 1, h)
    else:
        s = 1.0 if sigp > 0.0 else -1.0
        rho2 = r0 * r0 * (1.0 + sigp * sigp) / (sigp * sigp)
        b = r0 / abs(sigp)
        u = h + s * (np.sqrt(rho2 - (xi * r0) ** 2) - b)
        u[-1] = h
    if not np.all(u > 0.0):
        raise ConstructionError(
            f"{profile.label}: cap from height {h} dips below the axis plane; "
            f"try a different (larger) profile height")
    return GraphState(t=0.0, n=n, r=r0, u=u)


_STOP_BY_STATUS = {
    status_codes.RADIUS_FLOOR: StopReason.RADIUS_FLOOR,
    status_codes.CURVATURE_CAP: StopReason.CURVATURE_CAP,
    status_codes.HORIZON: StopReason.HORIZON,
    status_codes.STEP_FLOOR: StopReason.STEP_FLOOR,
}


class _SampleStore:
    """Growing sample arrays with stride-doubling decimation."""

    FIELDS = ("t", "r", "uN", "A2", "Hb", "dt", "flag")

    def __init__(self, max_samples: int):
        self.max_samples = max_samples
        self.chunks = {f: [] for f in self.FIELDS}
        self.count = 0
        self.stride = 1

    def append(self, values: dict):
        for f in self.FIELDS:
            self.chunks[f].append(np.atleast_1d(values[f]))
        self.count += len(np.atleast_1d(values["t"]))

    def maybe_decimate(self) -> bool:
        if self.count <= self.max_samples:
            return False
        for f in self.FIELDS:
            merged = np.concatenate(self.chunks[f])[::2]
            self.chunks[f] = [merged]
        self.count = self.chunks["t"][0].shape[0]
        self.stride *= 2
        return True

    def arrays(self) -> dict:
        return {f: (np.concatenate(self.chunks[f]) if self.chunks[f]
                    else np.empty(0)) for f in self.FIELDS}


def run(profile: ProfileCurve, initial: GraphState,
        config: SolverConfig) -> Trajectory:
    """Run the flow until a stop condition fires and record its trajectory.

    Stops on the radius floor, the curvature cap, the time horizon, or the
    step floor (dt halved below dt_min).  Samples are recorded every accepted
    step up to the stride decimation of ``max_samples``; snapshots follow the
    configured schedule (dyadic in sup|A|^2 by default, uniform in t when a
    finite horizon is set).  A non-finite post-acceptance state raises
    :class:`ConsistencyFault` with the state attached.
    """
    _require_steppable(profile)
    if initial.N != config.N:
        raise ValueError(
            f"initial state has N={initial.N} but config.N={config.N}")
    backend = get_backend()

    u = initial.u.copy()
    n = float(initial.n)
    dxi = initial.dx
    r_stop = config.r_stop if config.r_stop is not None else 1e-4 * initial.r

    sigp = profile.deriv_at(float(u[-1]))
    _, _, supA2, _, Hb, _, flg = backend.curvature_diag(u, initial.r, n, dxi, sigp)

    store = _SampleStore(config.max_samples)
    store.append({"t": initial.t, "r": initial.r, "uN": u[-1], "A2": supA2,
                  "Hb": Hb, "dt": 0.0, "flag": 1.0 if flg else 0.0})
    snapshots = [initial.copy()]

    if config.snapshot_schedule == "uniform" and math.isfinite(config.t_stop):
        snap_t = initial.t + (config.t_stop - initial.t) / config.max_snapshots
        snap_a2 = math.inf
    else:
        snap_t = math.inf
        snap_a2 = max(supA2, 1e-30) * 2.0

    buffers = tuple(np.empty(_BUFFER) for _ in range(6)) + \
        (np.empty(_BUFFER, dtype=np.uint8),)
    scratch = backend.make_scratch(config.N + 1)
    params = (n, profile.kind, profile.param, dxi, config.cfl_safety,
              config.dt_min, config.dt_max, config.picard_tol, config.picard_max)
    cursor = (initial.r, initial.t, 0.0, 0.0, 0.0, 0.5 * config.dt_init,
              0, initial.t)

    stats = {"accepted": 0, "rejected": 0, "picard_iterations": 0,
             "max_neumann_residual": 0.0, "max_boundary_slope": 0.0,
             "min_u": float(np.min(u))}

    while True:
        limits = (r_stop, config.A2_stop, config.t_stop, snap_a2, snap_t,
                  store.stride)
        status, n_out, cursor, chunk_stats = backend.advance(
            u, cursor, params, limits, buffers, scratch)
        if n_out:
            store.append({
                "t": buffers[0][:n_out].copy(), "r": buffers[1][:n_out].copy(),
                "uN": buffers[2][:n_out].copy(), "A2": buffers[3][:n_out].copy(),
                "Hb": buffers[4][:n_out].copy(), "dt": buffers[5][:n_out].copy(),
                "flag": buffers[6][:n_out].astype(float),
            })
            store.maybe_decimate()
        acc, rej, pic, mneu, mslope, minu = chunk_stats
        stats["accepted"] += acc
        stats["rejected"] += rej
        stats["picard_iterations"] += pic
        stats["max_neumann_residual"] = max(stats["max_neumann_residual"], mneu)
        stats["max_boundary_slope"] = max(stats["max_boundary_slope"], mslope)
        stats["min_u"] = min(stats["min_u"], minu)

        r, t_hi = cursor[0], cursor[1]
        if status == status_codes.CONTINUE:
            continue
        if status == status_codes.SNAPSHOT:
            state_now = GraphState(t=t_hi, n=initial.n, r=r, u=u.copy())
            if len(snapshots) < config.max_snapshots:
                snapshots.append(state_now)
            if snap_a2 != math.inf:
                snap_a2 *= 2.0
            if snap_t != math.inf:
                snap_t += (config.t_stop - initial.t) / config.max_snapshots
            continue
        if status == status_codes.FAULT:
            raise ConsistencyFault(
                "non-finite state after an accepted step",
                state=GraphState(t=t_hi, n=initial.n, r=r, u=u.copy()))
        break

    stop_reason = _STOP_BY_STATUS[status]
    final = GraphState(t=cursor[1], n=initial.n, r=cursor[0], u=u.copy())
    if not snapshots or snapshots[-1].t < final.t:
        snapshots.append(final.copy())

    # make sure the terminal state is in the series
    last_rec_t = cursor[7]
    if final.t > last_rec_t or stats["accepted"] == 0:
        sigp = profile.deriv_at(float(u[-1]))
        _, _, supA2, _, Hb, _, flg = backend.curvature_diag(
            u, final.r, n, dxi, sigp, cursor[4])
        store.append({"t": final.t, "r": final.r, "uN": u[-1], "A2": supA2,
                      "Hb": Hb, "dt": cursor[5], "flag": 1.0 if flg else 0.0})

    arrays = store.arrays()
    return Trajectory(
        t=arrays["t"], r=arrays["r"], u_boundary=arrays["uN"],
        supA2=arrays["A2"], H_boundary=arrays["Hb"], dt=arrays["dt"],
        argmax_at_boundary=arrays["flag"].astype(bool),
        snapshots=snapshots, stop_reason=stop_reason, stats=dict(stats),
        meta={
            "profile_label": profile.label,
            "n": initial.n,
            "N": config.N,
            "r_initial": float(initial.r),
            "u_boundary_initial": float(initial.u[-1]),
            "r_stop": r_stop,
            "A2_stop": config.A2_stop,
            "t_stop": config.t_stop,
            "cfl_safety": config.cfl_safety,
            "backend": backend.NAME,
            "sample_stride": store.stride,
            "neumann_residual_C": stats["max_neumann_residual"] / dxi**2,
        })
