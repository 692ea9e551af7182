"""Independent ground truth for validating the solver and the analysis.

The workhorse is the origin-centred shrinking sphere on a cone through the
origin: substituting omega(y, t) = sqrt(R(t)^2 - y^2) into the graph flow
gives omega_t = -n/omega pointwise, hence R R' = -n and

    R(t) = sqrt(R0^2 - 2 n t),   T = R0^2 / (2 n).

The sphere meets every cone through the origin orthogonally (its normal is
radial), so it is an exact solution of the sliding-boundary problem with
boundary radius r(t) = c R(t) / sqrt(1 + c^2) on a cone of slope c, and
|A|^2 = n / R^2 uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solver import GraphState, StopReason, Trajectory, rescaled_rhs


@dataclass(frozen=True)
class SphereSolution:
    """Closed-form shrinking sphere of initial radius R0 on a cone of given slope."""

    R0: float
    n: int
    cone_slope: float = 1.0

    @property
    def T_exact(self) -> float:
        return self.R0 ** 2 / (2.0 * self.n)

    def R(self, t):
        return np.sqrt(self.R0 ** 2 - 2.0 * self.n * np.asarray(t, dtype=float))

    def r(self, t):
        c = self.cone_slope
        return self.R(t) * c / math.sqrt(1.0 + c * c)

    def u_boundary(self, t):
        return self.R(t) / math.sqrt(1.0 + self.cone_slope ** 2)

    def supA2(self, t):
        return self.n / self.R(t) ** 2


def sphere_state(R0: float, n: int, t: float, cone_slope: float,
                 N: int) -> GraphState:
    """Exact sphere solution sampled on the rescaled grid at time t < T."""
    sol = SphereSolution(R0=R0, n=n, cone_slope=cone_slope)
    if not t < sol.T_exact:
        raise ValueError(f"t={t} is past the exact singular time {sol.T_exact}")
    R = float(sol.R(t))
    r = float(sol.r(t))
    xi = np.linspace(0.0, 1.0, N + 1)
    u = np.sqrt(R * R - (xi * r) ** 2)
    return GraphState(t=t, n=n, r=r, u=u)


def sphere_derivatives(state: GraphState) -> tuple[np.ndarray, np.ndarray]:
    """Analytic physical derivatives (omega_y, omega_yy) of a sphere state.

    For omega = sqrt(R^2 - y^2): omega_y = -y/omega, omega_yy = -R^2/omega^3,
    with R^2 recovered from the state itself.
    """
    y = state.grid * state.r
    u = state.u
    R2 = u[0] ** 2
    return -y / u, -R2 / u ** 3


def pde_residual(state: GraphState, state_next: GraphState) -> float:
    """Truncation probe between two consecutive states.

    Max over interior nodes of |du/dt - rhs(midpoint)|, normalised by
    max(1, sup|rhs|); the midpoint state carries the averaged heights and
    radius and the finite-difference radius speed.
    """
    dt = state_next.t - state.t
    if not dt > 0.0:
        raise ValueError("states must be consecutive in time")
    mid = GraphState(t=0.5 * (state.t + state_next.t), n=state.n,
                     r=0.5 * (state.r + state_next.r),
                     u=0.5 * (state.u + state_next.u))
    r_dot = (state_next.r - state.r) / dt
    rhs = rescaled_rhs(mid, r_dot)
    dudt = (state_next.u - state.u) / dt
    err = np.max(np.abs(dudt[1:-1] - rhs[1:-1]))
    return float(err / max(1.0, np.max(np.abs(rhs[1:-1]))))


def synthetic_trajectory(p: float, T: float, noise: float,
                         samples: int, seed: int = 0) -> Trajectory:
    """Power-law test trajectory: supA2 = (T-t)^-p * (1+eta), r = (T-t)^(1/2).

    Sample times are log-spaced in T - t over four decades and eta is uniform
    multiplicative noise from a fixed-seed generator; use it to validate the
    fitting pipeline against a known exponent and singular time.
    """
    if not (p > 0.0 and T > 0.0):
        raise ValueError("need p > 0 and T > 0")
    if samples < 10:
        raise ValueError("need at least 10 samples")
    d = np.logspace(math.log10(0.9 * T), math.log10(0.9 * T) - 4.0, samples)
    t = T - d
    rng = np.random.default_rng(seed)
    eta = rng.uniform(-noise, noise, size=samples) if noise > 0.0 \
        else np.zeros(samples)
    supA2 = d ** (-p) * (1.0 + eta)
    r = np.sqrt(d)
    dt = np.empty(samples)
    dt[1:] = np.diff(t)
    dt[0] = dt[1]
    return Trajectory(
        t=t, r=r, u_boundary=r.copy(), supA2=supA2,
        H_boundary=-np.sqrt(supA2), dt=dt,
        argmax_at_boundary=np.ones(samples, dtype=bool),
        snapshots=[], stop_reason=StopReason.RADIUS_FLOOR,
        stats={"accepted": samples, "rejected": 0},
        meta={"profile_label": f"synthetic(p={p:g})", "synthetic": True,
              "p_true": p, "T_true": T, "noise": noise, "seed": seed})
