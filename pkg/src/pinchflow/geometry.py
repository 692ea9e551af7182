"""Curvature and boundary formulas for rotationally symmetric graphs.

For a graph omega(y) rotated about the axis perpendicular to its graph
direction, with v = sqrt(1 + omega'^2):

    H    = -omega''/v^3 - (n-1) * omega'/(v*y)
    |A|^2 =  omega''^2/v^6 + (n-1) * omega'^2/(v^2*y^2)

The rotational principal curvature omega'/(v*y) has multiplicity n-1; at the
axis it degenerates and is replaced by its limit omega''(0).  The sign
convention makes H positive on a sphere with outward normal, consistent with
the flow law (velocity -H nu) and the graph normal (-omega', 1)/v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError
from .profiles import ProfileCurve


@dataclass(frozen=True)
class CurvatureField:
    """Per-node mean curvature and squared second fundamental form."""

    H: np.ndarray
    A2: np.ndarray
    sup_A2: float
    argmax_index: int


@dataclass(frozen=True)
class SlopeBound:
    """Uniform boundary slope bound implied by a graph-condition floor.

    With C_sigma a lower bound on the normal cosine <nu_Sigma, e1> =
    1/sqrt(1 + slope^2), every admissible support slope satisfies
    |slope| <= sqrt(1/C_sigma^2 - 1); the Neumann condition transfers that
    bound verbatim to the evolving graph at its boundary.
    """

    C_sigma: float
    bound: float


# ulps of the height scale below which a finite difference of the stored
# heights carries no information (see the stepping kernels)
_FD_NOISE_ULPS = 1024.0 * 2.220446049250313e-16


def curvature(state, deriv=None, second=None, profile=None) -> CurvatureField:
    """Curvature field of a graph state.

    By default the physical derivatives are formed by second-order finite
    differences on the rescaled grid (central inside, one-sided at the ends,
    symmetry ghost at the axis) — the same stencils the stepping kernels use,
    including their float64 noise floor, below which a difference of stored
    heights is treated as zero.  Passing ``deriv``/``second`` (physical
    d omega/dy and d^2 omega/dy^2 per node) overrides them, e.g. with exact
    values for closed-form states.  Passing ``profile`` substitutes the
    imposed Neumann slope for the boundary finite difference, which keeps the
    dominant rotational term exact however deep the pinch is.
    """
    u = np.asarray(state.u, dtype=float)
    r = float(state.r)
    n = float(state.n)
    if r <= 0.0:
        raise DegenerateStateError(f"boundary radius r={r} is not positive")
    N = u.shape[0] - 1
    dxi = 1.0 / N

    if (deriv is None) != (second is None):
        raise ValueError("supply both analytic derivative arrays or neither")
    analytic = deriv is not None
    if not analytic:
        uscale = max(abs(u[0]), abs(u[N]))
        fl_wp = _FD_NOISE_ULPS * uscale / (dxi * r)
        fl_wpp = _FD_NOISE_ULPS * uscale / (dxi**2 * r**2)
        wp = np.empty(N + 1)
        wpp = np.empty(N + 1)
        wp[0] = 0.0
        wpp[0] = 2.0 * (u[1] - u[0]) / dxi**2 / r**2
        wp[1:N] = (u[2:] - u[:-2]) / (2.0 * dxi) / r
        wpp[1:N] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dxi**2 / r**2
        wp[N] = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dxi) / r
        wpp[N] = (2.0 * u[N] - 5.0 * u[N - 1] + 4.0 * u[N - 2] - u[N - 3]) \
            / dxi**2 / r**2
        wp[np.abs(wp) < fl_wp] = 0.0
        wpp[np.abs(wpp) < fl_wpp] = 0.0
    else:
        wp = np.asarray(deriv, dtype=float)
        wpp = np.asarray(second, dtype=float)

    y = np.arange(N + 1) * dxi * r
    v2 = 1.0 + wp * wp
    v = np.sqrt(v2)

    H = np.empty(N + 1)
    A2 = np.empty(N + 1)
    # rotational term with the axis limit omega'/y -> omega''(0)
    H[0] = -wpp[0] - (n - 1.0) * wpp[0]
    A2[0] = wpp[0] ** 2 + (n - 1.0) * wpp[0] ** 2
    H[1:] = -wpp[1:] / (v2[1:] * v[1:]) - (n - 1.0) * wp[1:] / (v[1:] * y[1:])
    A2[1:] = wpp[1:] ** 2 / (v2[1:] * v2[1:] * v2[1:]) \
        + (n - 1.0) * wp[1:] ** 2 / (v2[1:] * y[1:] * y[1:])

    if profile is not None and not analytic:
        sigp = profile.deriv_at(float(u[N]))
        ratio = sigp / r
        v2b = 1.0 + sigp * sigp
        vb = math.sqrt(v2b)
        H[N] = -wpp[N] / (v2b * vb) + (n - 1.0) * ratio / vb
        A2[N] = wpp[N] ** 2 / (v2b * v2b * v2b) \
            + (n - 1.0) * ratio * ratio / v2b

    arg = int(np.argmax(A2))
    return CurvatureField(H=H, A2=A2, sup_A2=float(A2[arg]), argmax_index=arg)


def neumann_slope(profile: ProfileCurve, boundary_height: float) -> float:
    """Graph slope forced at the boundary: -omega_Sigma'(boundary_height)."""
    profile.require_interior(boundary_height)
    return -profile.deriv_at(boundary_height)


def boundary_gradient_bound(C_sigma: float) -> SlopeBound:
    """Slope bound sqrt(1/C_sigma^2 - 1) from a graph-condition floor in (0, 1]."""
    if not 0.0 < C_sigma <= 1.0:
        raise ValueError(f"C_sigma must lie in (0, 1], got {C_sigma}")
    bound = math.sqrt(max(1.0 / (C_sigma * C_sigma) - 1.0, 0.0))
    return SlopeBound(C_sigma=C_sigma, bound=bound)


def radius_velocity(H_boundary: float, slope_sigma: float) -> float:
    """Boundary radius speed -H * sigma' / sqrt(1 + sigma'^2).

    Follows from differentiating the boundary constraint r = omega_Sigma(u_N)
    along the flow and using the Neumann condition.
    """
    return -H_boundary * slope_sigma / math.sqrt(1.0 + slope_sigma * slope_sigma)


def boundary_height_velocity(state) -> float:
    """Total time derivative of the boundary height, -H/v at the last node.

    Finite-difference based; strictly negative whenever the boundary mean
    curvature is positive, which is the mechanism driving the pinch.
    """
    field = curvature(state)
    u = np.asarray(state.u, dtype=float)
    N = u.shape[0] - 1
    dxi = 1.0 / N
    wp = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dxi) / state.r
    v = math.sqrt(1.0 + wp * wp)
    return -float(field.H[N]) / v
