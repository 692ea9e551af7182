"""Post-processing: singular-time estimation, blow-up exponent fit, and
classification of the ending into Type 0 / Type 1 / Type 2 / no finite-time
singularity.

The singular time is recovered from the radius decay (guaranteed to vanish
for pinching supports) rather than from the curvature growth, which is the
quantity under test.  All fits run in the "remaining time" frame
tau = t_last - t with the unknown offset theta = T - t_last as the fit
parameter; deep runs reach T - t twelve or more orders below T, where naive
T - t_i differences of float64 sample times would lose most of their digits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import AnalysisError, NoFiniteTimeSingularity
from .profiles import CheckVerdict, Type1Certificate, Type2Certificate
from .solver import StopReason, Trajectory


class SingularityType(enum.Enum):
    TYPE0 = "Type0"
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    NO_FINITE_TIME = "NoFiniteTimeSingularity"


@dataclass
class BoundVerdict:
    """Predicted-versus-observed record for one rate statement."""

    condition: str
    predicted: float
    observed: float
    passed: bool


@dataclass
class SingularityReport:
    """Classification summary of one run.

    ``p_fit`` is the exponent of sup|A|^2 ~ (T-t)^(-p); classifications with
    fit residual above 0.05 carry the low-confidence flag.  ``theta`` keeps
    T_est - t_last at full precision for further fitting.
    """

    type: SingularityType
    T_est: Optional[float] = None
    T_uncertainty: Optional[float] = None
    p_fit: Optional[float] = None
    p_residual: Optional[float] = None
    rate_constants: dict = dc_field(default_factory=dict)
    bound_verdicts: list = dc_field(default_factory=list)
    A2_limit: Optional[float] = None
    low_confidence: bool = False
    profile_label: str = ""
    stop_reason: str = ""
    fit_window: Optional[tuple] = None
    theta: Optional[float] = None


RESIDUAL_CONFIDENT = 0.05
TYPE1_HALF_WIDTH = 0.1
TYPE0_GROWTH_FACTOR = 2.0
TYPE1_BAND_RATIO = 10.0


def _radius_window(traj: Trajectory, decades: float) -> np.ndarray:
    r = traj.r
    return np.flatnonzero(r <= r[-1] * 10.0 ** decades)


def _theta_sse(theta: float, tau: np.ndarray, logr: np.ndarray) -> float:
    x = np.log(theta + tau)
    slope, intercept = np.polyfit(x, logr, 1)
    resid = logr - (slope * x + intercept)
    return float(resid @ resid)


def _estimate_theta(traj: Trajectory, decades: float = 2.0):
    """Offset theta = T - t_last from log r ~ q log(theta + tau) + c."""
    idx = _radius_window(traj, decades)
    if idx.size < 50:
        raise AnalysisError(
            f"need at least 50 samples in the final {decades:g} radius "
            f"decades, got {idx.size}; run deeper or record more samples")
    rw = traj.r[idx]
    slack = 1e-12 * rw[0]
    if np.any(np.diff(rw) > slack) or not rw[-1] < rw[0] * (1.0 - 1e-9):
        raise NoFiniteTimeSingularity(
            "radius is not decreasing over the final window")

    t_last = traj.t[-1]
    tau = t_last - traj.t[idx]
    logr = np.log(rw)
    width = float(tau[0])
    lo, hi = 1e-12 * width, 10.0 * width

    grid = np.geomspace(lo, hi, 200)
    sse = np.array([_theta_sse(g, tau, logr) for g in grid])
    k = int(np.argmin(sse))
    blo = grid[max(k - 1, 0)]
    bhi = grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(_theta_sse, bounds=(blo, bhi), args=(tau, logr),
                          method="bounded",
                          options={"xatol": 1e-13 * width, "maxiter": 500})
    theta = float(res.x)
    x = np.log(theta + tau)
    q, c = np.polyfit(x, logr, 1)
    return t_last, theta, float(q), float(c)


def estimate_T(traj: Trajectory, decades: float = 2.0) -> tuple[float, float]:
    """Singular-time estimate from the radius decay, with an uncertainty.

    Nonlinear least squares of log r against q*log(T - t) + c over the final
    two decades of r; the uncertainty is the spread of T across three nested
    fit windows.  Raises :class:`NoFiniteTimeSingularity` when the radius
    does not decrease over the final window.
    """
    t_last, theta, _, _ = _estimate_theta(traj, decades)
    estimates = [theta]
    for sub in (0.75 * decades, 0.5 * decades):
        try:
            estimates.append(_estimate_theta(traj, sub)[1])
        except (AnalysisError, NoFiniteTimeSingularity):
            pass
    spread = 0.5 * (max(estimates) - min(estimates))
    uncertainty = max(spread, 1e-9 * theta)
    return t_last + theta, uncertainty


def fit_exponent(traj: Trajectory, T_est: float, *, theta: Optional[float] = None,
                 window_decades: float = 2.0, skip_decades: float = 0.5):
    """Blow-up exponent of sup|A|^2 ~ (T_est - t)^(-p).

    Ordinary least squares in log-log over the final ``window_decades`` of
    T_est - t, excluding the last ``skip_decades`` (contaminated by the
    spatial resolution floor).  Returns (p_fit, rms_residual).  Pass
    ``theta`` = T_est - t_last directly when it is known to full precision.
    """
    p, resid, _, _ = _fit_exponent_detail(traj, T_est, theta=theta,
                                          window_decades=window_decades,
                                          skip_decades=skip_decades)
    return p, resid


def _fit_exponent_detail(traj: Trajectory, T_est: float,
                         theta: Optional[float] = None,
                         window_decades: float = 2.0,
                         skip_decades: float = 0.5):
    t_last = float(traj.t[-1])
    if theta is None:
        theta = T_est - t_last
    if not theta > 0.0:
        raise AnalysisError(f"T_est = {T_est} does not exceed the last sample "
                            f"time {t_last}")
    tau = t_last - traj.t
    d = theta + tau
    d_max = float(d[0])
    lo = theta * 10.0 ** skip_decades
    hi = theta * 10.0 ** (skip_decades + window_decades)
    if d_max < theta * 10.0 ** (skip_decades + 1.0):
        raise AnalysisError(
            f"only {math.log10(d_max / theta):.2f} decades of T-t available; "
            f"need at least {skip_decades + 1.0:g} — run the scenario deeper")
    hi = min(hi, d_max)
    mask = (d >= lo) & (d <= hi) & (traj.supA2 > 0.0) & np.isfinite(traj.supA2)
    if int(mask.sum()) < 10:
        raise AnalysisError("fewer than 10 samples in the fit window")
    x = np.log(d[mask])
    yv = np.log(traj.supA2[mask])
    slope, intercept = np.polyfit(x, yv, 1)
    resid = yv - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return float(-slope), rms, float(intercept), (float(lo), float(hi))


@dataclass
class FitParts:
    """Precomputed fit results handed to :func:`classify`."""

    T_est: float
    T_uncertainty: float
    theta: float
    p_fit: float
    p_residual: float
    intercept: float
    window: tuple


def _pipeline(traj: Trajectory, window_decades: float, skip_decades: float) -> FitParts:
    t_last, theta, _, _ = _estimate_theta(traj)
    T_est, unc = estimate_T(traj)
    theta = T_est - t_last if T_est - t_last > 0 else theta
    p, resid, intercept, window = _fit_exponent_detail(
        traj, T_est, theta=theta, window_decades=window_decades,
        skip_decades=skip_decades)
    return FitParts(T_est=T_est, T_uncertainty=unc, theta=theta, p_fit=p,
                    p_residual=resid, intercept=intercept, window=window)


def classify(traj: Trajectory, parts: Optional[FitParts] = None,
             window_decades: float = 2.0,
             skip_decades: float = 0.5) -> SingularityReport:
    """Classify the ending of a run.

    Horizon stops and non-decreasing radii are reported as no finite-time
    singularity (with the curvature limit when sup|A|^2 has stabilised).
    Finite-time endings are Type 0 when sup|A|^2 grew by less than a factor
    of 2 over the final decade of remaining time, Type 1 when the fitted
    exponent is within 0.1 of 1 (or below), and Type 2 when it exceeds 1.1.
    """
    label = traj.meta.get("profile_label", "")
    stop = traj.stop_reason.value

    def _no_finite() -> SingularityReport:
        half = traj.supA2[traj.t >= 0.5 * (traj.t[0] + traj.t[-1])]
        growth = float(np.max(half) / max(half[0], 1e-300)) if half.size else math.inf
        a2_limit = float(np.median(traj.supA2[-max(1, len(traj) // 10):])) \
            if growth < TYPE0_GROWTH_FACTOR else None
        return SingularityReport(
            type=SingularityType.NO_FINITE_TIME, A2_limit=a2_limit,
            rate_constants={"final_half_growth_factor": growth},
            profile_label=label, stop_reason=stop)

    if traj.stop_reason == StopReason.HORIZON:
        return _no_finite()

    if parts is None:
        try:
            parts = _pipeline(traj, window_decades, skip_decades)
        except NoFiniteTimeSingularity:
            return _no_finite()

    t_last = float(traj.t[-1])
    tau = t_last - traj.t
    d = parts.theta + tau
    final = d <= parts.theta * 10.0
    growth = float(np.max(traj.supA2[final]) / max(traj.supA2[final][0], 1e-300))

    low_confidence = parts.p_residual > RESIDUAL_CONFIDENT
    rate_constants = {
        "C_fit": float(math.exp(parts.intercept)),
        "final_decade_growth_factor": growth,
    }

    if growth < TYPE0_GROWTH_FACTOR:
        kind = SingularityType.TYPE0
        a2_limit = float(np.median(traj.supA2[final]))
    else:
        a2_limit = None
        if parts.p_fit <= 1.0 + TYPE1_HALF_WIDTH:
            kind = SingularityType.TYPE1
            if parts.p_fit < 1.0 - TYPE1_HALF_WIDTH:
                low_confidence = True
            win = (d >= parts.window[0]) & (d <= parts.window[1])
            prod = d[win] * traj.supA2[win]
            rate_constants["band_min"] = float(np.min(prod))
            rate_constants["band_max"] = float(np.max(prod))
        else:
            kind = SingularityType.TYPE2

    return SingularityReport(
        type=kind, T_est=parts.T_est, T_uncertainty=parts.T_uncertainty,
        p_fit=parts.p_fit, p_residual=parts.p_residual,
        rate_constants=rate_constants, A2_limit=a2_limit,
        low_confidence=low_confidence, profile_label=label, stop_reason=stop,
        fit_window=parts.window, theta=parts.theta)


def check_bounds(report: SingularityReport, cert) -> list[BoundVerdict]:
    """Predicted-rate verdicts for a certificate against a fitted report.

    Type 2 certificates assert p_fit >= 2*delta/(alpha+1) - 0.1; Type 1
    certificates assert the product (T-t) * sup|A|^2 varies by at most the
    fixed band ratio over the fitted window.
    """
    if report.type == SingularityType.NO_FINITE_TIME or report.p_fit is None:
        raise AnalysisError("bound checks need a finite-time classification")
    if (cert.profile_label and report.profile_label
            and cert.profile_label != report.profile_label):
        raise ValueError(
            f"certificate is for {cert.profile_label!r} but the trajectory "
            f"comes from {report.profile_label!r}")

    verdicts = []
    if isinstance(cert, Type2Certificate):
        predicted = cert.predicted_exponent
        passed = report.p_fit >= predicted - 0.1
        verdicts.append(BoundVerdict("type2_rate_lower_bound", predicted,
                                     report.p_fit, bool(passed)))
    elif isinstance(cert, Type1Certificate):
        bmin = report.rate_constants.get("band_min")
        bmax = report.rate_constants.get("band_max")
        if bmin is None or bmax is None:
            raise AnalysisError(
                "report carries no rate band; was the run classified Type1?")
        ratio = bmax / bmin
        verdicts.append(BoundVerdict("type1_rate_band", TYPE1_BAND_RATIO,
                                     float(ratio), bool(ratio <= TYPE1_BAND_RATIO)))
    else:
        raise TypeError(f"unsupported certificate type {type(cert).__name__}")
    report.bound_verdicts.extend(verdicts)
    return verdicts


def not_type0_check(traj: Trajectory) -> CheckVerdict:
    """Verify that a finite-time ending is a genuine curvature singularity.

    Passes when sup|A|^2 at the stop exceeds ten times its initial value and
    is still increasing across the final decade of the radius.
    """
    sup = traj.supA2
    grew = sup[-1] > 10.0 * sup[0]
    idx = _radius_window(traj, 1.0)
    rising = sup[-1] > sup[idx[0]] if idx.size else False
    passed = bool(grew and rising)
    return CheckVerdict(
        passed,
        detail=f"sup|A|^2: initial {sup[0]:.6g}, final {sup[-1]:.6g}, "
               f"final-decade start {sup[idx[0]] if idx.size else float('nan'):.6g}")
