"""Support-surface profile curves and their hypothesis checkers.

A profile curve is the scalar generator ``omega_Sigma(z)`` of a rotationally
symmetric support surface.  Built-in families cover cones, powers,
``exp(-1/z**k)`` cusps, a smooth polynomial pinch, a decaying exponential and
a mollified reciprocal; each carries exact closed-form derivatives.  The
checkers operationalise the structural hypotheses used by the singularity
rate statements: the graph-condition floor, the two-sided pinching condition,
and the three certificate checks (bounded-ratio, slope-comparable and
decaying-tail conditions), all by dense log-spaced sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import _profile_math as pm
from .errors import (
    CertificateError,
    GraphConditionError,
    ProfileDomainError,
    SamplingError,
    UnsupportedProfileError,
)

SAMPLES_PER_DECADE = 512


@dataclass(frozen=True)
class ProfileCurve:
    """Profile of a support surface of revolution with exact derivatives.

    ``value_at``, ``deriv_at`` and ``second_deriv_at`` are closed-form maps of
    the axial coordinate z.  ``pinch_points`` lists the zeros of the profile,
    ``smooth_domain`` the open intervals on which the closed forms are valid.
    Instances are immutable and all evaluations are pure, so profiles can be
    shared freely across threads.
    """

    value_at: Callable[[float], float]
    deriv_at: Callable[[float], float]
    second_deriv_at: Callable[[float], float]
    pinch_points: tuple[float, ...]
    smooth_domain: tuple[tuple[float, float], ...]
    label: str
    kind: int = -1          # kernel family id; -1 means not steppable
    param: float = 0.0
    ratio_at: Optional[Callable[[float], float]] = None  # |omega'/omega|, closed form
    probe_intervals: tuple[tuple[float, float], ...] = ()
    min_positive_z: float = 0.0  # below this, evaluation underflows to zero

    def contains(self, z: float) -> bool:
        """True when z is strictly inside the smooth domain."""
        return any(lo < z < hi for lo, hi in self.smooth_domain)

    def require_interior(self, z: float) -> None:
        if not self.contains(z):
            raise ProfileDomainError(z, self.label)


def eval_profile(profile: ProfileCurve, z: float) -> tuple[float, float, float]:
    """Closed-form (value, derivative, second derivative) at an interior z."""
    profile.require_interior(z)
    return (profile.value_at(z), profile.deriv_at(z), profile.second_deriv_at(z))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Type2Certificate:
    """Constants of the bounded-ratio condition C1/z**delta <= |w'/w| <= C2/z**alpha.

    Requires 2*delta/(alpha+1) > 1; that quotient is the predicted lower
    blow-up exponent.  C1 == C2 is admissible (exactly attained by the
    exp(-1/z**k) family with alpha = delta = k+1 and C1 = C2 = k).
    """

    C1: float
    C2: float
    C3: float
    alpha: float
    delta: float
    z_check_max: float
    profile_label: Optional[str] = None

    def __post_init__(self):
        if not (0.0 < self.C1 < math.inf and self.C1 <= self.C2 < math.inf):
            raise CertificateError(f"need 0 < C1 <= C2 < inf, got C1={self.C1}, C2={self.C2}")
        if not (0.0 < self.C3 < math.inf):
            raise CertificateError(f"need 0 < C3 < inf, got C3={self.C3}")
        if not (self.alpha > 0.0 and self.delta > 0.0):
            raise CertificateError("alpha and delta must be positive")
        if not 2.0 * self.delta / (self.alpha + 1.0) > 1.0:
            raise CertificateError(
                f"need 2*delta/(alpha+1) > 1, got {2.0 * self.delta / (self.alpha + 1.0)}")
        if not self.z_check_max > 0.0:
            raise CertificateError("z_check_max must be positive")

    @property
    def predicted_exponent(self) -> float:
        return 2.0 * self.delta / (self.alpha + 1.0)


@dataclass(frozen=True)
class Type1Certificate:
    """Constants of the slope-comparability condition C1*w**sigma <= |w'| <= C2*w**sigma.

    sigma < 1 is required (the condition set is empty for sigma >= 1);
    sigma = 0 is the conical case.
    """

    sigma: float
    C1: float
    C2: float
    z_check_max: float
    profile_label: Optional[str] = None

    def __post_init__(self):
        if not self.sigma < 1.0:
            raise CertificateError(f"need sigma < 1, got {self.sigma}")
        if not (0.0 < self.C1 <= self.C2 < math.inf):
            raise CertificateError(f"need 0 < C1 <= C2 < inf, got C1={self.C1}, C2={self.C2}")
        if not self.z_check_max > 0.0:
            raise CertificateError("z_check_max must be positive")


@dataclass(frozen=True)
class Type0Certificate:
    """Constants of the decaying-tail condition |w'| <= C*w**(1+sigma), sigma > 0."""

    sigma: float
    C: float
    z_check_min: float
    profile_label: Optional[str] = None

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise CertificateError(f"need sigma > 0, got {self.sigma}")
        if not self.C > 0.0:
            raise CertificateError(f"need C > 0, got {self.C}")
        if not self.z_check_min > 0.0:
            raise CertificateError("z_check_min must be positive")


@dataclass(frozen=True)
class CheckVerdict:
    """Outcome of a sampled condition check."""

    passed: bool
    witness_z: Optional[float] = None
    witness_value: Optional[float] = None
    min_value: Optional[float] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


# ---------------------------------------------------------------------------
# checkers
# ---------------------------------------------------------------------------

_REL_SLACK = 1e-12  # inequality slack for conditions attained with equality


def graph_floor(profile: ProfileCurve, z_lo: float, z_hi: float, samples: int) -> float:
    """Sampled infimum of <nu_Sigma, e1> = 1/sqrt(1 + omega'(z)**2) on [z_lo, z_hi].

    Pinch points and domain boundaries inside the interval are approached by
    one-sided limits.  The scan is refined around the worst sample so that the
    result is monotone under interval enlargement.  Raises
    :class:`GraphConditionError` when an unbounded derivative is detected.
    """
    if not z_lo < z_hi:
        raise ValueError(f"need z_lo < z_hi, got [{z_lo}, {z_hi}]")
    if samples < 2:
        raise ValueError("need samples >= 2")

    nudge = 1e-9 * (z_hi - z_lo)
    pts = []
    for i in range(samples):
        z = z_lo + (z_hi - z_lo) * i / (samples - 1)
        if profile.contains(z):
            pts.append(z)
        else:
            for cand in (z + nudge, z - nudge):
                if z_lo <= cand <= z_hi and profile.contains(cand):
                    pts.append(cand)
    if not pts:
        raise ProfileDomainError(z_lo, profile.label)

    def absslope(z: float) -> float:
        s = abs(profile.deriv_at(z))
        if not math.isfinite(s):
            raise GraphConditionError(
                f"unbounded derivative of {profile.label} near z={z}: graph condition violated")
        return s

    best_i = 0
    best = -1.0
    for i, z in enumerate(pts):
        s = absslope(z)
        if s > best:
            best, best_i = s, i

    # golden-section refinement of the worst slope between the neighbours
    lo = pts[max(best_i - 1, 0)]
    hi = pts[min(best_i + 1, len(pts) - 1)]
    if hi > lo and profile.contains(lo) and profile.contains(hi):
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = absslope(c), absslope(d)
        for _ in range(60):
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = absslope(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = absslope(d)
        best = max(best, fc, fd)

    return 1.0 / math.sqrt(1.0 + best * best)


def _log_grid(z_min: float, z_max: float, per_decade: int) -> list[float]:
    """Descending log-spaced grid on [z_min, z_max]."""
    decades = math.log10(z_max / z_min)
    count = max(2, int(round(decades * per_decade)) + 1)
    return [z_max * 10.0 ** (-decades * i / (count - 1)) for i in range(count)]


def check_pinching_cylinder(
    profile: ProfileCurve,
    compact_set_bound: float,
    samples_per_decade: int = SAMPLES_PER_DECADE,
) -> CheckVerdict:
    """Sampled check of the two-sided pinching condition z * omega'(z) > 0.

    Requires a single pinch point at z = 0; samples a log grid on both sides
    of 0 out to ``compact_set_bound`` and one decade beyond.  A profile with
    no pinch point fails outright; more than one pinch point (or a pinch away
    from 0) is an unsupported configuration.
    """
    if len(profile.pinch_points) == 0:
        return CheckVerdict(False, detail="no pinch point: profile never reaches the axis")
    if len(profile.pinch_points) != 1 or profile.pinch_points[0] != 0.0:
        raise UnsupportedProfileError(
            f"{profile.label}: pinching check requires exactly one pinch point at z=0, "
            f"got {profile.pinch_points}")
    if compact_set_bound <= 0.0:
        raise ValueError("compact_set_bound must be positive")

    z_min = max(1e-6 * compact_set_bound, profile.min_positive_z * 1.05, 1e-300)
    grid = _log_grid(z_min, 10.0 * compact_set_bound, samples_per_decade)
    grid.reverse()  # ascending |z|

    min_val = math.inf
    for az in grid:
        for z in (az, -az):
            val = z * profile.deriv_at(z)
            if not val > 0.0:
                return CheckVerdict(False, witness_z=z, witness_value=val,
                                    detail=f"z*omega'(z) = {val} at z = {z}")
            min_val = min(min_val, val)
    return CheckVerdict(True, min_value=min_val)


def _require_pinching(profile: ProfileCurve, z_scale: float) -> None:
    verdict = check_pinching_cylinder(profile, max(1.0, z_scale), samples_per_decade=64)
    if not verdict.passed:
        raise UnsupportedProfileError(
            f"{profile.label} is not a single-pinch profile: {verdict.detail}")


def verify_type2(
    profile: ProfileCurve,
    cert: Type2Certificate,
    samples_per_decade: int = SAMPLES_PER_DECADE,
    decades: float = 6.0,
) -> CheckVerdict:
    """Check C1/z**delta <= |omega'/omega| <= C2/z**alpha and |omega'| <= C3.

    Sampled on a descending log grid in (0, z_check_max]; the witness is the
    first violating sample (largest violating z).  The grid never touches a
    pinch point exactly; a zero profile value at a sample is a sampling error.
    """
    _require_pinching(profile, cert.z_check_max)
    z_min = max(cert.z_check_max * 10.0 ** (-decades), profile.min_positive_z * 1.05)
    for z in _log_grid(z_min, cert.z_check_max, samples_per_decade):
        if profile.ratio_at is not None:
            ratio = profile.ratio_at(z)
        else:
            val = profile.value_at(z)
            if val == 0.0:
                raise SamplingError(
                    f"{profile.label}: omega_Sigma({z}) = 0 on the check grid")
            ratio = abs(profile.deriv_at(z) / val)
        lo = cert.C1 * z ** (-cert.delta)
        hi = cert.C2 * z ** (-cert.alpha)
        if ratio < lo * (1.0 - _REL_SLACK) or ratio > hi * (1.0 + _REL_SLACK):
            return CheckVerdict(False, witness_z=z, witness_value=ratio,
                                detail=f"ratio {ratio} outside [{lo}, {hi}] at z={z}")
        slope = abs(profile.deriv_at(z))
        if slope > cert.C3 * (1.0 + _REL_SLACK):
            return CheckVerdict(False, witness_z=z, witness_value=slope,
                                detail=f"|omega'| = {slope} > C3 = {cert.C3} at z={z}")
    return CheckVerdict(True)


def verify_type1(
    profile: ProfileCurve,
    cert: Type1Certificate,
    samples_per_decade: int = SAMPLES_PER_DECADE,
    decades: float = 6.0,
) -> CheckVerdict:
    """Two-sided check of C1*|omega|**sigma <= |omega'| <= C2*|omega|**sigma near 0."""
    _require_pinching(profile, cert.z_check_max)
    z_min = max(cert.z_check_max * 10.0 ** (-decades), profile.min_positive_z * 1.05)
    for az in _log_grid(z_min, cert.z_check_max, samples_per_decade):
        for z in (az, -az):
            val = abs(profile.value_at(z))
            if val == 0.0:
                raise SamplingError(
                    f"{profile.label}: omega_Sigma({z}) = 0 on the check grid")
            slope = abs(profile.deriv_at(z))
            ref = val ** cert.sigma
            if slope < cert.C1 * ref * (1.0 - _REL_SLACK) or \
               slope > cert.C2 * ref * (1.0 + _REL_SLACK):
                return CheckVerdict(
                    False, witness_z=z, witness_value=slope,
                    detail=f"|omega'| = {slope} outside "
                           f"[{cert.C1 * ref}, {cert.C2 * ref}] at z={z}")
    return CheckVerdict(True)


def verify_type0(
    profile: ProfileCurve,
    cert: Type0Certificate,
    samples_per_decade: int = SAMPLES_PER_DECADE,
) -> CheckVerdict:
    """Check |omega'| <= C*|omega|**(1+sigma) on the decaying tail.

    Sampled log-spaced on [z_check_min, 1000*z_check_min]; the profile must
    actually decay over that window.
    """
    z_lo = cert.z_check_min
    z_hi = 1000.0 * cert.z_check_min
    if not profile.value_at(z_hi) < profile.value_at(z_lo):
        raise UnsupportedProfileError(
            f"{profile.label}: profile does not decrease over [{z_lo}, {z_hi}]")
    grid = _log_grid(z_lo, z_hi, samples_per_decade)
    grid.reverse()  # ascending: first violation = smallest violating z
    for z in grid:
        val = abs(profile.value_at(z))
        slope = abs(profile.deriv_at(z))
        bound = cert.C * val ** (1.0 + cert.sigma)
        if slope > bound * (1.0 + _REL_SLACK):
            return CheckVerdict(False, witness_z=z, witness_value=slope,
                                detail=f"|omega'| = {slope} > {bound} at z={z}")
    return CheckVerdict(True)


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

_TWO_SIDED = ((-math.inf, 0.0), (0.0, math.inf))
_WHOLE_LINE = ((-math.inf, math.inf),)


def _family(kind: int, param: float, label: str, **kw) -> ProfileCurve:
    return ProfileCurve(
        value_at=lambda z: pm.profile_value(kind, param, z),
        deriv_at=lambda z: pm.profile_deriv(kind, param, z),
        second_deriv_at=lambda z: pm.profile_second(kind, param, z),
        label=label,
        kind=kind,
        param=param,
        **kw,
    )


def cone(c: float = 1.0) -> ProfileCurve:
    """Cone c*|z|: the conical pinch with constant slope c."""
    if not c > 0.0:
        raise ValueError("cone slope must be positive")
    return _family(
        pm.KIND_CONE, c, f"cone(c={c:g})",
        pinch_points=(0.0,),
        smooth_domain=_TWO_SIDED,
        ratio_at=lambda z: 1.0 / abs(z),
        probe_intervals=((-50.0, -0.05), (0.05, 50.0)),
    )


def power(a: float = 2.0) -> ProfileCurve:
    """Power |z|**a: convex pinch for a > 1, concave for a < 1."""
    if not a > 0.0:
        raise ValueError("power exponent must be positive")
    return _family(
        pm.KIND_POWER, a, f"power(a={a:g})",
        pinch_points=(0.0,),
        smooth_domain=_TWO_SIDED,
        ratio_at=lambda z: a / abs(z),
        probe_intervals=((-50.0, -0.05), (0.05, 50.0)),
    )


def expinv_max_slope(k: float) -> float:
    """Supremum of d/dz exp(-1/z**k) over z > 0, attained at (k/(k+1))**(1/k)."""
    zs = (k / (k + 1.0)) ** (1.0 / k)
    return k * zs ** (-(k + 1.0)) * math.exp(-(k + 1.0) / k)


def expinv(k: float = 1.0) -> ProfileCurve:
    """Flat cusp exp(-1/|z|**k): all derivatives vanish at the pinch."""
    if not k > 0.0:
        raise ValueError("expinv exponent must be positive")
    return _family(
        pm.KIND_EXPINV, k, f"expinv(k={k:g})",
        pinch_points=(0.0,),
        smooth_domain=_TWO_SIDED,
        ratio_at=lambda z: k * abs(z) ** (-(k + 1.0)),
        probe_intervals=((-30.0, -0.5), (0.5, 30.0)),
        min_positive_z=(1.0 / pm._EXP_FLUSH) ** (1.0 / k),
    )


def polypinch() -> ProfileCurve:
    """Smooth non-negative polynomial (z**2 - 4)**2 pinching at z = -2 and z = 2."""
    return _family(
        pm.KIND_POLYPINCH, 0.0, "polypinch()",
        pinch_points=(-2.0, 2.0),
        smooth_domain=_WHOLE_LINE,
        probe_intervals=((-5.0, 5.0),),
    )


def expdecay() -> ProfileCurve:
    """Decaying exponential exp(-z): no pinch at finite z, vanishing tail."""
    return _family(
        pm.KIND_EXPDECAY, 0.0, "expdecay()",
        pinch_points=(),
        smooth_domain=_WHOLE_LINE,
        ratio_at=lambda z: 1.0,
        probe_intervals=((0.0, 20.0),),
    )


def recip_mollified() -> ProfileCurve:
    """Monotone C2 blend of 2 - z (z <= 0.9) into 1/z (z >= 1.1)."""
    def ratio(z: float) -> float:
        return abs(pm.profile_deriv(pm.KIND_RECIP_MOLLIFIED, 0.0, z)) / \
            pm.profile_value(pm.KIND_RECIP_MOLLIFIED, 0.0, z)

    return _family(
        pm.KIND_RECIP_MOLLIFIED, 0.0, "recip_mollified()",
        pinch_points=(),
        smooth_domain=_WHOLE_LINE,
        ratio_at=ratio,
        probe_intervals=((-3.0, 0.85), (1.15, 50.0)),
    )


def cylinder(radius: float = 1.0) -> ProfileCurve:
    """Constant cylinder of the given radius (zero slope everywhere)."""
    if not radius > 0.0:
        raise ValueError("cylinder radius must be positive")
    return _family(
        pm.KIND_CYLINDER, radius, f"cylinder(radius={radius:g})",
        pinch_points=(),
        smooth_domain=_WHOLE_LINE,
        ratio_at=lambda z: 0.0,
        probe_intervals=((-50.0, 50.0),),
    )


@dataclass(frozen=True)
class ProfileFamily:
    """Registry entry: factory, parameter schema, default certificates."""

    name: str
    factory: Callable[..., ProfileCurve]
    params: dict = field(default_factory=dict)
    summary: str = ""
    default_certificates: Callable[..., dict] = lambda **kw: {}


def _cone_certs(c: float = 1.0) -> dict:
    return {"type1": Type1Certificate(sigma=0.0, C1=c, C2=c, z_check_max=1.0,
                                      profile_label=f"cone(c={c:g})")}


def _power_certs(a: float = 2.0) -> dict:
    return {"type1": Type1Certificate(sigma=1.0 - 1.0 / a, C1=a, C2=a, z_check_max=0.5,
                                      profile_label=f"power(a={a:g})")}


def _expinv_certs(k: float = 1.0) -> dict:
    return {"type2": Type2Certificate(
        C1=k, C2=k, C3=expinv_max_slope(k), alpha=k + 1.0, delta=k + 1.0,
        z_check_max=1.0, profile_label=f"expinv(k={k:g})")}


def _expdecay_certs() -> dict:
    # exp(-z) only satisfies the tail condition with sigma = 0, which is not
    # admissible; the default certificate is expected to fail the check.
    return {"type0": Type0Certificate(sigma=0.5, C=1.0, z_check_min=1.0,
                                      profile_label="expdecay()")}


def _recip_certs() -> dict:
    return {"type0": Type0Certificate(sigma=1.0, C=1.0, z_check_min=1.5,
                                      profile_label="recip_mollified()")}


REGISTRY: dict[str, ProfileFamily] = {
    "cone": ProfileFamily(
        "cone", cone, {"c": 1.0},
        "conical pinch c*|z|", _cone_certs),
    "power": ProfileFamily(
        "power", power, {"a": 2.0},
        "power-law pinch |z|**a", _power_certs),
    "expinv": ProfileFamily(
        "expinv", expinv, {"k": 1.0},
        "flat cusp exp(-1/|z|**k)", _expinv_certs),
    "polypinch": ProfileFamily(
        "polypinch", polypinch, {},
        "smooth polynomial pinch (z**2-4)**2", lambda: {}),
    "expdecay": ProfileFamily(
        "expdecay", expdecay, {},
        "decaying tail exp(-z)", _expdecay_certs),
    "recip_mollified": ProfileFamily(
        "recip_mollified", recip_mollified, {},
        "C2 mollified reciprocal 1/z tail", _recip_certs),
    "cylinder": ProfileFamily(
        "cylinder", cylinder, {"radius": 1.0},
        "constant cylinder (no pinch)", lambda **kw: {}),
}


def get_profile(key: str, **params) -> ProfileCurve:
    """Build a registered profile by key, e.g. ``get_profile('expinv', k=2)``."""
    if key not in REGISTRY:
        raise KeyError(f"unknown profile {key!r}; known: {sorted(REGISTRY)}")
    family = REGISTRY[key]
    unknown = set(params) - set(family.params)
    if unknown:
        raise ValueError(f"profile {key!r} takes {sorted(family.params)}, "
                         f"got unknown {sorted(unknown)}")
    return family.factory(**params)


def default_certificates(key: str, **params) -> dict:
    """Default certificates for a registered profile family."""
    if key not in REGISTRY:
        raise KeyError(f"unknown profile {key!r}")
    return REGISTRY[key].default_certificates(**params)
