"""Closed-form evaluation of the built-in support profile families.

Every function here is written with scalar ``math`` operations only so the
numba backend can JIT-compile them unchanged while the numpy backend and the
high-level :mod:`pinchflow.profiles` wrappers call them as plain Python.

A family is identified by an integer kind plus one scalar parameter ``p0``
(families with no parameter ignore it).  One-sided families (cone, power,
expinv) are evaluated through their even extension ``f(|z|)`` so that the
two-sided pinching checks and the solver see one consistent function.
"""

from __future__ import annotations

import math

KIND_CONE = 0
KIND_POWER = 1
KIND_EXPINV = 2
KIND_POLYPINCH = 3
KIND_EXPDECAY = 4
KIND_RECIP_MOLLIFIED = 5
KIND_CYLINDER = 6

# exp(-w) for w beyond this is flushed to zero together with its derivatives;
# keeps 1/omega**2 representable in the PDE coefficients.
_EXP_FLUSH = 700.0

# blend window of the mollified reciprocal profile
_BLEND_LO = 0.9
_BLEND_HI = 1.1


def profile_value(kind, p0, z):
    if kind == KIND_CONE:
        return p0 * abs(z)
    elif kind == KIND_POWER:
        return abs(z) ** p0
    elif kind == KIND_EXPINV:
        az = abs(z)
        if az == 0.0:
            return 0.0
        w = az ** (-p0)
        if w > _EXP_FLUSH:
            return 0.0
        return math.exp(-w)
    elif kind == KIND_POLYPINCH:
        q = z * z - 4.0
        return q * q
    elif kind == KIND_EXPDECAY:
        return math.exp(-z)
    elif kind == KIND_RECIP_MOLLIFIED:
        if z <= _BLEND_LO:
            return 2.0 - z
        if z >= _BLEND_HI:
            return 1.0 / z
        f = 2.0 - z
        g = 1.0 / z
        # quintic smoothstep: C^2 with vanishing first and second
        # derivatives at both ends of the blend window
        t = (z - _BLEND_LO) / (_BLEND_HI - _BLEND_LO)
        w = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        return f + w * (g - f)
    else:  # KIND_CYLINDER
        return p0


def profile_deriv(kind, p0, z):
    if kind == KIND_CONE:
        if z == 0.0:
            return 0.0
        return p0 if z > 0.0 else -p0
    elif kind == KIND_POWER:
        if z == 0.0:
            return 0.0
        s = 1.0 if z > 0.0 else -1.0
        return s * p0 * abs(z) ** (p0 - 1.0)
    elif kind == KIND_EXPINV:
        az = abs(z)
        if az == 0.0:
            return 0.0
        w = az ** (-p0)
        if w > _EXP_FLUSH:
            return 0.0
        s = 1.0 if z > 0.0 else -1.0
        return s * p0 * az ** (-(p0 + 1.0)) * math.exp(-w)
    elif kind == KIND_POLYPINCH:
        return 4.0 * z * (z * z - 4.0)
    elif kind == KIND_EXPDECAY:
        return -math.exp(-z)
    elif kind == KIND_RECIP_MOLLIFIED:
        if z <= _BLEND_LO:
            return -1.0
        if z >= _BLEND_HI:
            return -1.0 / (z * z)
        f = 2.0 - z
        g = 1.0 / z
        fp = -1.0
        gp = -1.0 / (z * z)
        h = _BLEND_HI - _BLEND_LO
        t = (z - _BLEND_LO) / h
        w = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        wp = 30.0 * t * t * (1.0 - t) * (1.0 - t) / h
        return fp + wp * (g - f) + w * (gp - fp)
    else:  # KIND_CYLINDER
        return 0.0


def profile_second(kind, p0, z):
    if kind == KIND_CONE:
        return 0.0
    elif kind == KIND_POWER:
        if z == 0.0:
            return 0.0
        return p0 * (p0 - 1.0) * abs(z) ** (p0 - 2.0)
    elif kind == KIND_EXPINV:
        az = abs(z)
        if az == 0.0:
            return 0.0
        w = az ** (-p0)
        if w > _EXP_FLUSH:
            return 0.0
        # d/dz [k z^-(k+1) e^-w] = e^-w k z^-(k+2) (k z^-k - (k+1))
        return math.exp(-w) * p0 * az ** (-(p0 + 2.0)) * (p0 * w - (p0 + 1.0))
    elif kind == KIND_POLYPINCH:
        return 12.0 * z * z - 16.0
    elif kind == KIND_EXPDECAY:
        return math.exp(-z)
    elif kind == KIND_RECIP_MOLLIFIED:
        if z <= _BLEND_LO:
            return 0.0
        if z >= _BLEND_HI:
            return 2.0 / (z * z * z)
        f = 2.0 - z
        g = 1.0 / z
        fp = -1.0
        gp = -1.0 / (z * z)
        gpp = 2.0 / (z * z * z)
        h = _BLEND_HI - _BLEND_LO
        t = (z - _BLEND_LO) / h
        w = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        wp = 30.0 * t * t * (1.0 - t) * (1.0 - t) / h
        wpp = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (h * h)
        return wpp * (g - f) + 2.0 * wp * (gp - fp) + w * gpp
    else:  # KIND_CYLINDER
        return 0.0
