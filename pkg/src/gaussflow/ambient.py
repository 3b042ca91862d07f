"""Closed-form geometry of the Gaussian ambient space.

The ambient space is Euclidean space of dimension ``m + p`` carrying the
conformal metric ``exp(-|x|^2 / m) * (flat metric)``.  This module provides
the two quantities the flow machinery needs in closed form: the sectional
curvature along a coordinate 2-plane and the conformal mean curvature
relation between the flat and weighted metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AxisError, OverflowGuard, UnsupportedParam

# binary64 overflows near exp(709); callers treat a raised guard as a
# position-blow-up signal, never as silent saturation
EXP_GUARD = 700.0


@dataclass(frozen=True)
class GaussianAmbient:
    """Ambient space parameters.

    Parameters
    ----------
    dim_total : int
        Dimension of the surrounding Euclidean space (>= m + 1).
    m : int
        Intrinsic dimension entering the conformal factor exp(-|x|^2/m).
    a : float
        Generalized conformal exponent; a = 1 recovers the standard
        Gaussian metric.
    """

    dim_total: int
    m: int
    a: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise UnsupportedParam(f"m must be >= 1, got {self.m}")
        if self.dim_total < self.m + 1:
            raise UnsupportedParam(
                f"dim_total must be >= m+1 = {self.m + 1}, got {self.dim_total}"
            )
        if not self.a > 0:
            raise UnsupportedParam(f"a must be positive, got {self.a}")


def as_ambient_vector(x, dim_total: int | None = None) -> np.ndarray:
    """Validate and return a finite float64 vector."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise UnsupportedParam(f"ambient vector must be 1-d, got shape {v.shape}")
    if dim_total is not None and v.shape[0] != dim_total:
        raise UnsupportedParam(
            f"ambient vector has {v.shape[0]} components, expected {dim_total}"
        )
    if not np.all(np.isfinite(v)):
        raise UnsupportedParam("ambient vector has non-finite components")
    return v


def sectional_curvature(ambient: GaussianAmbient, x, A: int, B: int) -> float:
    """Sectional curvature of the Gaussian metric along the (e_A, e_B) plane.

    Evaluates (1/m) * exp(|x|^2/m) * (2 - (1/m) * sum_{C != A,B} x_C^2).
    The sign equals the sign of the bracket; the value is unbounded below
    as the transverse coordinates grow.

    Raises
    ------
    AxisError
        If A == B or either axis index is out of range.
    UnsupportedParam
        If the ambient has a != 1 (the closed form is only established
        for the standard metric).
    OverflowGuard
        If |x|^2/m exceeds the binary64 exponent guard.
    """
    if ambient.a != 1.0:
        raise UnsupportedParam("sectional_curvature requires a = 1 in v1")
    v = as_ambient_vector(x, ambient.dim_total)
    n = ambient.dim_total
    if A == B or not (0 <= A < n) or not (0 <= B < n):
        raise AxisError(f"axes must be distinct and in [0, {n}), got A={A}, B={B}")
    m = float(ambient.m)
    norm_sq = float(v @ v)
    exponent = norm_sq / m
    if exponent >= EXP_GUARD:
        raise OverflowGuard(exponent)
    transverse = norm_sq - v[A] ** 2 - v[B] ** 2
    return (1.0 / m) * np.exp(exponent) * (2.0 - transverse / m)


def gaussian_mean_curvature(ambient: GaussianAmbient, H, F_perp, F2: float) -> np.ndarray:
    """Mean curvature vector with respect to the Gaussian metric.

    Combines the flat mean curvature vector with the normal component of
    the position vector: exp(a*F2/m) * (H + F_perp), componentwise.

    Raises
    ------
    UnsupportedParam
        If F2 is negative or non-finite.
    OverflowGuard
        If a*F2/m exceeds the exponent guard; callers must stop (the
        position is in the blow-up regime).
    """
    h = as_ambient_vector(H, ambient.dim_total)
    fp = as_ambient_vector(F_perp, ambient.dim_total)
    if not np.isfinite(F2) or F2 < 0:
        raise UnsupportedParam(f"F2 must be finite and >= 0, got {F2}")
    exponent = ambient.a * float(F2) / ambient.m
    if exponent >= EXP_GUARD:
        raise OverflowGuard(exponent)
    return np.exp(exponent) * (h + fp)
