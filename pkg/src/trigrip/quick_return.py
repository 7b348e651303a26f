"""Finger-unit kinematics of the quick-return mechanism.

One finger is modelled in the base frame of its unit: the gripper center is
the origin, the fixed outer pin sits at (0, r_op), and the inner pin is
carried by the rotational plate at radius r_ip and plate angle theta_ip. The
finger body is pinned to the plate at the inner pin and slides over the outer
pin, so its orientation follows the outer-pin-to-inner-pin line; the
cylindrical fingertip is rigidly attached to it.

The three fingers of the gripper are identical copies of this unit rotated
120 degrees about the origin, so all single-finger math lives here and is
rotated on demand by consumers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import MalformedInputError, OutOfRangeError, UnreachableRadiusError

RADIUS_TOL = 1e-9  # mm
_DIFF_STEP = 1e-6  # rad, central-difference step for the speed ratio


@dataclass(frozen=True)
class FingerGeometry:
    """Design parameters of one finger unit (lengths mm, angles rad)."""

    r_op: float  # gripper center to outer pin
    r_ip: float  # gripper center to inner pin
    l_ft: float  # inner pin to fingertip center
    phi2: float  # fixed angle between the pin line and the fingertip link
    r_ft: float  # fingertip cylinder radius
    theta_ip_closed: float
    theta_ip_open: float

    def __post_init__(self):
        for name in ("r_op", "r_ip", "l_ft", "r_ft"):
            if getattr(self, name) <= 0:
                raise MalformedInputError(f"{name} must be positive")
        if not self.theta_ip_closed < self.theta_ip_open:
            raise MalformedInputError("theta_ip_closed must be below theta_ip_open")
        if abs(self.r_op - self.r_ip) >= self.l_ft:
            raise MalformedInputError("fingertip link too short to reach near the center")

    @classmethod
    def default(cls) -> "FingerGeometry":
        """Reference design: 42.5 mm gripper radius, 77 mm graspable width."""
        return cls(
            r_op=35.0,
            r_ip=26.0,
            l_ft=26.2,
            phi2=np.radians(58.0),
            r_ft=3.5,
            theta_ip_closed=np.radians(74.5),
            theta_ip_open=np.radians(105.0),
        )


@dataclass(frozen=True)
class FingertipSample:
    """One evaluated stroke point."""

    theta_ip: float
    p_ft: np.ndarray
    radial_distance: float
    speed_ratio: float


def _check_range(g: FingerGeometry, theta_ip, extrapolate: bool):
    if extrapolate:
        return
    lo = g.theta_ip_closed - 1e-9
    hi = g.theta_ip_open + 1e-9
    if np.any(np.asarray(theta_ip) < lo) or np.any(np.asarray(theta_ip) > hi):
        raise OutOfRangeError(
            f"theta_ip outside stroke [{np.degrees(g.theta_ip_closed):.4g}, "
            f"{np.degrees(g.theta_ip_open):.4g}] deg"
        )


def fingertip_position(g: FingerGeometry, theta_ip, *, extrapolate: bool = False):
    """Fingertip center for a plate angle.

    ``theta_ip`` may be a scalar or an ndarray; the result has shape (..., 2).
    The fingertip link points away from the outer pin along the sliding line,
    the branch on which the fully closed pose reaches the gripper center.
    """
    _check_range(g, theta_ip, extrapolate)
    theta_ip = np.asarray(theta_ip, dtype=float)
    p_ip = g.r_ip * np.stack([np.cos(theta_ip), np.sin(theta_ip)], axis=-1)
    p_op = np.array([0.0, g.r_op])
    v = p_ip - p_op
    phi1 = np.arctan2(v[..., 1], v[..., 0])
    a = phi1 - g.phi2
    p_ft = p_ip + g.l_ft * np.stack([np.cos(a), np.sin(a)], axis=-1)
    return p_ft


def radial_distance(g: FingerGeometry, theta_ip, *, extrapolate: bool = False):
    """Distance of the fingertip center from the gripper center."""
    p = fingertip_position(g, theta_ip, extrapolate=extrapolate)
    return np.linalg.norm(p, axis=-1) if p.ndim > 1 else float(np.hypot(p[0], p[1]))


def speed_ratio(g: FingerGeometry, theta_ip, *, extrapolate: bool = False):
    """Speed-increasing ratio ||d p_ft / d theta_ip|| in mm/rad (central difference)."""
    _check_range(g, theta_ip, extrapolate)
    hi = fingertip_position(g, np.asarray(theta_ip) + _DIFF_STEP, extrapolate=True)
    lo = fingertip_position(g, np.asarray(theta_ip) - _DIFF_STEP, extrapolate=True)
    d = (hi - lo) / (2.0 * _DIFF_STEP)
    return np.linalg.norm(d, axis=-1) if d.ndim > 1 else float(np.hypot(d[0], d[1]))


def radial_range(g: FingerGeometry) -> tuple[float, float]:
    """Fingertip radial distances at the closed and open stroke ends."""
    return (
        float(radial_distance(g, g.theta_ip_closed)),
        float(radial_distance(g, g.theta_ip_open)),
    )


def graspable_width(g: FingerGeometry) -> float:
    """Largest graspable object width: twice (open reach minus fingertip radius)."""
    return 2.0 * (radial_range(g)[1] - g.r_ft)


def theta_for_radius(g: FingerGeometry, d: float) -> float:
    """Plate angle at which the fingertip radial distance equals ``d``.

    The radial map is strictly monotone over the stroke, so a bracketed root
    is guaranteed whenever ``d`` is inside the reachable band.
    """
    r_lo, r_hi = radial_range(g)
    if d < r_lo - RADIUS_TOL or d > r_hi + RADIUS_TOL:
        raise UnreachableRadiusError(
            f"radial distance {d:.6g} mm outside the reachable band "
            f"[{r_lo:.6g}, {r_hi:.6g}] mm"
        )
    if d <= r_lo + RADIUS_TOL:
        return g.theta_ip_closed
    if d >= r_hi - RADIUS_TOL:
        return g.theta_ip_open
    theta = brentq(
        lambda t: float(radial_distance(g, t, extrapolate=True)) - d,
        g.theta_ip_closed,
        g.theta_ip_open,
        xtol=1e-13,
        rtol=8.9e-16,
    )
    return float(theta)


def fingertip_sample(g: FingerGeometry, theta_ip: float) -> FingertipSample:
    p = fingertip_position(g, theta_ip)
    return FingertipSample(
        theta_ip=float(theta_ip),
        p_ft=p,
        radial_distance=float(np.hypot(p[0], p[1])),
        speed_ratio=speed_ratio(g, theta_ip),
    )
