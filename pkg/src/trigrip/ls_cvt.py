"""Load-sensitive CVT model.

The transmission is a five-link mechanism whose input link is split in two by
a torsion spring, so the pair behaves as a single virtual input link P2-P4 of
variable length lin_v. With lin_v held fixed the loop is a plain four-bar:

    P1 (output pivot, gripper center) --l_out-- P5
    P2 (motor pivot)                  --lin_v-- P4
    P4 --l_flt-- P5 (floating link),  P1 --l_fix-- P2 (ground)

Angles theta_in_v (of P2->P4) and theta_out (of P1->P5) are measured in the
finger-unit frame; the rotational plate is keyed to the output link, so
theta_ip = theta_out + lambda with lambda the fixed mount offset.

The load behaviour is quasi-static and two-mode: before fingertip contact the
spring keeps the split links stretched (lin_v = lin_v_max); under load the
links fold until a stopper engages (lin_v = lin_v_min), which raises the
torque amplification. The spring transient between the modes carries no
torque information (spring and stopper forces cancel internally) and is not
modelled.

The ground-pivot direction, the assembly branch and the operating window are
not recoverable from the published drawings; the defaults below are
calibrated so that the output stroke spans 30.5 deg mapped onto the plate
stroke, the stopper-engaged amplification exceeds 3 across the whole window,
and the no-load chain peaks where the fingertip speed is highest.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import geom
from .errors import (
    ClosureFailureError,
    DeadPointError,
    FoldPointError,
    MalformedInputError,
)

LOOP_TOL = 1e-9  # mm
DEAD_COS_TOL = 1e-9


class CvtMode(enum.Enum):
    NO_LOAD = "no_load"
    STOPPER_ENGAGED = "stopper_engaged"


@dataclass(frozen=True)
class CvtGeometry:
    """Link lengths and mounting of the transmission (lengths mm, angles rad)."""

    l_in1: float
    l_in2: float
    l_fix: float
    l_flt: float
    l_out: float
    lambda_: float  # mount offset: theta_ip = theta_out + lambda_
    lin_v_max: float  # spring-rest virtual input link length
    lin_v_min: float  # stopper-engaged length
    ground_angle: float  # direction of P1 -> P2 in the finger-unit frame
    branch: int  # assembly branch sign, +1 or -1
    theta_in_range: tuple[float, float]  # no-load input angles at (closed, open)

    def __post_init__(self):
        for name in ("l_in1", "l_in2", "l_fix", "l_flt", "l_out"):
            if getattr(self, name) <= 0:
                raise MalformedInputError(f"{name} must be positive")
        if not (0 < self.lin_v_min <= self.lin_v_max <= self.l_in1 + self.l_in2 + 1e-9):
            raise MalformedInputError(
                "need 0 < lin_v_min <= lin_v_max <= l_in1 + l_in2"
            )
        if self.branch not in (-1, 1):
            raise MalformedInputError("branch must be +1 or -1")
        # reachability: the loop must assemble at the window ends in both modes
        for theta_in in self.theta_in_range:
            theta_out = solve_output_angle(self, theta_in, self.lin_v_max)
            solve_input_angle(self, theta_out, self.lin_v_min)

    @property
    def p1(self) -> np.ndarray:
        return np.zeros(2)

    @property
    def p2(self) -> np.ndarray:
        return self.l_fix * geom.unit_from_angle(self.ground_angle)

    @classmethod
    def default(cls) -> "CvtGeometry":
        """Reference transmission; see the module docstring for the calibration."""
        return cls(
            l_in1=8.5,
            l_in2=11.0,
            l_fix=23.0,
            l_flt=24.0,
            l_out=9.0,
            lambda_=np.radians(4.3),
            lin_v_max=19.5,
            lin_v_min=_DEFAULT_LIN_V_MIN,
            ground_angle=np.radians(_DEFAULT_GROUND_ANGLE_DEG),
            branch=_DEFAULT_BRANCH,
            theta_in_range=(
                np.radians(_DEFAULT_THETA_IN_CLOSED_DEG),
                np.radians(_DEFAULT_THETA_IN_OPEN_DEG),
            ),
        )


@dataclass(frozen=True)
class CvtState:
    """One solved transmission configuration."""

    mode: CvtMode
    theta_in_v: float
    theta_out: float
    lin_v: float
    theta1: float  # between input link and the floating-link normal
    theta2: float  # between output link and the floating-link normal
    eps_amp: float


def ideal_ratios(lin_v: float, l_out: float, theta1: float, theta2: float):
    """Ideal torque and speed ratios of the transmission.

    torque_ratio = (l_out cos theta2) / (lin_v cos theta1); the speed ratio is
    its reciprocal, so their product is exactly 1 (lossless transmission).
    """
    c1, c2 = np.cos(theta1), np.cos(theta2)
    if abs(c1) < DEAD_COS_TOL or abs(c2) < DEAD_COS_TOL:
        raise DeadPointError("transmission angle at 90 degrees")
    torque = (l_out * c2) / (lin_v * c1)
    return float(torque), float(1.0 / torque)


def _p4(g: CvtGeometry, theta_in_v: float, lin_v: float) -> np.ndarray:
    return g.p2 + lin_v * geom.unit_from_angle(theta_in_v)


def _select_branch(g: CvtGeometry, p4: np.ndarray, candidates) -> np.ndarray:
    if not candidates:
        raise ClosureFailureError("floating link cannot reach the output link")
    if len(candidates) == 1:
        raise FoldPointError("closure at a fold point; assembly branch ambiguous")
    for p5 in candidates:
        if np.sign(geom.cross2(g.p1 - p4, p5 - p4)) == g.branch:
            return p5
    raise FoldPointError("no closure solution on the configured assembly branch")


def solve_output_angle(g: CvtGeometry, theta_in_v: float, lin_v: float) -> float:
    """Output-link angle for a given virtual-input-link angle (position closure)."""
    p4 = _p4(g, theta_in_v, lin_v)
    candidates = geom.circle_circle_intersection(p4, g.l_flt, g.p1, g.l_out)
    p5 = _select_branch(g, p4, candidates)
    return float(np.arctan2(p5[1], p5[0]))


def solve_input_angle(g: CvtGeometry, theta_out: float, lin_v: float) -> float:
    """Virtual-input-link angle that closes the loop at a given output angle."""
    p5 = g.p1 + g.l_out * geom.unit_from_angle(theta_out)
    candidates = geom.circle_circle_intersection(g.p2, lin_v, p5, g.l_flt)
    if not candidates:
        raise ClosureFailureError("input link cannot reach the floating link")
    if len(candidates) == 1:
        raise FoldPointError("closure at a fold point; assembly branch ambiguous")
    for p4 in candidates:
        if np.sign(geom.cross2(g.p1 - p4, p5 - p4)) == g.branch:
            d = p4 - g.p2
            return float(np.arctan2(d[1], d[0]))
    raise FoldPointError("no closure solution on the configured assembly branch")


def amplification_ratio(g: CvtGeometry, theta_in_v: float, lin_v: float) -> float:
    """Torque amplification (e_n45 . p15) / (e_n45 . p24).

    e_n45 is the unit normal of the floating link; the ratio equals
    d theta_in_v / d theta_out of the position closure (ideal power balance).
    """
    p4 = _p4(g, theta_in_v, lin_v)
    candidates = geom.circle_circle_intersection(p4, g.l_flt, g.p1, g.l_out)
    p5 = _select_branch(g, p4, candidates)
    p45 = p5 - p4
    e_n45 = geom.rot90(p45) / g.l_flt
    p15 = p5 - g.p1
    p24 = p4 - g.p2
    den = float(np.dot(e_n45, p24))
    if abs(den) < 1e-12:
        raise DeadPointError("input link parallel to the floating link")
    return float(np.dot(e_n45, p15)) / den


def cvt_state(g: CvtGeometry, theta_in_v: float, mode: CvtMode) -> CvtState:
    """Solve one configuration and package the interior angles with it."""
    lin_v = g.lin_v_max if mode is CvtMode.NO_LOAD else g.lin_v_min
    p4 = _p4(g, theta_in_v, lin_v)
    candidates = geom.circle_circle_intersection(p4, g.l_flt, g.p1, g.l_out)
    p5 = _select_branch(g, p4, candidates)
    p45 = p5 - p4
    e_n45 = geom.rot90(p45) / g.l_flt
    p15 = p5 - g.p1
    p24 = p4 - g.p2
    num = float(np.dot(e_n45, p15))
    den = float(np.dot(e_n45, p24))
    if abs(den) < 1e-12:
        raise DeadPointError("input link parallel to the floating link")
    theta1 = float(np.arccos(np.clip(den / lin_v, -1.0, 1.0)))
    theta2 = float(np.arccos(np.clip(num / g.l_out, -1.0, 1.0)))
    residual = np.linalg.norm((p24 + p45) - ((g.p1 - g.p2) + p15))
    if residual > LOOP_TOL:
        raise ClosureFailureError(f"loop residual {residual:.3g} mm")
    return CvtState(
        mode=mode,
        theta_in_v=float(theta_in_v),
        theta_out=float(np.arctan2(p5[1], p5[0])),
        lin_v=lin_v,
        theta1=theta1,
        theta2=theta2,
        eps_amp=num / den,
    )


def joint_positions(g: CvtGeometry, theta_in_v: float, lin_v: float) -> dict[str, np.ndarray]:
    """All five joints for one configuration.

    The elbow P3 of the split input link admits two mirror poses; the one
    farther from the gripper center is returned (conservative for the
    packaging-envelope check).
    """
    p4 = _p4(g, theta_in_v, lin_v)
    candidates = geom.circle_circle_intersection(p4, g.l_flt, g.p1, g.l_out)
    p5 = _select_branch(g, p4, candidates)
    elbows = geom.circle_circle_intersection(g.p2, g.l_in1, p4, g.l_in2)
    if not elbows:
        raise ClosureFailureError("split input links cannot span lin_v")
    p3 = max(elbows, key=lambda p: float(np.hypot(p[0], p[1])))
    return {"p1": g.p1, "p2": g.p2, "p3": p3, "p4": p4, "p5": p5}


def plate_angle(g: CvtGeometry, theta_out: float) -> float:
    """Plate angle driven by the output link (affine mount map)."""
    return theta_out + g.lambda_


def output_angle_for_plate(g: CvtGeometry, theta_ip: float) -> float:
    """Inverse of the mount map."""
    return theta_ip - g.lambda_


def no_load_speed_ratio(g: CvtGeometry, theta_in_v: float) -> float:
    """d theta_out / d theta_in_v at spring rest (reciprocal of the amplification)."""
    return 1.0 / amplification_ratio(g, theta_in_v, g.lin_v_max)


def solve_output_angle_many(
    theta_in: np.ndarray,
    lin_v: float,
    l_fix: float,
    l_flt: float,
    l_out: float,
    ground_angle: float,
    branch: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised closure used by the design searches.

    Returns (theta_out, valid); invalid entries (unassemblable or off-branch)
    are NaN with valid False instead of raising.
    """
    theta_in = np.asarray(theta_in, dtype=float)
    p2 = l_fix * np.array([np.cos(ground_angle), np.sin(ground_angle)])
    p4 = p2 + lin_v * np.stack([np.cos(theta_in), np.sin(theta_in)], axis=-1)
    # circles: center p4 radius l_flt, center origin radius l_out
    d = np.linalg.norm(p4, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        a = (l_flt**2 - l_out**2 + d**2) / (2.0 * d)
        hsq = l_flt**2 - a**2
        valid = (d > geom.COINCIDENCE_TOL) & (hsq > 0.0)
        h = np.sqrt(np.where(valid, hsq, np.nan))
        u = -p4 / d[..., None]  # from p4 toward the origin
        mid = p4 + a[..., None] * u
        perp = np.stack([-u[..., 1], u[..., 0]], axis=-1)
        p5 = mid + branch * h[..., None] * perp
        theta_out = np.arctan2(p5[..., 1], p5[..., 0])
    # branch sign of the chosen solution: cross(p1 - p4, p5 - p4) = branch * h * d
    theta_out = np.where(valid, theta_out, np.nan)
    return theta_out, valid


def amplification_many(
    theta_in: np.ndarray,
    lin_v: float,
    l_fix: float,
    l_flt: float,
    l_out: float,
    ground_angle: float,
    branch: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised torque amplification; NaN where the loop does not close."""
    theta_in = np.asarray(theta_in, dtype=float)
    p2 = l_fix * np.array([np.cos(ground_angle), np.sin(ground_angle)])
    p4 = p2 + lin_v * np.stack([np.cos(theta_in), np.sin(theta_in)], axis=-1)
    d = np.linalg.norm(p4, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        a = (l_flt**2 - l_out**2 + d**2) / (2.0 * d)
        hsq = l_flt**2 - a**2
        valid = (d > geom.COINCIDENCE_TOL) & (hsq > 0.0)
        h = np.sqrt(np.where(valid, hsq, np.nan))
        u = -p4 / d[..., None]
        mid = p4 + a[..., None] * u
        perp = np.stack([-u[..., 1], u[..., 0]], axis=-1)
        p5 = mid + branch * h[..., None] * perp
        p45 = p5 - p4
        num = -p45[..., 1] * p5[..., 0] + p45[..., 0] * p5[..., 1]
        p24 = p4 - p2
        den = -p45[..., 1] * p24[..., 0] + p45[..., 0] * p24[..., 1]
        eps = num / den
    eps = np.where(valid & (np.abs(den) > 1e-12), eps, np.nan)
    return eps, valid & (np.abs(den) > 1e-12)


# Calibrated defaults (see module docstring). lin_v_min sits just above the
# physical fold of the split input links (|l_in2 - l_in1| = 2.5 mm), which is
# also where l_out / lin_v_min first exceeds the 3x amplification target. The
# ground angle and branch make the stopper-engaged amplification exceed 3
# across the whole mapped window while the tip-force profile stays inside
# [50, 120] N at 1300 N.mm drive torque.
_DEFAULT_LIN_V_MIN = 2.51
_DEFAULT_GROUND_ANGLE_DEG = 172.8
_DEFAULT_BRANCH = 1
_DEFAULT_THETA_IN_CLOSED_DEG = 72.917149
_DEFAULT_THETA_IN_OPEN_DEG = 86.172869
