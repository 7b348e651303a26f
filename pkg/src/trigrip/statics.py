"""Quasi-static tip force through the transmission and the finger linkage.

The tip force for a cylindrical object is obtained from the moment balance of
the finger about the fixed outer pin. The contact force is taken purely
radial (the worst-case/maximum-force direction for a cylinder centered on the
gripper axis) and the plate drives the inner pin with the tangential force
tau_out / r_ip. A full force profile chains, for each object radius:

    radius -> plate angle -> output angle -> input angle at the stopper
           -> torque amplification -> plate torque -> tip force

Forces are per finger, which is also what a single-fingertip pull gauge
measures.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import ls_cvt, quick_return
from .errors import MalformedInputError, SingularConfigurationError
from .ls_cvt import CvtGeometry
from .quick_return import FingerGeometry

MOMENT_ARM_TOL = 1e-9


@dataclass(frozen=True)
class LoadCase:
    """One loading scenario.

    ``r_ob`` is the object radius for a single-point evaluation and may be
    None when the case parameterises a whole profile sweep.
    """

    tau_in: float  # motor torque, N.mm
    loss_factor: float = 1.0
    r_ob: float | None = None

    def __post_init__(self):
        if self.tau_in < 0:
            raise MalformedInputError("tau_in must be nonnegative")
        if not 0.0 < self.loss_factor <= 1.0:
            raise MalformedInputError("loss_factor must be in (0, 1]")

    @classmethod
    def default(cls) -> "LoadCase":
        return cls(tau_in=1300.0, loss_factor=1.0)


@dataclass(frozen=True)
class ForceProfile:
    """Tip force sampled over a strictly increasing object-radius grid."""

    r_ob: np.ndarray
    f_cnt: np.ndarray
    tau_in: float
    loss_factor: float
    finger: FingerGeometry
    cvt: CvtGeometry

    def __post_init__(self):
        if np.any(np.diff(self.r_ob) <= 0):
            raise MalformedInputError("sample radii must be strictly increasing")
        if not np.all(np.isfinite(self.f_cnt)) or np.any(self.f_cnt < 0):
            raise MalformedInputError("forces must be finite and nonnegative")

    def min_force(self) -> float:
        return float(self.f_cnt.min())

    def max_force(self) -> float:
        return float(self.f_cnt.max())

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("r_ob_mm,f_cnt_N\n")
        for r, f in zip(self.r_ob, self.f_cnt):
            out.write(f"{r:.6g},{f:.6g}\n")
        return out.getvalue()


@dataclass(frozen=True)
class GripperSpec:
    """Headline numbers of one gripper for cross-device comparison."""

    closing_speed: float  # mm/s
    tip_force: float  # N
    weight: float  # kg

    def __post_init__(self):
        for name in ("closing_speed", "tip_force", "weight"):
            if getattr(self, name) <= 0:
                raise MalformedInputError(f"{name} must be positive")


def tip_force(g: FingerGeometry, tau_out: float, r_ob: float) -> float:
    """Radial contact force on an object of radius ``r_ob`` for a plate torque.

    Moment balance of the finger about the outer pin: the radial contact
    force at the contact point (object surface) balances the tangential
    drive force tau_out / r_ip applied at the inner pin.
    """
    theta_ip = quick_return.theta_for_radius(g, r_ob + g.r_ft)
    p_ft = quick_return.fingertip_position(g, theta_ip)
    r = float(np.hypot(p_ft[0], p_ft[1]))
    p_hat = p_ft / r
    p_op = np.array([0.0, g.r_op])
    p_ip = g.r_ip * np.array([np.cos(theta_ip), np.sin(theta_ip)])
    # cross(p_op->cnt, p_hat) with p_cnt = r_ob * p_hat collapses to r_op * p_hat_x
    arm = g.r_op * p_hat[0]
    if abs(arm) < MOMENT_ARM_TOL:
        raise SingularConfigurationError("contact force line passes through the outer pin")
    f_ip = (tau_out / g.r_ip) * np.array([np.sin(theta_ip), -np.cos(theta_ip)])
    p_op_ip = p_ip - p_op
    moment_ip = float(p_op_ip[0] * f_ip[1] - p_op_ip[1] * f_ip[0])
    return -moment_ip / arm


def contact_force(g: FingerGeometry, cvt: CvtGeometry, case: LoadCase) -> float:
    """Tip force for one object radius through the full transmission chain."""
    if case.r_ob is None:
        raise MalformedInputError("LoadCase.r_ob is required for a single-point evaluation")
    return _chain_force(g, cvt, case.tau_in, case.loss_factor, case.r_ob)


def _chain_force(g, cvt, tau_in, loss_factor, r_ob) -> float:
    theta_ip = quick_return.theta_for_radius(g, r_ob + g.r_ft)
    theta_out = ls_cvt.output_angle_for_plate(cvt, theta_ip)
    theta_in_v = ls_cvt.solve_input_angle(cvt, theta_out, cvt.lin_v_min)
    eps = ls_cvt.amplification_ratio(cvt, theta_in_v, cvt.lin_v_min)
    tau_out = eps * tau_in * loss_factor
    return tip_force(g, tau_out, r_ob)


def force_profile(
    g: FingerGeometry,
    cvt: CvtGeometry,
    case: LoadCase,
    n_samples: int = 77,
    band: tuple[float, float] = (0.5, 38.5),
) -> ForceProfile:
    """Tip force over the graspable radius band at stopper engagement."""
    if n_samples < 2:
        raise MalformedInputError("need at least two profile samples")
    r_grid = np.linspace(band[0], band[1], n_samples)
    forces = np.array([
        _chain_force(g, cvt, case.tau_in, case.loss_factor, r) for r in r_grid
    ])
    return ForceProfile(
        r_ob=r_grid,
        f_cnt=forces,
        tau_in=case.tau_in,
        loss_factor=case.loss_factor,
        finger=g,
        cvt=cvt,
    )


def performance_score(s: GripperSpec) -> float:
    """Speed-force-per-weight figure of merit: speed * force / (weight * 1000)."""
    if s.weight <= 0:
        raise MalformedInputError("weight must be positive")
    return s.closing_speed * s.tip_force / (s.weight * 1000.0)
