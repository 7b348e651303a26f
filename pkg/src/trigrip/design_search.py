"""Design-parameter searches for the finger unit and the transmission.

Finger search: exhaustive grid over the inner-pin radius and the fingertip
link angle, with the outer-pin radius and link length fixed. A cell is
feasible when its own stroke (from the radius where the fingertip reaches the
gripper center out to the envelope radius or the trajectory turning point)
clears the pin-to-pin spacing bound and spans the required graspable width.
Each feasible cell is scored by the peak and by the stroke-mean of the
speed-increasing ratio; the reported optimum maximizes the peak.

Transmission search: exhaustive grid over the five link lengths. A tuple is
feasible when, at the spring-rest input-link length, some contiguous input
sweep produces the required output swing while avoiding dead points and
keeping every joint inside the packaging circle; the stopper length is then
the smallest virtual-input-link length that still assembles over that window
under the same margins. The two objectives, output-link length over stopper
length (maximize, torque) and over spring-rest length (minimize, speed), are
reported as a Pareto set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import ls_cvt, quick_return
from .errors import AlignmentError, EmptyFeasibleSetError, MalformedInputError
from .ls_cvt import CvtGeometry
from .quick_return import FingerGeometry


# ---------------------------------------------------------------------------
# finger unit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FingerSearchSpace:
    r_op: float
    l_ft: float
    r_ft: float
    r_ip_grid: np.ndarray
    phi2_grid: np.ndarray  # radians
    envelope_radius: float = 42.5
    min_pin_clearance: float = 8.0
    min_width: float = 70.0

    def __post_init__(self):
        object.__setattr__(self, "r_ip_grid", np.asarray(self.r_ip_grid, dtype=float))
        object.__setattr__(self, "phi2_grid", np.asarray(self.phi2_grid, dtype=float))
        if self.r_ip_grid.size == 0 or self.phi2_grid.size == 0:
            raise MalformedInputError("search grids must be non-empty")

    @classmethod
    def default(cls) -> "FingerSearchSpace":
        return cls(
            r_op=35.0,
            l_ft=26.2,
            r_ft=3.5,
            r_ip_grid=np.arange(20.0, 32.0 + 1e-9, 0.5),
            phi2_grid=np.radians(np.arange(45.0, 70.0 + 1e-9, 0.5)),
        )


@dataclass(frozen=True)
class FingerCell:
    r_ip: float
    phi2: float  # radians
    feasible: bool
    score_peak: float  # max speed ratio over the cell stroke, mm/rad
    score_mean: float
    theta_closed: float
    theta_open: float
    width: float


@dataclass(frozen=True)
class FingerSearchResult:
    best: FingerCell  # maximizer of the peak objective
    best_mean: FingerCell  # maximizer of the stroke-mean objective
    cells: list[FingerCell]

    def surface_csv(self) -> str:
        lines = ["r_ip_mm,phi2_deg,score,feasible"]
        for c in self.cells:
            score = c.score_peak if c.feasible else float("nan")
            lines.append(
                f"{c.r_ip:.6g},{np.degrees(c.phi2):.6g},{score:.6g},{int(c.feasible)}"
            )
        return "\n".join(lines) + "\n"


_SCAN = np.radians(np.arange(20.0, 160.0 + 1e-9, 0.05))


def _evaluate_finger_cell(space: FingerSearchSpace, r_ip: float, phi2: float) -> FingerCell:
    infeasible = FingerCell(r_ip, phi2, False, float("nan"), float("nan"),
                            float("nan"), float("nan"), float("nan"))
    try:
        g = FingerGeometry(
            r_op=space.r_op, r_ip=r_ip, l_ft=space.l_ft, phi2=phi2,
            r_ft=space.r_ft, theta_ip_closed=_SCAN[0], theta_ip_open=_SCAN[-1],
        )
    except MalformedInputError:
        return infeasible
    r = np.asarray(quick_return.radial_distance(g, _SCAN, extrapolate=True))
    i_min = int(np.argmin(r))
    if r[i_min] > space.r_ft:  # trajectory must pass through the center
        return infeasible
    after = np.nonzero(r[i_min:] >= space.r_ft)[0]
    if len(after) == 0:
        return infeasible
    i_closed = i_min + int(after[0])

    # walk outward while the radial distance still increases
    seg = r[i_closed:]
    rising = np.nonzero(np.diff(seg) <= 0)[0]
    i_turn = i_closed + (int(rising[0]) if len(rising) else len(seg) - 1)
    over = np.nonzero(seg >= space.envelope_radius)[0]
    i_env = i_closed + (int(over[0]) if len(over) else len(seg) - 1)
    i_open = min(i_turn, i_env)
    if i_open <= i_closed + 1:
        return infeasible

    def radial(theta):
        return float(quick_return.radial_distance(g, theta, extrapolate=True))

    theta_closed = float(brentq(
        lambda t: radial(t) - space.r_ft,
        _SCAN[i_closed - 1], _SCAN[i_closed], xtol=1e-12,
    ))
    if i_open == i_env and len(over):
        theta_open = float(brentq(
            lambda t: radial(t) - space.envelope_radius,
            _SCAN[i_open - 1], _SCAN[i_open], xtol=1e-12,
        ))
    else:
        theta_open = float(_SCAN[i_open])

    stroke = np.linspace(theta_closed, theta_open, 256)
    # closest pin approach: sin(theta) maximal at 90 deg when the stroke covers it
    if theta_closed <= np.pi / 2 <= theta_open:
        sin_max = 1.0
    else:
        sin_max = max(np.sin(theta_closed), np.sin(theta_open))
    min_pin_dist = np.sqrt(
        g.r_ip**2 + g.r_op**2 - 2.0 * g.r_ip * g.r_op * sin_max
    )
    if min_pin_dist <= space.min_pin_clearance:
        return infeasible
    r_open = float(quick_return.radial_distance(g, theta_open, extrapolate=True))
    width = 2.0 * (r_open - space.r_ft)
    if width <= space.min_width:
        return infeasible
    ratio = np.asarray(quick_return.speed_ratio(g, stroke, extrapolate=True))
    return FingerCell(
        r_ip=r_ip, phi2=phi2, feasible=True,
        score_peak=float(ratio.max()), score_mean=float(ratio.mean()),
        theta_closed=theta_closed, theta_open=theta_open, width=width,
    )


def optimize_finger(space: FingerSearchSpace) -> FingerSearchResult:
    """Exhaustive evaluation of the finger design grid."""
    cells = [
        _evaluate_finger_cell(space, r_ip, phi2)
        for r_ip in space.r_ip_grid
        for phi2 in space.phi2_grid
    ]
    feasible = [c for c in cells if c.feasible]
    if not feasible:
        raise EmptyFeasibleSetError("no finger design satisfies the constraints")
    best = max(feasible, key=lambda c: (c.score_peak, -c.r_ip, -c.phi2))
    best_mean = max(feasible, key=lambda c: (c.score_mean, -c.r_ip, -c.phi2))
    return FingerSearchResult(best=best, best_mean=best_mean, cells=cells)


# ---------------------------------------------------------------------------
# transmission
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CvtSearchSpace:
    l_in1_grid: np.ndarray
    l_in2_grid: np.ndarray
    l_fix_grid: np.ndarray
    l_flt_grid: np.ndarray
    l_out_grid: np.ndarray
    output_swing: float = np.radians(30.5)
    envelope_radius: float = 35.0
    dead_cos_margin: float = float(np.cos(np.radians(85.0)))
    ground_angle: float = field(default_factory=lambda: CvtGeometry.default().ground_angle)
    branch: int = 1
    window: tuple[float, float] = (np.radians(70.2), np.radians(100.7))
    window_samples: int = 62
    lin_v_step: float = 0.1

    def __post_init__(self):
        for name in ("l_in1_grid", "l_in2_grid", "l_fix_grid", "l_flt_grid", "l_out_grid"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if arr.size == 0:
                raise MalformedInputError(f"{name} must be non-empty")

    @classmethod
    def default(cls) -> "CvtSearchSpace":
        """Reduced search box: the split input-link pair is fixed hardware
        (spring and stopper live on it), so only the ground, floating and
        output links vary around the reference design."""

        def around(center: float) -> np.ndarray:
            return np.arange(center - 1.0, center + 1.0 + 1e-9, 0.5)

        return cls(
            l_in1_grid=np.array([8.5]),
            l_in2_grid=np.array([11.0]),
            l_fix_grid=around(23.0),
            l_flt_grid=around(24.0),
            l_out_grid=around(9.0),
        )

    def tuples(self):
        for a in self.l_in1_grid:
            for b in self.l_in2_grid:
                for c in self.l_fix_grid:
                    for d in self.l_flt_grid:
                        for e in self.l_out_grid:
                            yield (float(a), float(b), float(c), float(d), float(e))


@dataclass(frozen=True)
class CvtCell:
    lengths: tuple[float, float, float, float, float]  # l_in1, l_in2, l_fix, l_flt, l_out
    feasible: bool
    lin_v_min: float
    torque_objective: float  # l_out / lin_v_min, larger is better
    speed_objective: float  # l_out / lin_v_max, smaller is better


@dataclass(frozen=True)
class CvtSearchResult:
    pareto: list[CvtCell]
    cells: list[CvtCell]
    reference: tuple[float, float, float, float, float] | None
    reference_feasible: bool
    reference_nondominated: bool

    def surface_csv(self) -> str:
        lines = ["l_in1_mm,l_in2_mm,l_fix_mm,l_flt_mm,l_out_mm,"
                 "torque_objective,speed_objective,feasible"]
        for c in self.cells:
            t = ",".join(f"{x:.6g}" for x in c.lengths)
            lines.append(
                f"{t},{c.torque_objective:.6g},{c.speed_objective:.6g},{int(c.feasible)}"
            )
        return "\n".join(lines) + "\n"


def _inverse_sweep(theta_out, lin_v, l_fix, l_flt, l_out, gamma, branch):
    """Vectorised inverse closure with transmission-quality outputs."""
    p2 = l_fix * np.array([np.cos(gamma), np.sin(gamma)])
    p5 = l_out * np.stack([np.cos(theta_out), np.sin(theta_out)], axis=-1)
    dv = p5 - p2
    d = np.linalg.norm(dv, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        a = (lin_v**2 - l_flt**2 + d**2) / (2.0 * d)
        hsq = lin_v**2 - a**2
        ok = (d > 1e-9) & (hsq > 0.0)
        h = np.sqrt(np.where(ok, hsq, np.nan))
        u = dv / d[..., None]
        mid = p2 + a[..., None] * u
        perp = np.stack([-u[..., 1], u[..., 0]], axis=-1)
        best_p4 = np.full_like(p5, np.nan)
        chosen = np.zeros(d.shape, dtype=bool)
        for s in (+1.0, -1.0):
            p4 = mid + s * h[..., None] * perp
            c = (-p4[..., 0]) * (p5[..., 1] - p4[..., 1]) - (-p4[..., 1]) * (
                p5[..., 0] - p4[..., 0]
            )
            match = ok & ~chosen & (np.sign(c) == branch)
            best_p4 = np.where(match[..., None], p4, best_p4)
            chosen |= match
        p4 = best_p4
        p45 = p5 - p4
        e_nx, e_ny = -p45[..., 1] / l_flt, p45[..., 0] / l_flt
        num = e_nx * p5[..., 0] + e_ny * p5[..., 1]
        den = e_nx * (p4[..., 0] - p2[0]) + e_ny * (p4[..., 1] - p2[1])
        cos1 = den / lin_v
        cos2 = num / l_out
        rad4 = np.linalg.norm(p4, axis=-1)
    return {"valid": chosen, "cos1": cos1, "cos2": cos2, "rad4": rad4, "p4": p4, "p2": p2}


def _window_ok(space: CvtSearchSpace, theta_out, lv, l_in1, l_in2, l_fix, l_flt, l_out):
    """All conditions over the shared output window at one input-link length."""
    inv = _inverse_sweep(theta_out, lv, l_fix, l_flt, l_out,
                         space.ground_angle, space.branch)
    if not inv["valid"].all():
        return False
    rad3 = _elbow_radius(inv["p2"], inv["p4"], l_in1, l_in2)
    return bool(
        np.all(np.abs(inv["cos1"]) > space.dead_cos_margin)
        and np.all(np.abs(inv["cos2"]) > space.dead_cos_margin)
        and np.all(inv["rad4"] <= space.envelope_radius)
        and np.all(rad3 <= space.envelope_radius)
        and l_fix <= space.envelope_radius
    )


def _evaluate_cvt_tuple(space: CvtSearchSpace, lengths) -> CvtCell:
    """Evaluate one length tuple in the shared mounting frame.

    Every candidate must serve the same output window (the plate stroke seen
    through the mount); the stopper length is the smallest virtual-input-link
    length that still assembles over that window with the dead-point and
    packaging margins.
    """
    l_in1, l_in2, l_fix, l_flt, l_out = lengths
    lv_max = l_in1 + l_in2
    infeasible = CvtCell(lengths, False, float("nan"), float("nan"), l_out / lv_max)

    theta_out = np.linspace(space.window[0], space.window[1], space.window_samples)
    if not _window_ok(space, theta_out, lv_max, l_in1, l_in2, l_fix, l_flt, l_out):
        return infeasible

    lv_floor = abs(l_in2 - l_in1) + space.lin_v_step
    lin_v_min = lv_max
    for lv in np.arange(lv_floor, lv_max, space.lin_v_step):
        if _window_ok(space, theta_out, float(lv), l_in1, l_in2, l_fix, l_flt, l_out):
            lin_v_min = float(lv)
            break
    return CvtCell(
        lengths=lengths,
        feasible=True,
        lin_v_min=lin_v_min,
        torque_objective=l_out / lin_v_min,
        speed_objective=l_out / lv_max,
    )



def _elbow_radius(p2, p4, l_in1, l_in2):
    """Worst-case distance of the split-link elbow from the output pivot."""
    dv = p4 - p2
    d = np.linalg.norm(dv, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.clip((l_in1**2 - l_in2**2 + d**2) / (2.0 * d), -l_in1, l_in1)
        hsq = np.maximum(l_in1**2 - a**2, 0.0)
        h = np.sqrt(hsq)
        u = dv / d[..., None]
        mid = p2 + a[..., None] * u
        perp = np.stack([-u[..., 1], u[..., 0]], axis=-1)
        r_plus = np.linalg.norm(mid + h[..., None] * perp, axis=-1)
        r_minus = np.linalg.norm(mid - h[..., None] * perp, axis=-1)
    return np.maximum(r_plus, r_minus)




def optimize_cvt(space: CvtSearchSpace, reference=None) -> CvtSearchResult:
    """Exhaustive transmission grid search with Pareto reporting.

    ``reference`` is an optional length tuple to flag for feasibility and
    nondominance (it is evaluated even if it is not a grid point).
    """
    cells = [_evaluate_cvt_tuple(space, t) for t in space.tuples()]
    feasible = [c for c in cells if c.feasible]
    if not feasible:
        raise EmptyFeasibleSetError("no transmission design satisfies the constraints")

    def dominates(a: CvtCell, b: CvtCell) -> bool:
        ge = a.torque_objective >= b.torque_objective
        le = a.speed_objective <= b.speed_objective
        strict = (a.torque_objective > b.torque_objective) or (
            a.speed_objective < b.speed_objective
        )
        return ge and le and strict

    pareto = [
        c for c in feasible if not any(dominates(o, c) for o in feasible if o is not c)
    ]

    ref_feasible = False
    ref_nondominated = False
    ref_tuple = None
    if reference is not None:
        ref_tuple = tuple(float(x) for x in reference)
        ref_cell = next(
            (c for c in cells if np.allclose(c.lengths, ref_tuple, atol=1e-9)), None
        )
        if ref_cell is None:
            ref_cell = _evaluate_cvt_tuple(space, ref_tuple)
        ref_feasible = ref_cell.feasible
        ref_nondominated = ref_feasible and not any(
            dominates(o, ref_cell) for o in feasible
        )
    return CvtSearchResult(
        pareto=pareto,
        cells=cells,
        reference=ref_tuple,
        reference_feasible=ref_feasible,
        reference_nondominated=ref_nondominated,
    )


# ---------------------------------------------------------------------------
# mount angle
# ---------------------------------------------------------------------------

def derive_lambda(
    g: CvtGeometry,
    target_theta_ip_range: tuple[float, float] = (np.radians(74.5), np.radians(105.0)),
) -> float:
    """Additive mount angle aligning the output stroke with the plate stroke.

    The two window ends give two offset estimates; their mismatch beyond one
    degree means the strokes cannot be aligned by a rigid mount.
    """
    out_lo = ls_cvt.solve_output_angle(g, g.theta_in_range[0], g.lin_v_max)
    out_hi = ls_cvt.solve_output_angle(g, g.theta_in_range[1], g.lin_v_max)
    lam_lo = target_theta_ip_range[0] - out_lo
    lam_hi = target_theta_ip_range[1] - out_hi
    if abs(lam_lo - lam_hi) > np.radians(1.0):
        raise AlignmentError(
            f"output stroke mismatch {np.degrees(abs(lam_lo - lam_hi)):.3g} deg"
        )
    return 0.5 * (lam_lo + lam_hi)
