"""Grasp-state taxonomy and second-order immobility analysis.

Contact states for the three synchronized radial fingers:

  A  two fingers on one face, the third on the parallel opposite face
  B  two fingers share a face whose partner face is not parallel
  C  three distinct faces, no parallel pair, both face-1 inter-side angles
     acute; the self-centering state
  D  three distinct faces containing one parallel pair
  E  any other three-face contact (normals do not positively span)
  F  symmetric cylinder grasp

Second-order immobility (frictionless rigid contacts, no motion possible) is
certified by two conditions: the inward contact normals positively span the
plane, and the three normal lines meet in a single point.

State C is realized by solving three trigonometric conditions for the
orientation angle of the grasp triangle, a contact offset along side 2 of
the enlarged face triangle, and the grasp-triangle side length; the solution
is unique, which is exactly the self-centering property.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import geom
from .errors import (
    InfeasibleContactError,
    MalformedInputError,
    NoSolutionError,
    UngraspableError,
)
from .geom import VirtualEdge

CONCURRENCY_TOL = 1e-6  # mm
EQ_RESIDUAL_TOL = 1e-9  # after normalizing lengths by l2


class StateLabel(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"


@dataclass(frozen=True)
class AngleSet:
    """Inter-side angles of the (virtual) contact triangle, radians.

    theta_sij is measured between sides i and j on the object side, i.e.
    pi minus the angle between the inward normals. For a proper triangle the
    three angles sum to pi; two parallel sides degenerate to theta_sij = 0.
    """

    theta_s12: float
    theta_s13: float
    theta_s23: float

    def __post_init__(self):
        for name in ("theta_s12", "theta_s13", "theta_s23"):
            v = getattr(self, name)
            if not 0.0 < v < np.pi:
                raise MalformedInputError(f"{name} must lie in (0, 180) degrees")

    @classmethod
    def from_normals(cls, n1, n2, n3) -> "AngleSet":
        return cls(
            theta_s12=np.pi - geom.angle_between(n1, n2),
            theta_s13=np.pi - geom.angle_between(n1, n3),
            theta_s23=np.pi - geom.angle_between(n2, n3),
        )

    def is_proper_triangle(self, tol: float = 1e-6) -> bool:
        return abs(self.theta_s12 + self.theta_s13 + self.theta_s23 - np.pi) < tol


@dataclass(frozen=True)
class StateCSolution:
    """Solved self-centering contact configuration, in the canonical frame
    (side 1 horizontal, interior above, corner of sides 1 and 2 at origin)."""

    theta_1: float  # between segment Pc2->Pc1 and the side-2 inward normal
    l_o2: float  # contact offset along side 2 from the side-1/2 corner
    l_r: float  # grasp-triangle side length
    contacts: np.ndarray  # (3, 2) fingertip centers on the virtual sides
    normals: np.ndarray  # (3, 2) inward normals
    concurrency_point: np.ndarray
    angles: AngleSet
    l2: float


def _parallel(e1: VirtualEdge, e2: VirtualEdge) -> bool:
    return abs(geom.cross2(e1.direction, e2.direction)) < geom.PARALLEL_TOL


def _opposed(e1: VirtualEdge, e2: VirtualEdge) -> bool:
    return float(np.dot(e1.normal, e2.normal)) < 0.0


def classify_triple(
    edges: tuple[VirtualEdge, VirtualEdge, VirtualEdge],
    assignment: tuple[int, int, int] = (0, 1, 2),
) -> StateLabel:
    """Classify a contact arrangement: finger i touches edges[assignment[i]].

    A repeated index means two fingers share that face. With three distinct
    faces the rule table is evaluated for the given side labeling (side i is
    the face finger i touches); consumers that are free to relabel should
    canonicalize before calling.
    """
    if len(edges) != 3 or len(assignment) != 3:
        raise MalformedInputError("need three edges and a three-finger assignment")
    distinct = sorted(set(assignment))
    if len(distinct) == 1:
        raise MalformedInputError("all three fingers on one face is not a grasp")
    if len(distinct) == 2:
        shared = max(distinct, key=assignment.count)
        other = distinct[0] if distinct[1] == shared else distinct[1]
        e_shared, e_other = edges[shared], edges[other]
        if _parallel(e_shared, e_other) and _opposed(e_shared, e_other):
            return StateLabel.A
        return StateLabel.B
    e1, e2, e3 = (edges[assignment[i]] for i in range(3))
    pairs = [(e2, e3), (e1, e2), (e1, e3)]
    parallel_flags = [_parallel(a, b) for a, b in pairs]
    if any(parallel_flags):
        # one parallel pair among three distinct faces
        if parallel_flags[0] and _opposed(e2, e3):
            return StateLabel.D
        return StateLabel.E
    angles = AngleSet.from_normals(e1.normal, e2.normal, e3.normal)
    if (
        angles.is_proper_triangle()
        and angles.theta_s12 < np.pi / 2
        and angles.theta_s13 < np.pi / 2
    ):
        return StateLabel.C
    return StateLabel.E


def check_immobility(contacts, normals) -> bool:
    """Second-order immobility test: positive span plus concurrent normal lines."""
    normals = [np.asarray(n, dtype=float) for n in normals]
    contacts = [np.asarray(c, dtype=float) for c in contacts]
    if not geom.positively_spans(*normals):
        return False
    points = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        denom = geom.cross2(normals[i], normals[j])
        if abs(denom) < geom.PARALLEL_TOL:
            return False
        points.append(
            geom.line_intersection(contacts[i], normals[i], contacts[j], normals[j])
        )
    spread = max(
        float(np.linalg.norm(points[a] - points[b])) for a, b in ((0, 1), (0, 2), (1, 2))
    )
    return spread <= CONCURRENCY_TOL


def _canonical_triangle(angles: AngleSet, l2: float):
    """Corner points, side directions and inward normals, side 1 horizontal."""
    s12, s13, s23 = angles.theta_s12, angles.theta_s13, angles.theta_s23
    l1 = l2 * np.sin(s23) / np.sin(s13)
    l3 = l2 * np.sin(s12) / np.sin(s13)
    corner12 = np.zeros(2)
    corner13 = np.array([l1, 0.0])
    corner23 = l2 * geom.unit_from_angle(s12)
    n1 = np.array([0.0, 1.0])
    n2 = np.array([np.sin(s12), -np.cos(s12)])
    n3 = np.array([-np.sin(s13), -np.cos(s13)])
    return (corner12, corner13, corner23), (l1, l2, l3), (n1, n2, n3)


def solve_state_c(angles: AngleSet, l2: float) -> StateCSolution:
    """Solve the State C contact configuration on the enlarged face triangle.

    The third condition decouples and is solved for the orientation angle by
    bracketed root finding; the remaining two conditions are linear in the
    contact offset and the grasp-triangle side. The equation's two roots per
    turn are half a turn apart and mirror the grasp-triangle sign, so the
    open (-90, 90) degree window holds exactly one root, the physical one.
    For near-equilateral face triangles it lies in (0, 60) degrees.
    """
    if l2 <= 0:
        raise MalformedInputError("l2 must be positive")
    s12, s13, s23 = angles.theta_s12, angles.theta_s13, angles.theta_s23
    if s12 >= np.pi / 2 or s13 >= np.pi / 2:
        raise NoSolutionError("state C requires both side-1 inter-side angles acute")
    if not angles.is_proper_triangle():
        raise NoSolutionError("inter-side angles do not close a triangle")
    sixty = np.pi / 3

    def decoupled(theta_1: float) -> float:
        return np.sin(s12 + s13) * np.sin(sixty + theta_1 - s12) - np.sin(
            s12 + s23
        ) * np.sin(sixty - theta_1)

    scan = np.linspace(-np.pi / 2 + 1e-9, np.pi / 2 - 1e-9, 361)
    vals = decoupled(scan)
    sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if len(sign_change) == 0:
        raise NoSolutionError("no orientation root in (-90, 90) degrees")
    k = sign_change[0]
    theta_1 = float(brentq(decoupled, scan[k], scan[k + 1], xtol=1e-15, rtol=8.9e-16))

    # remaining two conditions, linear in (l_o2, l_r)
    a = np.array([
        [np.sin(s12), -np.cos(s12 - theta_1)],
        [-np.sin(s23), -np.sin(np.radians(150.0) - s23 - theta_1)],
    ])
    b = np.array([0.0, -l2 * np.sin(s23)])
    l_o2, l_r = np.linalg.solve(a, b)
    if l_r <= 0:
        raise NoSolutionError("grasp-triangle side came out nonpositive")

    corners, sides, normals = _canonical_triangle(angles, l2)
    corner12, corner13, corner23 = corners
    l1, _, l3 = sides
    n1, n2, n3 = normals
    d2 = geom.unit_from_angle(s12)  # corner12 -> corner23
    pc2 = corner12 + l_o2 * d2
    pc1 = pc2 + l_r * geom.rotate(n2, -theta_1)
    pc3 = pc1 + geom.rotate(pc2 - pc1, -sixty)
    contacts = np.array([pc1, pc2, pc3])

    # validate incidence on sides 1 and 3 and concurrency of the normals
    res1 = abs(pc1[1]) / l2
    d3 = (corner23 - corner13) / l3
    res3 = geom.point_line_distance(pc3, corner13, d3) / l2
    if max(res1, res3) > 1e-7:
        raise NoSolutionError("contact construction failed incidence checks")
    pivot = geom.line_intersection(pc1, n1, pc2, n2)
    if not check_immobility(contacts, (n1, n2, n3)):
        raise NoSolutionError("solved contacts fail the immobility conditions")

    # contacts must lie within the enlarged triangle's own sides
    in1 = -geom.COINCIDENCE_TOL <= pc1[0] <= l1 + geom.COINCIDENCE_TOL
    in2 = -geom.COINCIDENCE_TOL <= l_o2 <= l2 + geom.COINCIDENCE_TOL
    t3 = float(np.dot(pc3 - corner13, d3))
    in3 = -geom.COINCIDENCE_TOL <= t3 <= l3 + geom.COINCIDENCE_TOL
    if not (in1 and in2 and in3):
        raise InfeasibleContactError("a contact falls outside the face triangle")

    return StateCSolution(
        theta_1=theta_1,
        l_o2=float(l_o2),
        l_r=float(l_r),
        contacts=contacts,
        normals=np.array([n1, n2, n3]),
        concurrency_point=pivot,
        angles=angles,
        l2=l2,
    )


def state_c_residuals(sol: StateCSolution) -> np.ndarray:
    """Residuals of the three State C conditions, lengths normalized by l2."""
    s12, s23 = sol.angles.theta_s12, sol.angles.theta_s23
    s13 = sol.angles.theta_s13
    sixty = np.pi / 3
    r1 = (sol.l_o2 * np.sin(s12) - sol.l_r * np.cos(s12 - sol.theta_1)) / sol.l2
    r2 = (
        (sol.l2 - sol.l_o2) * np.sin(s23)
        - sol.l_r * np.sin(np.radians(150.0) - s23 - sol.theta_1)
    ) / sol.l2
    r3 = np.sin(s12 + s13) * np.sin(sixty + sol.theta_1 - s12) - np.sin(
        s12 + s23
    ) * np.sin(sixty - sol.theta_1)
    return np.array([r1, r2, r3])


def classify_object(obj, max_radius: float) -> StateLabel:
    """State for a whole object: cylinders are the symmetric State F; polygons
    delegate to the grasp planner's enumeration."""
    from . import planner  # deferred: planner builds on this module

    if isinstance(obj, planner.Cylinder):
        if obj.radius > max_radius:
            raise UngraspableError(
                f"cylinder radius {obj.radius:.6g} mm exceeds the"
                f" graspable bound {max_radius:.6g} mm"
            )
        return StateLabel.F
    if isinstance(obj, planner.Prism):
        result = planner.plan(obj, planner.default_finger())
        return result.candidate.state
    raise MalformedInputError(f"unsupported object type {type(obj).__name__}")
