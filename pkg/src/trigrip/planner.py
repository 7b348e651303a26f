"""Grasp planning for prisms and cylinders.

Strategy: enumerate 3-tuples of object faces that admit a frictionless-stable
grasp (states A, C, D), construct the equilateral grasping triangle of
fingertip centers for each, and emit the gripper pose for the best candidate
under the priority C > A > D. States B and E depend on friction and are never
registered.

Candidate construction works on virtual edges: the physical faces offset
outward by the fingertip radius, which is where fingertip centers lie at
contact.

Frames: object vertices live in the camera frame (x right, y up, origin at
the view center). The gripper pose is the grasping-triangle centroid plus the
signed angle from the +y axis to the nearest centroid-to-vertex ray, which is
unique modulo the 120-degree symmetry of the finger arrangement.

State A slides its triangle along the parallel face pair to the placement
nearest the polygon centroid; its two base contacts may overhang short faces
(parallel-face grasps are validated by face distance alone). States C and D
require every contact to lie on its finite virtual edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geom, immobility, quick_return
from .errors import (
    DegenerateInputError,
    InfeasibleContactError,
    MalformedInputError,
    NoPlanError,
    NoSolutionError,
)
from .geom import Edge, Triangle2, VirtualEdge
from .immobility import AngleSet, StateLabel
from .quick_return import FingerGeometry

COLLISION_TOL = 1e-6  # mm of allowed fingertip-disc penetration
_D_SWEEP_STEP = np.radians(0.5)


def default_finger() -> FingerGeometry:
    return FingerGeometry.default()


# ---------------------------------------------------------------------------
# objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cylinder:
    radius: float
    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise MalformedInputError("cylinder radius must be positive")


@dataclass(frozen=True)
class Prism:
    """Prism standing on its polygonal bottom face, vertices counterclockwise."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise MalformedInputError("prism needs at least three 2D vertices")
        if _polygon_signed_area(v) <= 0:
            raise MalformedInputError("prism vertices must be counterclockwise")
        if not _polygon_is_simple(v):
            raise MalformedInputError("prism outline must not self-intersect")


ObjectSpec = Cylinder | Prism


def object_from_json(data: dict) -> ObjectSpec:
    """Parse the object-file schema (lengths in mm)."""
    if not isinstance(data, dict) or len(data) != 1:
        raise MalformedInputError(
            "object file must contain exactly one of 'cylinder' or 'prism'"
        )
    if "cylinder" in data:
        body = data["cylinder"]
        try:
            return Cylinder(
                radius=float(body["radius_mm"]),
                center=np.asarray(body.get("center_mm", (0.0, 0.0)), dtype=float),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"bad cylinder spec: {exc}") from exc
    if "prism" in data:
        body = data["prism"]
        try:
            return Prism(vertices=np.asarray(body["vertices_mm"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"bad prism spec: {exc}") from exc
    raise MalformedInputError("object file must contain 'cylinder' or 'prism'")


def object_to_json(obj: ObjectSpec) -> dict:
    if isinstance(obj, Cylinder):
        return {"cylinder": {"radius_mm": obj.radius, "center_mm": list(obj.center)}}
    return {"prism": {"vertices_mm": [list(v) for v in obj.vertices]}}


# ---------------------------------------------------------------------------
# polygon helpers
# ---------------------------------------------------------------------------

def _polygon_signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polygon_centroid(v: np.ndarray) -> np.ndarray:
    x, y = v[:, 0], v[:, 1]
    cr = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = 0.5 * np.sum(cr)
    cx = np.sum((x + np.roll(x, -1)) * cr) / (6.0 * a)
    cy = np.sum((y + np.roll(y, -1)) * cr) / (6.0 * a)
    return np.array([cx, cy])


def _segments_cross(a, b, c, d) -> bool:
    d1 = geom.cross2(b - a, c - a)
    d2 = geom.cross2(b - a, d - a)
    d3 = geom.cross2(d - c, a - c)
    d4 = geom.cross2(d - c, b - c)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _polygon_is_simple(v: np.ndarray) -> bool:
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = v[j], v[(j + 1) % n]
            if _segments_cross(a, b, c, d):
                return False
    return True


def polygon_edges(v: np.ndarray) -> list[Edge]:
    """Directed edges of a counterclockwise polygon with inward (left) normals."""
    edges = []
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        d = geom.normalize(b - a)
        edges.append(Edge(a=a, b=b, normal=geom.rot90(d)))
    return edges


def _boundary_distance(p: np.ndarray, v: np.ndarray) -> float:
    n = len(v)
    return min(geom.point_segment_distance(p, v[i], v[(i + 1) % n]) for i in range(n))


# ---------------------------------------------------------------------------
# candidates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityFlags:
    circumradius_ok: bool
    contacts_on_edges: bool
    collision_free: bool


@dataclass(frozen=True)
class GraspCandidate:
    """One feasible grasp: per-finger edge indices, contact points (fingertip
    centers) and the equilateral grasping triangle they form."""

    edges: tuple[int, ...]
    state: StateLabel
    contacts: np.ndarray  # (3, 2), per finger
    grasp_triangle: Triangle2
    margin: float  # worst containment slack of a contact on its edge, mm
    flags: FeasibilityFlags

    def circumradius(self) -> float:
        return self.grasp_triangle.circumradius()


def _containment_slack(contact: np.ndarray, ve: VirtualEdge) -> float:
    """Signed distance-to-the-nearer-endpoint along the edge; negative outside."""
    s = float(np.dot(contact - ve.a, ve.direction))
    return min(s, ve.length - s)


def _make_candidate(
    state: StateLabel,
    edge_ids: tuple[int, int, int],
    contacts: np.ndarray,
    vedges: list[VirtualEdge],
    poly: np.ndarray,
    r_lo: float,
    r_hi: float,
    r_ft: float,
    require_containment: bool,
) -> tuple[GraspCandidate | None, bool]:
    """Validate one construction; also reports a size-only rejection."""
    tri = geom.ccw_triangle(*contacts)
    if not tri.is_equilateral(1e-6):
        return None, False
    circ = tri.circumradius()
    size_ok = r_lo - 1e-9 <= circ <= r_hi + 1e-9
    slack = min(_containment_slack(contacts[i], vedges[edge_ids[i]]) for i in range(3))
    contained = slack >= -1e-9
    clear = all(
        _boundary_distance(contacts[i], poly) >= r_ft - COLLISION_TOL for i in range(3)
    )
    flags = FeasibilityFlags(size_ok, contained, clear)
    ok = size_ok and clear and (contained or not require_containment)
    if not ok:
        size_only = (not size_ok) and clear and (contained or not require_containment)
        return None, size_only
    cand = GraspCandidate(
        edges=tuple(edge_ids),
        state=state,
        contacts=np.array(contacts, dtype=float),
        grasp_triangle=tri,
        margin=slack,
        flags=flags,
    )
    return cand, False


def _state_a_candidates(i, j, vedges, poly, centroid, r_lo, r_hi, r_ft):
    """Both 2-plus-1 placements on an opposed parallel virtual-edge pair."""
    out, size_reject = [], False
    ei, ej = vedges[i], vedges[j]
    h = abs(float(np.dot(ej.a - ei.a, ei.normal)))
    side = 2.0 * h / np.sqrt(3.0)
    for base, apex in ((i, j), (j, i)):
        eb = vedges[base]
        t0 = float(np.dot(centroid - eb.a, eb.direction))
        mid = eb.a + t0 * eb.direction
        contacts = np.array([
            mid - 0.5 * side * eb.direction,
            mid + 0.5 * side * eb.direction,
            mid + h * eb.normal,
        ])
        cand, size_only = _make_candidate(
            StateLabel.A, (base, base, apex), contacts, vedges, poly,
            r_lo, r_hi, r_ft, require_containment=False,
        )
        if cand is not None:
            out.append(cand)
        size_reject |= size_only
    return out, size_reject


def _inscribed_equilateral(lines, psi: float):
    """Equilateral triangle with vertex m on line m at orientation psi.

    The incidence conditions are linear in the center and circumradius;
    returns (vertices, circumradius) or None when degenerate or inverted.
    """
    rows, rhs = [], []
    for m, (point, normal) in enumerate(lines):
        u = geom.unit_from_angle(psi + 2.0 * np.pi * m / 3.0)
        rows.append([normal[0], normal[1], float(np.dot(normal, u))])
        rhs.append(float(np.dot(normal, point)))
    a = np.array(rows)
    if abs(np.linalg.det(a)) < 1e-9:
        return None
    cx, cy, radius = np.linalg.solve(a, rhs)
    if radius <= 0:
        return None
    c = np.array([cx, cy])
    verts = np.array([
        c + radius * geom.unit_from_angle(psi + 2.0 * np.pi * m / 3.0) for m in range(3)
    ])
    return verts, float(radius)


def _state_d_candidate(ids, vedges, poly, r_lo, r_hi, r_ft):
    """Best-margin one-vertex-per-edge placement for a triple with a parallel pair.

    The orientation sweep is solved in one batched linear solve; collision is
    only checked for the best-margin placements.
    """
    best, size_reject = None, False
    psis = np.arange(0.0, 2.0 * np.pi, _D_SWEEP_STEP)
    for order in ((0, 1, 2), (0, 2, 1)):
        edge_ids = tuple(ids[k] for k in order)
        ves = [vedges[e] for e in edge_ids]
        u = np.stack(
            [np.stack([np.cos(psis + 2 * np.pi * m / 3),
                       np.sin(psis + 2 * np.pi * m / 3)], axis=-1) for m in range(3)],
            axis=1,
        )  # (N, 3, 2)
        mat = np.zeros((len(psis), 3, 3))
        rhs = np.zeros(3)
        for m, ve in enumerate(ves):
            mat[:, m, 0] = ve.normal[0]
            mat[:, m, 1] = ve.normal[1]
            mat[:, m, 2] = u[:, m, :] @ ve.normal
            rhs[m] = float(ve.normal @ ve.a)
        solvable = np.abs(np.linalg.det(mat)) > 1e-9
        if not solvable.any():
            continue
        b = np.broadcast_to(rhs[:, None], (int(solvable.sum()), 3, 1)).copy()
        sol = np.linalg.solve(mat[solvable], b)[..., 0]
        centers, radii = sol[:, :2], sol[:, 2]
        verts = centers[:, None, :] + radii[:, None, None] * u[solvable]
        positive = radii > 0
        in_band = positive & (radii >= r_lo - 1e-9) & (radii <= r_hi + 1e-9)
        slack = np.full(len(radii), np.inf)
        for m, ve in enumerate(ves):
            s = (verts[:, m, :] - ve.a) @ ve.direction
            slack = np.minimum(slack, np.minimum(s, ve.length - s))
        contained = slack >= -1e-9
        size_reject |= bool(np.any(positive & contained & ~in_band))
        usable = np.nonzero(in_band & contained)[0]
        for k in sorted(usable, key=lambda i: -slack[i]):
            if best is not None and slack[k] <= best.margin:
                break
            cand, _ = _make_candidate(
                StateLabel.D, edge_ids, verts[k], vedges, poly,
                r_lo, r_hi, r_ft, require_containment=True,
            )
            if cand is not None:
                if best is None or cand.margin > best.margin:
                    best = cand
                break
    return best, size_reject


_ROLE_PERMS = ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2))


def _state_c_candidate(ids, vedges, poly, r_lo, r_hi, r_ft):
    """Solve the self-centering configuration for a no-parallel-pair triple."""
    for perm in _ROLE_PERMS:
        role = [ids[k] for k in perm]  # side r+1 -> edge index
        e1, e2, e3 = (vedges[e] for e in role)
        angles = AngleSet.from_normals(e1.normal, e2.normal, e3.normal)
        if not angles.is_proper_triangle():
            return None, False  # normals do not positively span: state E
        if angles.theta_s12 >= np.pi / 2 or angles.theta_s13 >= np.pi / 2:
            continue
        try:
            c12 = geom.line_intersection(e1.a, e1.direction, e2.a, e2.direction)
            c13 = geom.line_intersection(e1.a, e1.direction, e3.a, e3.direction)
            c23 = geom.line_intersection(e2.a, e2.direction, e3.a, e3.direction)
        except DegenerateInputError:  # pragma: no cover - parallel filtered earlier
            continue
        if geom.cross2(c13 - c12, c23 - c12) <= 0:
            continue  # wrong chirality for this labeling
        l2 = float(np.linalg.norm(c23 - c12))
        try:
            sol = immobility.solve_state_c(angles, l2)
        except (NoSolutionError, InfeasibleContactError):
            continue
        # rigid map from the canonical frame: origin -> c12, +x -> c12->c13
        u = geom.normalize(c13 - c12)
        rot = np.array([[u[0], -u[1]], [u[1], u[0]]])
        contacts = (rot @ sol.contacts.T).T + c12
        return _make_candidate(
            StateLabel.C, tuple(role), contacts, vedges, poly,
            r_lo, r_hi, r_ft, require_containment=True,
        )
    return None, False


def _enumerate(prism: Prism, g: FingerGeometry):
    v = prism.vertices
    edges = polygon_edges(v)
    vedges = geom.virtual_edges(edges, g.r_ft)
    centroid = _polygon_centroid(v)
    r_lo, r_hi = quick_return.radial_range(g)
    n = len(edges)
    candidates: list[GraspCandidate] = []
    size_reject = False

    for i in range(n):
        for j in range(i + 1, n):
            if immobility._parallel(vedges[i], vedges[j]) and immobility._opposed(
                vedges[i], vedges[j]
            ):
                found, srej = _state_a_candidates(
                    i, j, vedges, v, centroid, r_lo, r_hi, g.r_ft
                )
                candidates.extend(found)
                size_reject |= srej

    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ids = (i, j, k)
                flags = [
                    immobility._parallel(vedges[a], vedges[b])
                    for a, b in ((i, j), (i, k), (j, k))
                ]
                if sum(flags) >= 2:
                    continue  # all three parallel; no triangle
                if any(flags):
                    pair = ((i, j), (i, k), (j, k))[flags.index(True)]
                    if not immobility._opposed(vedges[pair[0]], vedges[pair[1]]):
                        continue
                    third = next(e for e in ids if e not in pair)
                    cand, srej = _state_d_candidate(
                        (third, pair[0], pair[1]), vedges, v, r_lo, r_hi, g.r_ft
                    )
                else:
                    cand, srej = _state_c_candidate(ids, vedges, v, r_lo, r_hi, g.r_ft)
                if cand is not None:
                    candidates.append(cand)
                size_reject |= srej

    return candidates, size_reject


def enumerate_candidates(prism: Prism, g: FingerGeometry) -> list[GraspCandidate]:
    """All feasible grasp candidates of states A, C and D for a prism."""
    return _enumerate(prism, g)[0]


_PRIORITY = {StateLabel.C: 0, StateLabel.A: 1, StateLabel.D: 2}


def select_plan(candidates: list[GraspCandidate]) -> GraspCandidate:
    """Priority C > A > D; ties by larger containment margin, then edge tuple."""
    if not candidates:
        raise NoPlanError("no feasible grasp candidates")
    return min(
        candidates,
        key=lambda c: (_PRIORITY[c.state], -c.margin, tuple(sorted(c.edges))),
    )


@dataclass(frozen=True)
class GripperPose:
    """Planner output: gripper center (mm) and orientation (degrees)."""

    x_gri: float
    y_gri: float
    theta_gri: float

    def __post_init__(self):
        if not -120.0 <= self.theta_gri <= 120.0:
            raise MalformedInputError("theta_gri must lie in [-120, 120] degrees")


def gripper_pose(t: Triangle2) -> GripperPose:
    """Centroid plus the signed angle from the +y axis to a centroid-vertex ray.

    The vertex with the smallest absolute angle is used, which folds the
    120-degree symmetry of the finger arrangement into [-60, 60] degrees.
    """
    if not t.is_equilateral(1e-6):
        raise MalformedInputError("grasping triangle must be equilateral")
    c = t.centroid()
    angles = []
    for vtx in t.vertices:
        u = vtx - c
        angles.append(float(np.degrees(np.arctan2(-u[0], u[1]))))
    theta = min(angles, key=lambda a: (abs(a), a))
    return GripperPose(x_gri=float(c[0]), y_gri=float(c[1]), theta_gri=theta)


@dataclass(frozen=True)
class PlanResult:
    pose: GripperPose
    candidate: GraspCandidate


def plan(obj: ObjectSpec, g: FingerGeometry) -> PlanResult:
    """Full pipeline: enumerate, select by priority, derive the gripper pose."""
    r_lo, r_hi = quick_return.radial_range(g)
    if isinstance(obj, Cylinder):
        if obj.radius > r_hi - g.r_ft:
            raise NoPlanError(
                f"cylinder radius {obj.radius:.6g} mm exceeds the graspable"
                f" bound {r_hi - g.r_ft:.6g} mm",
                cause="too-large",
            )
        ring = obj.radius + g.r_ft
        verts = np.array([
            obj.center + ring * geom.unit_from_angle(np.pi / 2 + 2.0 * np.pi * m / 3.0)
            for m in range(3)
        ])
        tri = geom.ccw_triangle(*verts)
        cand = GraspCandidate(
            edges=(),
            state=StateLabel.F,
            contacts=verts,
            grasp_triangle=tri,
            margin=float("inf"),
            flags=FeasibilityFlags(True, True, True),
        )
        pose = GripperPose(float(obj.center[0]), float(obj.center[1]), 0.0)
        return PlanResult(pose=pose, candidate=cand)

    candidates, size_reject = _enumerate(obj, g)
    if not candidates:
        cause = "too-large" if size_reject else "friction-only-states"
        raise NoPlanError("no feasible grasp candidates", cause=cause)
    chosen = select_plan(candidates)
    return PlanResult(pose=gripper_pose(chosen.grasp_triangle), candidate=chosen)


def plan_to_json(result: PlanResult) -> dict:
    """Plan output schema; numbers carry six significant digits."""

    def f6(x: float) -> float:
        return float(f"{x:.6g}")

    return {
        "x_gri_mm": f6(result.pose.x_gri),
        "y_gri_mm": f6(result.pose.y_gri),
        "theta_gri_deg": f6(result.pose.theta_gri),
        "state": result.candidate.state.value,
        "edges": list(result.candidate.edges),
        "triangle_mm": [[f6(p[0]), f6(p[1])] for p in result.candidate.contacts],
    }
