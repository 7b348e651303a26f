"""Planar geometry kernel.

Lengths are millimetres, angles radians. All functions are pure and operate
on plain ``numpy`` arrays of shape (2,). Coincidence tolerance is 1e-9 mm and
angular tolerance 1e-9 rad; edge directions are treated as parallel when the
cross product of their unit directions is below 1e-7 (vision-derived polygons
are noisy, so the threshold is deliberately explicit rather than exact).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, MalformedInputError

COINCIDENCE_TOL = 1e-9  # mm
ANGLE_TOL = 1e-9  # rad
PARALLEL_TOL = 1e-7  # |cross| of unit directions


def vec(x: float, y: float) -> np.ndarray:
    return np.array([x, y], dtype=float)


def unit_from_angle(angle: float) -> np.ndarray:
    return np.array([np.cos(angle), np.sin(angle)])


def cross2(a, b) -> float:
    """Scalar z-component of the 2D cross product."""
    return float(a[0] * b[1] - a[1] * b[0])


def rot90(v) -> np.ndarray:
    """Counterclockwise quarter turn."""
    return np.array([-v[1], v[0]], dtype=float)


def rotate(v, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def normalize(v) -> np.ndarray:
    n = float(np.hypot(v[0], v[1]))
    if n < COINCIDENCE_TOL:
        raise DegenerateInputError("cannot normalize a near-zero vector")
    return np.asarray(v, dtype=float) / n


def angle_between(u, v) -> float:
    """Unsigned angle between two vectors, in [0, pi]."""
    d = float(np.dot(u, v)) / (np.hypot(u[0], u[1]) * np.hypot(v[0], v[1]))
    return float(np.arccos(np.clip(d, -1.0, 1.0)))


def circle_circle_intersection(c1, r1: float, c2, r2: float) -> list[np.ndarray]:
    """Intersect two circles.

    Returns zero, one or two points; a two-point result is ordered by
    positive-then-negative perpendicular offset from the c1->c2 center line.
    Raises ``DegenerateInputError`` for coincident centers or nonpositive radii.
    """
    if r1 <= 0 or r2 <= 0:
        raise DegenerateInputError("circle radii must be positive")
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    dv = c2 - c1
    d = float(np.hypot(dv[0], dv[1]))
    if d < COINCIDENCE_TOL:
        raise DegenerateInputError("coincident circle centers")
    a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
    hsq = r1 * r1 - a * a
    # machine-scaled tangency band
    eps = 1e-12 * (r1 * r1 + r2 * r2 + d * d)
    if hsq < -eps:
        return []
    u = dv / d
    mid = c1 + a * u
    if hsq <= eps:
        return [mid]
    h = float(np.sqrt(hsq))
    perp = rot90(u)
    return [mid + h * perp, mid - h * perp]


def positively_spans(n1, n2, n3) -> bool:
    """True iff every vector of the plane is a nonnegative combination of the inputs.

    Equivalent test: the three directions are not contained in any closed
    half-plane, i.e. all circular gaps between them are strictly below pi.
    """
    dirs = [np.asarray(n, dtype=float) for n in (n1, n2, n3)]
    for n in dirs:
        if abs(np.hypot(n[0], n[1]) - 1.0) > 1e-9:
            raise DegenerateInputError("positively_spans expects unit directions")
    angles = np.sort([np.arctan2(n[1], n[0]) for n in dirs])
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * np.pi]]))
    return bool(np.all(gaps < np.pi - ANGLE_TOL))


@dataclass(frozen=True)
class Edge:
    """Directed physical edge with its inward unit normal."""

    a: np.ndarray
    b: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        if self.length < COINCIDENCE_TOL:
            raise DegenerateInputError("zero-length edge")
        if abs(float(np.dot(self.direction, self.normal))) > PARALLEL_TOL:
            raise DegenerateInputError("edge normal is not perpendicular to the edge")

    @property
    def direction(self) -> np.ndarray:
        return (self.b - self.a) / self.length

    @property
    def length(self) -> float:
        d = self.b - self.a
        return float(np.hypot(d[0], d[1]))


@dataclass(frozen=True)
class VirtualEdge:
    """Physical edge displaced away from the object interior by the fingertip radius.

    Fingertip centers in contact with the source edge lie on this line. The
    inward normal of the source edge is preserved.
    """

    a: np.ndarray
    b: np.ndarray
    normal: np.ndarray
    source: Edge

    @property
    def direction(self) -> np.ndarray:
        d = self.b - self.a
        return d / float(np.hypot(d[0], d[1]))

    @property
    def length(self) -> float:
        d = self.b - self.a
        return float(np.hypot(d[0], d[1]))


def virtual_edges(edges, r_ft: float) -> list[VirtualEdge]:
    """Offset each edge by ``r_ft`` against its inward normal."""
    if r_ft < 0:
        raise DegenerateInputError("fingertip radius must be nonnegative")
    out = []
    for e in edges:
        shift = -r_ft * e.normal
        out.append(VirtualEdge(a=e.a + shift, b=e.b + shift, normal=e.normal, source=e))
    return out


@dataclass(frozen=True)
class Triangle2:
    """Counterclockwise triangle."""

    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float))
        object.__setattr__(self, "p2", np.asarray(self.p2, dtype=float))
        object.__setattr__(self, "p3", np.asarray(self.p3, dtype=float))
        if self.signed_area() <= COINCIDENCE_TOL:
            raise MalformedInputError("triangle must be counterclockwise with nonzero area")

    def signed_area(self) -> float:
        return 0.5 * cross2(self.p2 - self.p1, self.p3 - self.p1)

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])

    def centroid(self) -> np.ndarray:
        return (self.p1 + self.p2 + self.p3) / 3.0

    def side_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.array([
            float(np.linalg.norm(v[1] - v[0])),
            float(np.linalg.norm(v[2] - v[1])),
            float(np.linalg.norm(v[0] - v[2])),
        ])

    def circumradius(self) -> float:
        c = self.centroid()
        return float(np.mean([np.linalg.norm(p - c) for p in self.vertices]))

    def is_equilateral(self, rel_tol: float = 1e-6) -> bool:
        s = self.side_lengths()
        return bool((s.max() - s.min()) <= rel_tol * s.mean())


def ccw_triangle(p1, p2, p3) -> Triangle2:
    """Build a Triangle2, swapping two vertices if the input order is clockwise."""
    p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p1, p2, p3))
    if cross2(p2 - p1, p3 - p1) < 0:
        p2, p3 = p3, p2
    return Triangle2(p1, p2, p3)


def line_intersection(p, d, q, e) -> np.ndarray:
    """Intersection of lines p + t*d and q + s*e; raises for (near-)parallel lines."""
    denom = cross2(d, e)
    if abs(denom) < PARALLEL_TOL:
        raise DegenerateInputError("lines are parallel within tolerance")
    t = cross2(np.asarray(q, dtype=float) - np.asarray(p, dtype=float), e) / denom
    return np.asarray(p, dtype=float) + t * np.asarray(d, dtype=float)


def point_line_distance(p, a, d) -> float:
    """Distance from point p to the infinite line through a with unit direction d."""
    return abs(cross2(d, np.asarray(p, dtype=float) - np.asarray(a, dtype=float)))


def point_segment_distance(p, a, b) -> float:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom < COINCIDENCE_TOL**2:
        return float(np.linalg.norm(p - a))
    t = np.clip(float(np.dot(p - a, ab)) / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))
