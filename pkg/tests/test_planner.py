import json

import numpy as np
import pytest

from trigrip import geom, planner
from trigrip.errors import MalformedInputError, NoPlanError
from trigrip.immobility import StateLabel
from trigrip.planner import Cylinder, GripperPose, Prism

import oracles


def _square(side=30.0):
    return Prism(np.array([[0, 0], [side, 0], [side, side], [0, side]], float))


def _rect(w=50.0, h=30.0):
    return Prism(np.array([[0, 0], [w, 0], [w, h], [0, h]], float))


def _equilateral(side=50.0, center=(0.0, 0.0)):
    c = np.asarray(center, float)
    r = side / np.sqrt(3.0)
    verts = np.array([
        c + r * geom.unit_from_angle(np.pi / 2 + 2 * np.pi * k / 3) for k in range(3)
    ])
    return Prism(verts)


def _hexagon(side=20.0):
    verts = np.array([side * geom.unit_from_angle(k * np.pi / 3) for k in range(6)])
    return Prism(verts)


def _rigid(points, angle, shift):
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    return (rot @ np.asarray(points, float).T).T + np.asarray(shift, float)


class TestObjectValidation:
    def test_clockwise_rejected(self):
        with pytest.raises(MalformedInputError):
            Prism(np.array([[0, 0], [0, 30], [30, 30], [30, 0]], float))

    def test_self_intersection_rejected(self):
        with pytest.raises(MalformedInputError):
            Prism(np.array([[0, 0], [30, 30], [30, 0], [0, 30]], float))

    def test_cylinder_radius_positive(self):
        with pytest.raises(MalformedInputError):
            Cylinder(-1.0, (0, 0))

    def test_json_roundtrip(self):
        obj = planner.object_from_json(
            {"cylinder": {"radius_mm": 25.0, "center_mm": [10.0, 20.0]}}
        )
        assert isinstance(obj, Cylinder)
        assert planner.object_to_json(obj) == {
            "cylinder": {"radius_mm": 25.0, "center_mm": [10.0, 20.0]}
        }
        prism = planner.object_from_json(
            {"prism": {"vertices_mm": [[0, 0], [30, 0], [15, 30]]}}
        )
        assert isinstance(prism, Prism)

    def test_malformed_json_rejected(self):
        with pytest.raises(MalformedInputError):
            planner.object_from_json({"sphere": {}})
        with pytest.raises(MalformedInputError):
            planner.object_from_json({"cylinder": {}})


class TestEnumerate:
    def test_square_state_a_geometry(self, finger):
        cands = planner.enumerate_candidates(_square(30.0), finger)
        a_cands = [c for c in cands if c.state == StateLabel.A]
        assert len(a_cands) >= 1
        tri = a_cands[0].grasp_triangle
        # virtual face separation 37 mm; equilateral side 2h/sqrt(3)
        assert tri.side_lengths()[0] == pytest.approx(2 * 37.0 / np.sqrt(3.0), abs=1e-9)
        assert tri.circumradius() == pytest.approx(24.67, abs=0.01)
        r_lo, r_hi = 3.447593276486, 42.027216214884
        assert r_lo <= tri.circumradius() <= r_hi

    def test_equilateral_state_c_is_medial(self, finger):
        cands = planner.enumerate_candidates(_equilateral(50.0), finger)
        assert [c.state for c in cands] == [StateLabel.C]
        c = cands[0]
        # contacts sit at the midpoints of the enlarged triangle's sides
        enlarged = 50.0 + 2.0 * np.sqrt(3.0) * finger.r_ft
        assert c.grasp_triangle.side_lengths()[0] == pytest.approx(enlarged / 2, abs=1e-9)

    def test_hexagon_has_a_and_c_candidates(self, finger):
        cands = planner.enumerate_candidates(_hexagon(20.0), finger)
        states = {c.state for c in cands}
        assert StateLabel.A in states and StateLabel.C in states
        assert StateLabel.B not in states and StateLabel.E not in states

    def test_never_emits_b_or_e(self, finger, rng):
        for _ in range(20):
            n = int(rng.integers(3, 7))
            angles = np.sort(rng.uniform(0, 2 * np.pi, n))
            if np.any(np.diff(angles) < np.radians(10)):
                continue
            radii = rng.uniform(10, 25, n)
            verts = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
            try:
                prism = Prism(verts)
            except MalformedInputError:
                continue
            for cand in planner.enumerate_candidates(prism, finger):
                assert cand.state in (StateLabel.A, StateLabel.C, StateLabel.D)

    def test_feasibility_soundness(self, finger):
        # every registered C/D contact lies on its finite virtual edge and
        # every candidate's circumradius is within the stroke band
        r_lo, r_hi = 3.447593276486, 42.027216214884
        for prism in (_square(30.0), _equilateral(50.0), _hexagon(20.0), _rect()):
            edges = planner.polygon_edges(prism.vertices)
            vedges = geom.virtual_edges(edges, finger.r_ft)
            for cand in planner.enumerate_candidates(prism, finger):
                assert r_lo - 1e-9 <= cand.circumradius() <= r_hi + 1e-9
                if cand.state in (StateLabel.C, StateLabel.D):
                    for k in range(3):
                        ve = vedges[cand.edges[k]]
                        s = float(np.dot(cand.contacts[k] - ve.a, ve.direction))
                        assert -1e-9 <= s <= ve.length + 1e-9
                        assert geom.point_line_distance(
                            cand.contacts[k], ve.a, ve.direction
                        ) < 1e-6


class TestSelect:
    def test_priority_c_over_a(self, finger):
        cands = planner.enumerate_candidates(_hexagon(20.0), finger)
        assert planner.select_plan(cands).state == StateLabel.C

    def test_priority_a_over_d(self, finger):
        cands = planner.enumerate_candidates(_square(30.0), finger)
        states = {c.state for c in cands}
        assert states == {StateLabel.A, StateLabel.D}
        assert planner.select_plan(cands).state == StateLabel.A

    def test_empty_raises(self):
        with pytest.raises(NoPlanError):
            planner.select_plan([])


class TestGripperPose:
    def test_aligned_triangle(self):
        t = geom.Triangle2(*(2.0 * geom.unit_from_angle(np.pi / 2 + 2 * np.pi * k / 3)
                             for k in range(3)))
        pose = planner.gripper_pose(t)
        assert (pose.x_gri, pose.y_gri) == (pytest.approx(0.0, abs=1e-12),) * 2
        assert pose.theta_gri == pytest.approx(0.0, abs=1e-9)

    def test_symmetry_reduction(self):
        verts = [2.0 * geom.unit_from_angle(np.radians(130.0) + np.pi / 2 + 2 * np.pi * k / 3)
                 for k in range(3)]
        pose = planner.gripper_pose(geom.ccw_triangle(*verts))
        assert pose.theta_gri == pytest.approx(10.0, abs=1e-9)

    def test_translation_equivariance(self):
        verts = [2.0 * geom.unit_from_angle(np.radians(130.0) + np.pi / 2 + 2 * np.pi * k / 3)
                 for k in range(3)]
        moved = [v + np.array([5.0, -7.0]) for v in verts]
        pose = planner.gripper_pose(geom.ccw_triangle(*moved))
        assert pose.x_gri == pytest.approx(5.0, abs=1e-12)
        assert pose.y_gri == pytest.approx(-7.0, abs=1e-12)
        assert pose.theta_gri == pytest.approx(10.0, abs=1e-9)

    def test_range_validated(self):
        with pytest.raises(MalformedInputError):
            GripperPose(0.0, 0.0, 130.0)

    def test_non_equilateral_rejected(self):
        with pytest.raises(MalformedInputError):
            planner.gripper_pose(geom.Triangle2((0, 0), (3, 0), (0, 4)))


class TestPlan:
    def test_cylinder_centering(self, finger):
        result = planner.plan(Cylinder(25.0, (10.0, 20.0)), finger)
        assert result.candidate.state == StateLabel.F
        assert result.pose.x_gri == pytest.approx(10.0)
        assert result.pose.y_gri == pytest.approx(20.0)
        assert result.pose.theta_gri == 0.0
        assert result.candidate.circumradius() == pytest.approx(25.0 + finger.r_ft)

    def test_cylinder_bound(self, finger):
        planner.plan(Cylinder(38.5, (0, 0)), finger)
        with pytest.raises(NoPlanError) as err:
            planner.plan(Cylinder(40.0, (0, 0)), finger)
        assert err.value.cause == "too-large"

    def test_equilateral_triangle_plan(self, finger):
        result = planner.plan(_equilateral(50.0, center=(3.0, -4.0)), finger)
        assert result.candidate.state == StateLabel.C
        assert result.pose.x_gri == pytest.approx(3.0, abs=1e-9)
        assert result.pose.y_gri == pytest.approx(-4.0, abs=1e-9)

    def test_oversized_triangle(self, finger):
        with pytest.raises(NoPlanError) as err:
            planner.plan(_equilateral(200.0), finger)
        assert err.value.cause == "too-large"

    def test_rectangle_prefers_state_a(self, finger):
        assert planner.plan(_rect(), finger).candidate.state == StateLabel.A

    def test_plan_json_schema(self, finger):
        data = planner.plan_to_json(planner.plan(_equilateral(50.0), finger))
        assert list(data) == [
            "x_gri_mm", "y_gri_mm", "theta_gri_deg", "state", "edges", "triangle_mm",
        ]
        assert data["state"] == "C"
        json.dumps(data)


class TestSelfCentering:
    def test_body_frame_uniqueness_under_placement(self, finger, rng):
        base = _equilateral(50.0).vertices
        reference = None
        for _ in range(10):
            ang = float(rng.uniform(0, 2 * np.pi))
            shift = rng.uniform(-8, 8, 2)
            placed = Prism(_rigid(base, ang, shift))
            result = planner.plan(placed, finger)
            rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
            body = (result.candidate.contacts - shift) @ rot
            if reference is None:
                reference = body
            else:
                assert oracles.match_contact_sets(reference, body) < 1e-6

    def test_pose_equivariance(self, finger, rng):
        base = _equilateral(50.0)
        ref = planner.plan(base, finger)
        for _ in range(10):
            ang = float(rng.uniform(0, 2 * np.pi))
            shift = rng.uniform(-8, 8, 2)
            placed = Prism(_rigid(base.vertices, ang, shift))
            moved = planner.plan(placed, finger)
            expected_xy = _rigid(np.array([[ref.pose.x_gri, ref.pose.y_gri]]), ang, shift)[0]
            assert moved.pose.x_gri == pytest.approx(expected_xy[0], abs=1e-6)
            assert moved.pose.y_gri == pytest.approx(expected_xy[1], abs=1e-6)
            dtheta = (moved.pose.theta_gri - ref.pose.theta_gri - np.degrees(ang)) % 120.0
            assert min(dtheta, 120.0 - dtheta) < 1e-6
