import json

import numpy as np
import pytest

from trigrip import cli


def run(argv):
    return cli.main(argv)


@pytest.fixture()
def tmpfiles(tmp_path):
    return tmp_path


class TestDefaults:
    def test_dump_and_reload(self, tmp_path):
        out = tmp_path / "cfg.json"
        assert run(["defaults", "-o", str(out)]) == 0
        cfg = cli.ToolConfig(json.loads(out.read_text()))
        assert cfg.finger.r_op == 35.0
        assert cfg.cvt.l_out == 9.0

    def test_byte_determinism(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(["defaults", "-o", str(a)])
        run(["defaults", "-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_roundtrip_without_loss(self, tmp_path):
        out = tmp_path / "cfg.json"
        run(["defaults", "-o", str(out)])
        data = json.loads(out.read_text())
        cfg = cli.ToolConfig(data)
        assert cfg.raw == cli.default_config()


class TestConfigValidation:
    def test_negative_l_out_names_field(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"cvt": {"l_out_mm": -9.0}}))
        code = run(["analyze", "trajectory", "--config", str(bad),
                    "-o", str(tmp_path / "x.csv")])
        assert code == 2
        assert "cvt.l_out_mm" in capsys.readouterr().err

    def test_unknown_section_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"fingers": {}}))
        assert run(["analyze", "trajectory", "--config", str(bad),
                    "-o", str(tmp_path / "x.csv")]) == 2

    def test_invalid_json_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{не json")
        assert run(["plan", "--object", str(bad)]) == 2


class TestAnalyze:
    def test_trajectory_schema(self, tmp_path):
        out = tmp_path / "traj.csv"
        assert run(["analyze", "trajectory", "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "theta_ip_deg,x_mm,y_mm,r_mm"
        first = [float(x) for x in lines[1].split(",")]
        assert first[0] == pytest.approx(74.5)
        assert first[3] == pytest.approx(3.44759, abs=1e-4)
        last = [float(x) for x in lines[-1].split(",")]
        assert last[3] == pytest.approx(42.0272, abs=1e-3)

    def test_speed_schema(self, tmp_path):
        out = tmp_path / "speed.csv"
        assert run(["analyze", "speed", "-o", str(out), "--samples", "50"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "theta_ip_deg,ratio_mm_per_rad"
        assert len(lines) == 51

    def test_amplification_floor(self, tmp_path):
        out = tmp_path / "amp.csv"
        assert run(["analyze", "amplification", "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "theta_in_deg,eps_amp"
        eps = [float(ln.split(",")[1]) for ln in lines[1:]]
        assert min(eps) > 3.0

    def test_force_profile_floor(self, tmp_path):
        out = tmp_path / "force.csv"
        assert run(["analyze", "force-profile", "--tau-in", "1300",
                    "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "r_ob_mm,f_cnt_N"
        forces = [float(ln.split(",")[1]) for ln in lines[1:]]
        assert min(forces) >= 50.0

    def test_csv_byte_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["analyze", "force-profile", "-o", str(a)])
        run(["analyze", "force-profile", "-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_svg_emitted(self, tmp_path):
        out = tmp_path / "t.csv"
        svg = tmp_path / "t.svg"
        assert run(["analyze", "trajectory", "-o", str(out), "--svg", str(svg)]) == 0
        text = svg.read_text()
        assert text.startswith("<svg") and "<polyline" in text

    def test_score(self, tmp_path):
        src = tmp_path / "in.csv"
        src.write_text(
            "speed_mm_s,force_N,weight_kg\n1396,80,0.3\n601,12,0.2\n150,235,0.9\n"
        )
        out = tmp_path / "eta.csv"
        assert run(["analyze", "score", "--input", str(src), "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "speed_mm_s,force_N,weight_kg,eta"
        etas = [round(float(ln.split(",")[3])) for ln in lines[1:]]
        assert etas == [372, 36, 39]

    def test_score_requires_input(self, tmp_path):
        assert run(["analyze", "score", "-o", str(tmp_path / "x.csv")]) == 2


class TestPlan:
    def test_cylinder(self, tmp_path):
        obj = tmp_path / "cyl.json"
        obj.write_text(json.dumps({"cylinder": {"radius_mm": 25, "center_mm": [0, 0]}}))
        out = tmp_path / "plan.json"
        assert run(["plan", "--object", str(obj), "-o", str(out)]) == 0
        plan = json.loads(out.read_text())
        assert plan["state"] == "F"
        assert (plan["x_gri_mm"], plan["y_gri_mm"], plan["theta_gri_deg"]) == (0, 0, 0)

    def test_triangle_state_c(self, tmp_path):
        side = 50.0
        r = side / np.sqrt(3.0)
        verts = [[r * np.cos(np.pi / 2 + 2 * np.pi * k / 3),
                  r * np.sin(np.pi / 2 + 2 * np.pi * k / 3)] for k in range(3)]
        obj = tmp_path / "tri.json"
        obj.write_text(json.dumps({"prism": {"vertices_mm": verts}}))
        out = tmp_path / "plan.json"
        assert run(["plan", "--object", str(obj), "-o", str(out)]) == 0
        plan = json.loads(out.read_text())
        assert plan["state"] == "C"
        assert abs(plan["x_gri_mm"]) < 1e-6 and abs(plan["y_gri_mm"]) < 1e-6

    def test_oversized_triangle_no_plan(self, tmp_path, capsys):
        verts = [[0, 0], [200, 0], [100, 100 * np.sqrt(3)]]
        obj = tmp_path / "big.json"
        obj.write_text(json.dumps({"prism": {"vertices_mm": verts}}))
        assert run(["plan", "--object", str(obj)]) == 4
        payload = json.loads(capsys.readouterr().out)
        assert payload["error"] == "NO_PLAN"
        assert payload["cause"] == "too-large"

    def test_missing_object_file(self, tmp_path):
        assert run(["plan", "--object", str(tmp_path / "nope.json")]) == 2


class TestDesignSearch:
    def test_finger_defaults(self, tmp_path):
        out = tmp_path / "res.json"
        surface = tmp_path / "surf.csv"
        assert run(["design-search", "finger", "-o", str(out),
                    "--surface", str(surface)]) == 0
        res = json.loads(out.read_text())
        cells = (res["best"], res["best_by_mean"])
        assert any(
            abs(c["r_ip_mm"] - 26.0) <= 1.0 + 1e-9
            and abs(c["phi2_deg"] - 58.0) <= 1.0 + 1e-9
            for c in cells
        )
        assert surface.read_text().splitlines()[0] == "r_ip_mm,phi2_deg,score,feasible"

    def test_cvt_defaults(self, tmp_path):
        out = tmp_path / "res.json"
        assert run(["design-search", "cvt", "-o", str(out)]) == 0
        res = json.loads(out.read_text())
        assert res["reference_feasible"] is True
        assert res["reference_nondominated"] is True

    def test_malformed_space(self, tmp_path, capsys):
        space = tmp_path / "space.json"
        space.write_text(json.dumps({"finger_search": {"r_ip_mm": {"min": 20.0}}}))
        assert run(["design-search", "finger", "--space", str(space),
                    "-o", str(tmp_path / "r.json")]) == 2
        assert "r_ip_mm" in capsys.readouterr().err

    def test_empty_feasible_set_exit_code(self, tmp_path):
        space = tmp_path / "space.json"
        space.write_text(json.dumps({
            "finger_search": {"r_ip_mm": {"min": 30.0, "max": 30.0, "step": 0.5}}
        }))
        assert run(["design-search", "finger", "--space", str(space),
                    "-o", str(tmp_path / "r.json")]) == 5
