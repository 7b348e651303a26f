"""Command-line front end.

Subcommands:
    defaults                       dump the reference configuration as JSON
    analyze trajectory|speed|amplification|force-profile|score
    plan                           grasp an object described by a JSON file
    design-search finger|cvt       run a design-parameter search

All external numbers are millimetres, newtons and degrees. CSV and JSON
output is deterministic: six significant digits, fixed key order, newline
terminated, UTF-8.

Exit codes: 0 ok, 2 invalid input, 3 infeasible geometry, 4 no grasp plan,
5 empty design-search feasible set.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import design_search, ls_cvt, planner, quick_return, statics
from .design_search import CvtSearchSpace, FingerSearchSpace
from .errors import (
    AlignmentError,
    ClosureFailureError,
    ConfigError,
    DeadPointError,
    DegenerateInputError,
    EmptyFeasibleSetError,
    GripperError,
    MalformedInputError,
    NoPlanError,
    OutOfRangeError,
    SingularConfigurationError,
    UnreachableRadiusError,
)
from .ls_cvt import CvtGeometry
from .quick_return import FingerGeometry
from .statics import GripperSpec, LoadCase

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_NO_PLAN = 4
EXIT_EMPTY_SEARCH = 5

_INFEASIBLE_ERRORS = (
    UnreachableRadiusError,
    OutOfRangeError,
    ClosureFailureError,
    DeadPointError,
    SingularConfigurationError,
    AlignmentError,
    DegenerateInputError,
)


def f6(x: float) -> float:
    """Round to six significant digits (the external numeric contract)."""
    return float(f"{float(x):.6g}")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def default_config() -> dict:
    """Reference parameters as a JSON-ready dict (single source of truth for
    the command-line layer)."""
    g = FingerGeometry.default()
    c = CvtGeometry.default()
    return {
        "finger": {
            "r_op_mm": g.r_op,
            "r_ip_mm": g.r_ip,
            "l_ft_mm": g.l_ft,
            "phi2_deg": f6(np.degrees(g.phi2)),
            "r_ft_mm": g.r_ft,
            "theta_ip_closed_deg": f6(np.degrees(g.theta_ip_closed)),
            "theta_ip_open_deg": f6(np.degrees(g.theta_ip_open)),
        },
        "cvt": {
            "l_in1_mm": c.l_in1,
            "l_in2_mm": c.l_in2,
            "l_fix_mm": c.l_fix,
            "l_flt_mm": c.l_flt,
            "l_out_mm": c.l_out,
            "lambda_deg": f6(np.degrees(c.lambda_)),
            "lin_v_max_mm": c.lin_v_max,
            "lin_v_min_mm": c.lin_v_min,
            "ground_angle_deg": f6(np.degrees(c.ground_angle)),
            "branch": c.branch,
            "theta_in_closed_deg": f6(np.degrees(c.theta_in_range[0])),
            "theta_in_open_deg": f6(np.degrees(c.theta_in_range[1])),
        },
        "load": {
            "tau_in_nmm": 1300.0,
            "loss_factor": 1.0,
            "r_ob_min_mm": 0.5,
            "r_ob_max_mm": 38.5,
            "n_samples": 77,
        },
        "finger_search": {
            "r_op_mm": 35.0,
            "l_ft_mm": 26.2,
            "r_ft_mm": 3.5,
            "r_ip_mm": {"min": 20.0, "max": 32.0, "step": 0.5},
            "phi2_deg": {"min": 45.0, "max": 70.0, "step": 0.5},
            "envelope_radius_mm": 42.5,
            "min_pin_clearance_mm": 8.0,
            "min_width_mm": 70.0,
        },
        "cvt_search": {
            "l_in1_mm": {"min": 8.5, "max": 8.5, "step": 0.5},
            "l_in2_mm": {"min": 11.0, "max": 11.0, "step": 0.5},
            "l_fix_mm": {"min": 22.0, "max": 24.0, "step": 0.5},
            "l_flt_mm": {"min": 23.0, "max": 25.0, "step": 0.5},
            "l_out_mm": {"min": 8.0, "max": 10.0, "step": 0.5},
            "reference_mm": [8.5, 11.0, 23.0, 24.0, 9.0],
        },
    }


def _want(block: dict, path: str, key: str, kind, pred=None, message=""):
    if key not in block:
        raise ConfigError(f"{path}.{key}", "missing")
    value = block[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        value = float(value)
    elif not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}")
    if pred is not None and not pred(value):
        raise ConfigError(f"{path}.{key}", message or "invalid value")
    return value


def _grid(block: dict, path: str, key: str) -> np.ndarray:
    sub = _want(block, path, key, dict)
    lo = _want(sub, f"{path}.{key}", "min", float)
    hi = _want(sub, f"{path}.{key}", "max", float, lambda v: v >= lo, "max below min")
    step = _want(sub, f"{path}.{key}", "step", float, lambda v: v > 0, "step must be > 0")
    return np.arange(lo, hi + 1e-9, step)


class ToolConfig:
    """Validated configuration aggregate."""

    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
        merged = default_config()
        for section in merged:
            if section in data:
                if not isinstance(data[section], dict):
                    raise ConfigError(section, "must be an object")
                merged[section] = {**merged[section], **data[section]}
        unknown = set(data) - set(merged)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown section")
        self.raw = merged
        self.finger = self._finger(merged["finger"])
        self.cvt = self._cvt(merged["cvt"])
        self.load = self._load(merged["load"])

    @staticmethod
    def _finger(b: dict) -> FingerGeometry:
        pos = lambda v: v > 0
        try:
            return FingerGeometry(
                r_op=_want(b, "finger", "r_op_mm", float, pos, "must be > 0"),
                r_ip=_want(b, "finger", "r_ip_mm", float, pos, "must be > 0"),
                l_ft=_want(b, "finger", "l_ft_mm", float, pos, "must be > 0"),
                phi2=np.radians(_want(b, "finger", "phi2_deg", float)),
                r_ft=_want(b, "finger", "r_ft_mm", float, pos, "must be > 0"),
                theta_ip_closed=np.radians(_want(b, "finger", "theta_ip_closed_deg", float)),
                theta_ip_open=np.radians(_want(b, "finger", "theta_ip_open_deg", float)),
            )
        except MalformedInputError as exc:
            raise ConfigError("finger", str(exc)) from exc

    @staticmethod
    def _cvt(b: dict) -> CvtGeometry:
        pos = lambda v: v > 0
        try:
            return CvtGeometry(
                l_in1=_want(b, "cvt", "l_in1_mm", float, pos, "must be > 0"),
                l_in2=_want(b, "cvt", "l_in2_mm", float, pos, "must be > 0"),
                l_fix=_want(b, "cvt", "l_fix_mm", float, pos, "must be > 0"),
                l_flt=_want(b, "cvt", "l_flt_mm", float, pos, "must be > 0"),
                l_out=_want(b, "cvt", "l_out_mm", float, pos, "must be > 0"),
                lambda_=np.radians(_want(b, "cvt", "lambda_deg", float)),
                lin_v_max=_want(b, "cvt", "lin_v_max_mm", float, pos, "must be > 0"),
                lin_v_min=_want(b, "cvt", "lin_v_min_mm", float, pos, "must be > 0"),
                ground_angle=np.radians(_want(b, "cvt", "ground_angle_deg", float)),
                branch=_want(b, "cvt", "branch", int, lambda v: v in (-1, 1), "must be +1 or -1"),
                theta_in_range=(
                    np.radians(_want(b, "cvt", "theta_in_closed_deg", float)),
                    np.radians(_want(b, "cvt", "theta_in_open_deg", float)),
                ),
            )
        except MalformedInputError as exc:
            raise ConfigError("cvt", str(exc)) from exc
        except (ClosureFailureError, DeadPointError) as exc:
            raise ConfigError("cvt", f"unassemblable geometry: {exc}") from exc

    @staticmethod
    def _load(b: dict) -> dict:
        tau = _want(b, "load", "tau_in_nmm", float, lambda v: v >= 0, "must be >= 0")
        loss = _want(b, "load", "loss_factor", float, lambda v: 0 < v <= 1, "must be in (0, 1]")
        lo = _want(b, "load", "r_ob_min_mm", float, lambda v: v > 0, "must be > 0")
        hi = _want(b, "load", "r_ob_max_mm", float, lambda v: v > lo, "must exceed r_ob_min_mm")
        n = _want(b, "load", "n_samples", int, lambda v: v >= 2, "need at least 2 samples")
        return {"tau_in": tau, "loss_factor": loss, "band": (lo, hi), "n_samples": n}

    def finger_search_space(self) -> FingerSearchSpace:
        b = self.raw["finger_search"]
        pos = lambda v: v > 0
        return FingerSearchSpace(
            r_op=_want(b, "finger_search", "r_op_mm", float, pos, "must be > 0"),
            l_ft=_want(b, "finger_search", "l_ft_mm", float, pos, "must be > 0"),
            r_ft=_want(b, "finger_search", "r_ft_mm", float, pos, "must be > 0"),
            r_ip_grid=_grid(b, "finger_search", "r_ip_mm"),
            phi2_grid=np.radians(_grid(b, "finger_search", "phi2_deg")),
            envelope_radius=_want(b, "finger_search", "envelope_radius_mm", float, pos, "must be > 0"),
            min_pin_clearance=_want(b, "finger_search", "min_pin_clearance_mm", float, pos, "must be > 0"),
            min_width=_want(b, "finger_search", "min_width_mm", float, pos, "must be > 0"),
        )

    def cvt_search_space(self) -> tuple[CvtSearchSpace, tuple | None]:
        b = self.raw["cvt_search"]
        space = CvtSearchSpace(
            l_in1_grid=_grid(b, "cvt_search", "l_in1_mm"),
            l_in2_grid=_grid(b, "cvt_search", "l_in2_mm"),
            l_fix_grid=_grid(b, "cvt_search", "l_fix_mm"),
            l_flt_grid=_grid(b, "cvt_search", "l_flt_mm"),
            l_out_grid=_grid(b, "cvt_search", "l_out_mm"),
        )
        ref = b.get("reference_mm")
        if ref is not None:
            if not (isinstance(ref, list) and len(ref) == 5):
                raise ConfigError("cvt_search.reference_mm", "expected five lengths")
            ref = tuple(float(x) for x in ref)
        return space, ref


def load_config(path: str | None) -> ToolConfig:
    if path is None:
        return ToolConfig({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(path, f"cannot read: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON: {exc}") from exc
    return ToolConfig(data)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _write_text(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _svg_plot(xs, ys, xlabel: str, ylabel: str, title: str) -> str:
    """Minimal deterministic SVG: one data polyline plus axes and labels."""
    w, h, m = 640, 420, 56
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    xspan = (x1 - x0) or 1.0
    yspan = (y1 - y0) or 1.0
    px = m + (xs - x0) / xspan * (w - 2 * m)
    py = h - m - (ys - y0) / yspan * (h - 2 * m)
    points = " ".join(f"{f6(a)},{f6(b)}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">\n'
        f'<rect width="{w}" height="{h}" fill="white"/>\n'
        f'<text x="{w / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>\n'
        f'<line x1="{m}" y1="{h - m}" x2="{w - m}" y2="{h - m}" stroke="black"/>\n'
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{h - m}" stroke="black"/>\n'
        f'<text x="{w / 2}" y="{h - 12}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
        f'<text x="16" y="{h / 2}" font-size="12" transform="rotate(-90 16 {h / 2})"'
        f' text-anchor="middle">{ylabel}</text>\n'
        f'<text x="{m}" y="{h - m + 16}" font-size="10">{f6(x0)}</text>\n'
        f'<text x="{w - m}" y="{h - m + 16}" font-size="10" text-anchor="end">{f6(x1)}</text>\n'
        f'<text x="{m - 4}" y="{h - m}" font-size="10" text-anchor="end">{f6(y0)}</text>\n'
        f'<text x="{m - 4}" y="{m + 4}" font-size="10" text-anchor="end">{f6(y1)}</text>\n'
        f'<polyline points="{points}" fill="none" stroke="steelblue" stroke-width="1.5"/>\n'
        "</svg>\n"
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_defaults(args) -> int:
    _write_text(args.output, _json_text(default_config()))
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    g, cvt = cfg.finger, cfg.cvt
    samples = args.samples
    svg = None

    if args.what == "trajectory":
        theta = np.linspace(g.theta_ip_closed, g.theta_ip_open, samples)
        pts = quick_return.fingertip_position(g, theta)
        r = np.linalg.norm(pts, axis=-1)
        lines = ["theta_ip_deg,x_mm,y_mm,r_mm"]
        for t, (x, y), rr in zip(np.degrees(theta), pts, r):
            lines.append(f"{t:.6g},{x:.6g},{y:.6g},{rr:.6g}")
        _write_text(args.output, "\n".join(lines) + "\n")
        if args.svg:
            svg = _svg_plot(pts[:, 0], pts[:, 1], "x [mm]", "y [mm]", "fingertip trajectory")

    elif args.what == "speed":
        theta = np.linspace(g.theta_ip_closed, g.theta_ip_open, samples)
        ratio = quick_return.speed_ratio(g, theta)
        lines = ["theta_ip_deg,ratio_mm_per_rad"]
        for t, v in zip(np.degrees(theta), ratio):
            lines.append(f"{t:.6g},{v:.6g}")
        _write_text(args.output, "\n".join(lines) + "\n")
        if args.svg:
            svg = _svg_plot(np.degrees(theta), ratio, "theta_ip [deg]",
                            "speed ratio [mm/rad]", "quick-return speed ratio")

    elif args.what == "amplification":
        theta_ip = np.linspace(g.theta_ip_closed, g.theta_ip_open, samples)
        rows = []
        for t in theta_ip:
            theta_out = ls_cvt.output_angle_for_plate(cvt, float(t))
            theta_in = ls_cvt.solve_input_angle(cvt, theta_out, cvt.lin_v_min)
            rows.append((np.degrees(theta_in),
                         ls_cvt.amplification_ratio(cvt, theta_in, cvt.lin_v_min)))
        lines = ["theta_in_deg,eps_amp"]
        for t, e in rows:
            lines.append(f"{t:.6g},{e:.6g}")
        _write_text(args.output, "\n".join(lines) + "\n")
        if args.svg:
            svg = _svg_plot([r[0] for r in rows], [r[1] for r in rows],
                            "theta_in [deg]", "amplification", "torque amplification")

    elif args.what == "force-profile":
        case = LoadCase(
            tau_in=args.tau_in if args.tau_in is not None else cfg.load["tau_in"],
            loss_factor=args.loss if args.loss is not None else cfg.load["loss_factor"],
        )
        profile = statics.force_profile(
            g, cvt, case,
            n_samples=samples if args.samples_given else cfg.load["n_samples"],
            band=cfg.load["band"],
        )
        _write_text(args.output, profile.to_csv())
        if args.svg:
            svg = _svg_plot(profile.r_ob, profile.f_cnt, "r_ob [mm]", "f_cnt [N]",
                            "tip force profile")

    elif args.what == "score":
        if args.input is None:
            raise MalformedInputError("analyze score requires --input with speed/force/weight rows")
        try:
            text = Path(args.input).read_text(encoding="utf-8")
        except OSError as exc:
            raise MalformedInputError(f"cannot read {args.input}: {exc}") from exc
        lines_in = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines_in or lines_in[0].strip() != "speed_mm_s,force_N,weight_kg":
            raise MalformedInputError("score input must start with 'speed_mm_s,force_N,weight_kg'")
        out = ["speed_mm_s,force_N,weight_kg,eta"]
        for ln in lines_in[1:]:
            parts = ln.split(",")
            if len(parts) != 3:
                raise MalformedInputError(f"bad score row: {ln!r}")
            try:
                spec = GripperSpec(*(float(p) for p in parts))
            except (ValueError, MalformedInputError) as exc:
                raise MalformedInputError(f"bad score row {ln!r}: {exc}") from exc
            eta = statics.performance_score(spec)
            out.append(f"{spec.closing_speed:.6g},{spec.tip_force:.6g},"
                       f"{spec.weight:.6g},{eta:.6g}")
        _write_text(args.output, "\n".join(out) + "\n")

    if svg is not None:
        Path(args.svg).write_text(svg, encoding="utf-8")
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = load_config(args.config)
    try:
        text = Path(args.object).read_text(encoding="utf-8")
        data = json.loads(text)
    except OSError as exc:
        raise MalformedInputError(f"cannot read {args.object}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid object JSON: {exc}") from exc
    obj = planner.object_from_json(data)
    result = planner.plan(obj, cfg.finger)
    _write_text(args.output, _json_text(planner.plan_to_json(result)))
    return EXIT_OK


def cmd_design_search(args) -> int:
    cfg = load_config(args.space)
    if args.which == "finger":
        result = design_search.optimize_finger(cfg.finger_search_space())
        payload = {
            "best": {
                "r_ip_mm": f6(result.best.r_ip),
                "phi2_deg": f6(np.degrees(result.best.phi2)),
                "score_peak_mm_per_rad": f6(result.best.score_peak),
                "score_mean_mm_per_rad": f6(result.best.score_mean),
                "width_mm": f6(result.best.width),
            },
            "best_by_mean": {
                "r_ip_mm": f6(result.best_mean.r_ip),
                "phi2_deg": f6(np.degrees(result.best_mean.phi2)),
                "score_peak_mm_per_rad": f6(result.best_mean.score_peak),
                "score_mean_mm_per_rad": f6(result.best_mean.score_mean),
                "width_mm": f6(result.best_mean.width),
            },
            "n_cells": len(result.cells),
            "n_feasible": sum(c.feasible for c in result.cells),
        }
        _write_text(args.output, _json_text(payload))
        if args.surface:
            Path(args.surface).write_text(result.surface_csv(), encoding="utf-8")
    else:
        space, reference = cfg.cvt_search_space()
        result = design_search.optimize_cvt(space, reference=reference)
        payload = {
            "pareto": [
                {
                    "lengths_mm": [f6(x) for x in c.lengths],
                    "lin_v_min_mm": f6(c.lin_v_min),
                    "torque_objective": f6(c.torque_objective),
                    "speed_objective": f6(c.speed_objective),
                }
                for c in result.pareto
            ],
            "n_cells": len(result.cells),
            "n_feasible": sum(c.feasible for c in result.cells),
            "reference_mm": list(result.reference) if result.reference else None,
            "reference_feasible": result.reference_feasible,
            "reference_nondominated": result.reference_nondominated,
        }
        _write_text(args.output, _json_text(payload))
        if args.surface:
            Path(args.surface).write_text(result.surface_csv(), encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trigrip",
        description="Mechanism analysis and grasp planning for the three-finger "
        "quick-return gripper with a load-sensitive CVT",
    )
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("defaults", help="dump the reference configuration")
    d.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    d.set_defaults(func=cmd_defaults)

    a = sub.add_parser("analyze", help="run one analysis and emit CSV")
    a.add_argument("what", choices=["trajectory", "speed", "amplification",
                                    "force-profile", "score"])
    a.add_argument("--config", default=None, help="configuration JSON")
    a.add_argument("-o", "--output", default=None, help="CSV output path")
    a.add_argument("--svg", default=None, help="also write an SVG plot")
    a.add_argument("--samples", type=int, default=306)
    a.add_argument("--tau-in", dest="tau_in", type=float, default=None,
                   help="motor torque N.mm (force-profile)")
    a.add_argument("--loss", type=float, default=None,
                   help="loss factor in (0, 1] (force-profile)")
    a.add_argument("--input", default=None, help="input CSV (score)")
    a.set_defaults(func=cmd_analyze)

    pl = sub.add_parser("plan", help="plan a grasp for an object file")
    pl.add_argument("--object", required=True, help="object JSON path")
    pl.add_argument("--config", default=None)
    pl.add_argument("-o", "--output", default=None, help="plan JSON output path")
    pl.set_defaults(func=cmd_plan)

    ds = sub.add_parser("design-search", help="run a design-parameter search")
    ds.add_argument("which", choices=["finger", "cvt"])
    ds.add_argument("--space", default=None, help="search-space JSON (defaults used if absent)")
    ds.add_argument("-o", "--output", default=None, help="result JSON path")
    ds.add_argument("--surface", default=None, help="score-surface CSV path")
    ds.set_defaults(func=cmd_design_search)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "analyze":
        args.samples_given = argv is not None and any(
            str(a).startswith("--samples") for a in argv
        ) or (argv is None and "--samples" in sys.argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MalformedInputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoPlanError as exc:
        sys.stdout.write(_json_text({"error": "NO_PLAN", "cause": exc.cause,
                                     "detail": str(exc)}))
        return EXIT_NO_PLAN
    except EmptyFeasibleSetError as exc:
        print(f"empty feasible set: {exc}", file=sys.stderr)
        return EXIT_EMPTY_SEARCH
    except _INFEASIBLE_ERRORS as exc:
        print(f"infeasible geometry: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except GripperError as exc:  # residual toolkit errors are input-ish
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
