"""Command-line entry point: solve, sweep, select, track, verify, render.

All outputs are deterministic for a fixed command line and input file, so
repeated runs produce byte-identical CSV and JSON artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import curve as curvemod
from . import fixtures, svg, verify
from .action import action_value, build_capping, ice_cream_area, is_elegant
from .curve import load_curve, load_polygon, save_curve, smooth_approximate
from .errors import NotElegant, PeglabError
from .inscribe import find_binormals, find_rectangles
from .shrinkout import approximate_and_track, disk_area_bound
from .spectral import inscription_interval, select_spectral_function
from .sweep import clamp_theta_range, sweep_spectrum

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_VALIDATION = 2


@dataclass
class RunConfig:
    command: str
    curve_path: str | None = None
    theta: float | None = None
    theta_range: tuple | None = None
    grid_n: int = 48
    n_steps: int = 128
    tol: float = 1e-10
    epsilon: float = 0.05
    levels: int = 4
    modes: int = 64
    smoothing: float = 1e-3
    output_dir: str = "."
    emit: tuple = ("csv", "json", "svg")


def _load_curve_arg(path: str):
    if path in fixtures.FIXTURE_NAMES:
        return fixtures.builtin_curve(path)
    return load_curve(path)


def _fl(x: float) -> str:
    return repr(float(x))


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _rect_rows(rects):
    header = "theta,s,t,s2,t2,z_re,z_im,w_re,w_im,rad,residual"
    rows = [header]
    for r in rects:
        s, t, s2, t2 = r.params
        z, w = r.vertices[1], r.vertices[3]
        rows.append(",".join(_fl(v) for v in (
            r.theta, s, t, s2, t2, z.real, z.imag, w.real, w.imag,
            r.rad, r.residual)))
    return "\n".join(rows) + "\n"


def _rect_json(rects):
    return json.dumps([{
        "theta": r.theta, "s": r.params[0], "t": r.params[1],
        "s2": r.params[2], "t2": r.params[3],
        "z": [r.vertices[1].real, r.vertices[1].imag],
        "w": [r.vertices[3].real, r.vertices[3].imag],
        "rad": r.rad, "residual": r.residual,
    } for r in rects], indent=2) + "\n"


def cmd_inscribe(cfg: RunConfig) -> int:
    curve = _load_curve_arg(cfg.curve_path)
    theta = float(np.clip(cfg.theta, 1e-3, np.pi - 1e-3))
    rects = find_rectangles(curve, theta, grid_n=cfg.grid_n, tol=cfg.tol)
    out = Path(cfg.output_dir)
    if "csv" in cfg.emit:
        _write(out / "rectangles.csv", _rect_rows(rects))
    if "json" in cfg.emit:
        _write(out / "rectangles.json", _rect_json(rects))
    if "svg" in cfg.emit:
        svg.emit_svg((curve, rects), out / "rectangles.svg")
    print(f"{len(rects)} rectangles at theta={theta:.6f}")
    return EXIT_OK


def cmd_binormals(cfg: RunConfig) -> int:
    curve = _load_curve_arg(cfg.curve_path)
    bins = find_binormals(curve, grid_n=cfg.grid_n, tol=cfg.tol)
    out = Path(cfg.output_dir)
    if "csv" in cfg.emit:
        rows = ["s,t,chord_length,morse_index,degenerate"]
        rows += [",".join([_fl(b.params[0]), _fl(b.params[1]),
                           _fl(b.chord_length), str(b.morse_index),
                           str(int(b.degenerate))]) for b in bins]
        _write(out / "binormals.csv", "\n".join(rows) + "\n")
    if "json" in cfg.emit:
        _write(out / "binormals.json", json.dumps([{
            "s": b.params[0], "t": b.params[1], "chord_length": b.chord_length,
            "morse_index": b.morse_index, "degenerate": b.degenerate,
        } for b in bins], indent=2) + "\n")
    print(f"{len(bins)} ordered binormals")
    return EXIT_OK


def cmd_action(cfg: RunConfig) -> int:
    curve = _load_curve_arg(cfg.curve_path)
    theta = float(np.clip(cfg.theta, 1e-3, np.pi - 1e-3))
    rects = find_rectangles(curve, theta, grid_n=cfg.grid_n, tol=cfg.tol)
    reports = []
    for r in rects:
        av = action_value(curve, r)
        elegant = is_elegant(curve, r)
        rep = {
            "theta": r.theta, "rad": r.rad,
            "term_hamiltonian": av.term_hamiltonian,
            "term_area": av.term_area,
            "winding_correction": av.winding_correction,
            "value": av.value, "elegant": elegant,
        }
        if elegant:
            try:
                rep["ice_cream_area"] = ice_cream_area(curve, r)
            except NotElegant:
                pass
        reports.append(rep)
    out = Path(cfg.output_dir)
    if "json" in cfg.emit:
        _write(out / "actions.json", json.dumps(reports, indent=2) + "\n")
    if "svg" in cfg.emit:
        svg.emit_svg((curve, rects), out / "actions.svg")
    for rep in reports:
        print(f"theta={rep['theta']:.6f} rad={rep['rad']:.6f} "
              f"value={rep['value']:.9f} elegant={rep['elegant']}")
    return EXIT_OK


def _spectrum_csv(diagram):
    rows = ["theta,branch_id,action,s,t,s2,t2,rad,event"]
    for br in diagram.branches:
        for k, smp in enumerate(br.samples):
            event = "none"
            if k == 0 and br.birth.kind != "boundary":
                event = "birth"
            elif k == len(br.samples) - 1 and br.death.kind != "boundary":
                event = "death"
            s, t, s2, t2 = smp.params
            rows.append(",".join([_fl(smp.theta), str(br.id), _fl(smp.action),
                                  _fl(s), _fl(t), _fl(s2), _fl(t2),
                                  _fl(smp.rad), event]))
    return "\n".join(rows) + "\n"


def cmd_sweep(cfg: RunConfig, return_diagram: bool = False):
    curve = _load_curve_arg(cfg.curve_path)
    lo, hi = clamp_theta_range(*cfg.theta_range)
    diagram = sweep_spectrum(curve, lo, hi, n_steps=cfg.n_steps,
                             grid_n=cfg.grid_n, tol=cfg.tol)
    out = Path(cfg.output_dir)
    if "csv" in cfg.emit:
        _write(out / "spectrum.csv", _spectrum_csv(diagram))
    if "svg" in cfg.emit:
        svg.emit_svg(diagram, out / "spectrum.svg")
    print(f"{len(diagram.branches)} branches over [{lo:.4f}, {hi:.4f}]")
    if return_diagram:
        return diagram
    return EXIT_OK


def cmd_spectral(cfg: RunConfig) -> int:
    curve = _load_curve_arg(cfg.curve_path)
    lo, hi = clamp_theta_range(*cfg.theta_range)
    diagram = sweep_spectrum(curve, lo, hi, n_steps=cfg.n_steps,
                             grid_n=cfg.grid_n, tol=cfg.tol)
    f = select_spectral_function(diagram)
    iv = inscription_interval(f, cfg.epsilon)
    out = Path(cfg.output_dir)
    if "csv" in cfg.emit:
        rows = ["theta,ell,branch_id"]
        rows += [",".join([_fl(th), _fl(v), str(int(b))])
                 for th, v, b in zip(f.thetas, f.values, f.branch_ids)]
        _write(out / "spectral.csv", "\n".join(rows) + "\n")
    if "json" in cfg.emit:
        v = f.validation
        _write(out / "validation.json", json.dumps({
            "kind": "candidate-spectral-function",
            "certified": False,
            "area": f.area,
            "rad": f.rad,
            "endpoints": [[0.0, 0.0], [float(np.pi), f.area]],
            "max_adjacent_decrease": v.max_adjacent_decrease,
            "max_slope": v.max_slope,
            "slope_bound": v.slope_bound,
            "min_value": v.min_value,
            "max_value": v.max_value,
            "monotone_pass": v.monotone_pass,
            "lipschitz_pass": v.lipschitz_pass,
            "bounds_pass": v.bounds_pass,
            "interval": {"epsilon": cfg.epsilon, "a": iv.a, "b": iv.b,
                         "length": iv.length,
                         "guaranteed_length": iv.guaranteed_length,
                         "meets_guarantee": iv.meets_guarantee},
        }, indent=2) + "\n")
    if "svg" in cfg.emit:
        svg.emit_svg(diagram, out / "spectral.svg", overlay=f)
    print(f"ell: [{f.values[0]:.6f}, {f.values[-1]:.6f}] "
          f"interval length {iv.length:.4f}")
    if not f.validation.all_pass():
        print("validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_approx(cfg: RunConfig) -> int:
    polygon = load_polygon(cfg.curve_path)
    curve = smooth_approximate(polygon, cfg.modes, cfg.smoothing)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_curve(curve, out / f"{polygon.name}-smoothed.json")
    if "svg" in cfg.emit:
        svg.emit_svg(curve, out / f"{polygon.name}-smoothed.svg")
    print(f"area={curvemod.enclosed_area(curve)!r} "
          f"length={curvemod.curve_length(curve):.6f}")
    return EXIT_OK


def cmd_shrinkout(cfg: RunConfig) -> int:
    polygon = load_polygon(cfg.curve_path)
    theta = float(np.clip(cfg.theta if cfg.theta is not None else np.pi / 2,
                          1e-3, np.pi - 1e-3))
    run = approximate_and_track(polygon, theta, cfg.levels, cfg.epsilon,
                                mode_count=cfg.modes)
    out = Path(cfg.output_dir)
    levels = []
    rows = ["level,smoothing,length,area,n_rectangles,n_filtered,"
            "max_diameter,action,hausdorff_to_prev"]
    for lv in run.per_level:
        rows.append(",".join([
            str(lv.level), _fl(lv.smoothing), _fl(lv.curve_length),
            _fl(lv.area), str(lv.n_rectangles), str(lv.n_filtered),
            _fl(lv.max_diameter) if lv.max_diameter is not None else "",
            _fl(lv.action) if lv.action is not None else "",
            _fl(lv.hausdorff_to_prev) if lv.hausdorff_to_prev is not None else "",
        ]))
        levels.append({
            "level": lv.level, "smoothing": lv.smoothing,
            "length": lv.curve_length, "area": lv.area,
            "n_rectangles": lv.n_rectangles, "n_filtered": lv.n_filtered,
            "max_diameter": lv.max_diameter, "action": lv.action,
            "vertices": ([[v.real, v.imag] for v in lv.vertices]
                         if lv.vertices else None),
            "hausdorff_to_prev": lv.hausdorff_to_prev,
        })
    if "csv" in cfg.emit:
        _write(out / "shrinkout.csv", "\n".join(rows) + "\n")
    if "json" in cfg.emit:
        _write(out / "shrinkout.json", json.dumps({
            "polygon": polygon.name, "theta": theta, "epsilon": cfg.epsilon,
            "disk_area_bound_example": disk_area_bound(
                2.0 * max(lv.curve_length for lv in run.per_level) + 1.0, 0.1),
            "levels": levels,
        }, indent=2) + "\n")
    if "svg" in cfg.emit:
        finest = run.approximants[-1]
        tracked = [r for r in
                   find_rectangles(finest, theta, grid_n=cfg.grid_n)
                   ][:1]
        svg.emit_svg((finest, tracked), out / "shrinkout.svg")
    n_ok = sum(1 for lv in run.per_level if lv.n_filtered > 0)
    print(f"{n_ok}/{len(run.per_level)} levels kept an action-filtered rectangle")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = verify.run_acceptance()
    print(verify.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="peglab",
        description="inscribed rectangles, actions, and spectral functions "
                    "of plane Jordan curves")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, curve=True):
        if curve:
            sp.add_argument("--curve", required=True,
                            help="curve JSON file or builtin fixture name "
                                 f"({', '.join(fixtures.FIXTURE_NAMES)})")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--emit", default="csv,json,svg",
                        help="comma-separated subset of csv,json,svg")
        sp.add_argument("--grid-n", type=int, default=48)
        sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser("inscribe", help="find inscribed rectangles at one angle")
    common(sp)
    sp.add_argument("--theta", type=float, required=True)

    sp = sub.add_parser("binormals", help="find all ordered binormals")
    common(sp)

    sp = sub.add_parser("action", help="actions of all rectangles at one angle")
    common(sp)
    sp.add_argument("--theta", type=float, required=True)

    sp = sub.add_parser("sweep", help="track branches over an angle range")
    common(sp)
    sp.add_argument("--theta-range", required=True, help="lo:hi in radians")
    sp.add_argument("--steps", type=int, default=128)

    sp = sub.add_parser("spectral", help="sweep plus spectral selection")
    common(sp)
    sp.add_argument("--theta-range", required=True)
    sp.add_argument("--steps", type=int, default=128)
    sp.add_argument("--epsilon", type=float, default=0.05)

    sp = sub.add_parser("approx", help="smooth a polygon into an analytic curve")
    sp.add_argument("--polygon", required=True)
    sp.add_argument("--out", default=".")
    sp.add_argument("--emit", default="svg")
    sp.add_argument("--modes", type=int, default=64)
    sp.add_argument("--smoothing", type=float, default=1e-3)

    sp = sub.add_parser("shrinkout", help="track rectangles along a smoothing sequence")
    sp.add_argument("--polygon", required=True)
    sp.add_argument("--out", default=".")
    sp.add_argument("--emit", default="csv,json,svg")
    sp.add_argument("--grid-n", type=int, default=48)
    sp.add_argument("--theta", type=float, default=np.pi / 2)
    sp.add_argument("--levels", type=int, default=4)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--modes", type=int, default=64)

    sub.add_parser("verify", help="run the acceptance suite on the fixtures")
    return p


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("grid_n", "tol", "epsilon", "levels", "modes", "smoothing"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "steps"):
        cfg.n_steps = args.steps
    if hasattr(args, "out"):
        cfg.output_dir = args.out
    if hasattr(args, "emit"):
        cfg.emit = tuple(s.strip() for s in args.emit.split(",") if s.strip())
    if getattr(args, "curve", None):
        cfg.curve_path = args.curve
    if getattr(args, "polygon", None):
        cfg.curve_path = args.polygon
    if getattr(args, "theta", None) is not None:
        cfg.theta = args.theta
    if getattr(args, "theta_range", None):
        lo, _, hi = args.theta_range.partition(":")
        cfg.theta_range = (float(lo), float(hi))
    return cfg


COMMANDS = {
    "inscribe": cmd_inscribe,
    "binormals": cmd_binormals,
    "action": cmd_action,
    "sweep": cmd_sweep,
    "spectral": cmd_spectral,
    "approx": cmd_approx,
    "shrinkout": cmd_shrinkout,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Dispatch a parsed configuration; returns the process exit status."""
    try:
        result = COMMANDS[cfg.command](cfg)
        return result if isinstance(result, int) else EXIT_OK
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except PeglabError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(_config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
