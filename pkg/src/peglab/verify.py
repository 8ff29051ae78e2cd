"""Acceptance criteria for the built-in fixtures, runnable as a table.

Each criterion function returns a CriterionResult; run_acceptance executes
them in order with shared sweep caches.  The same entry points back both the
command-line `verify` command and the acceptance test module.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import curve as curvemod
from . import fixtures
from .action import action_value, build_capping, capping_loop_points, ice_cream_area, is_elegant
from .curve import transform
from .geom import winding_number_points
from .inscribe import (find_binormals, find_rectangles, rectangle_residual,
                       torus_dist, wrap_params, _canonical_quadruple)
from .shrinkout import approximate_and_track
from .spectral import inscription_interval, select_spectral_function
from .sweep import sweep_spectrum

SWEEP_RANGE = (0.1, 3.0)
SWEEP_STEPS = 128
SWEEP_GRID = 32


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


class AcceptanceContext:
    """Lazily computed fixtures and sweeps shared between criteria."""

    def __init__(self):
        self.curves = {
            "circle": fixtures.circle(),
            "ellipse21": fixtures.ellipse21(),
            "square64": fixtures.square64(),
        }
        self._sweeps = {}
        self._spectrals = {}

    def sweep(self, name):
        if name not in self._sweeps:
            self._sweeps[name] = sweep_spectrum(
                self.curves[name], *SWEEP_RANGE, n_steps=SWEEP_STEPS,
                grid_n=SWEEP_GRID)
        return self._sweeps[name]

    def spectral(self, name):
        if name not in self._spectrals:
            self._spectrals[name] = select_spectral_function(self.sweep(name))
        return self._spectrals[name]


def _result(number, name, start, checks):
    """Collapse a list of (ok, message) into one criterion result."""
    bad = [msg for ok, msg in checks if not ok]
    detail = "; ".join(bad) if bad else checks[-1][1] if checks else "ok"
    return CriterionResult(number=number, name=name, passed=not bad,
                           detail=detail, seconds=time.perf_counter() - start)


def criterion_1_circle_law(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    circle = ctx.curves["circle"]
    checks = []
    for theta in (0.3, 0.9, np.pi / 2, 2.4):
        rects = find_rectangles(circle, theta, grid_n=SWEEP_GRID)
        checks.append((len(rects) >= 8, f"{len(rects)} representatives at {theta:.3f}"))
        for r in rects:
            checks.append((abs(r.rad - 1.0) <= 1e-8, f"rad {r.rad} at {theta:.3f}"))
            act = action_value(circle, r).value
            checks.append((abs(act - theta) <= 1e-6,
                           f"action {act:.9f} vs theta {theta:.6f}"))
    f = ctx.spectral("circle")
    err = float(np.max(np.abs(f.values - f.thetas)))
    checks.append((err <= 1e-6, f"max |ell-theta| = {err:.2e} over {len(f.thetas)} steps"))
    (t0_, v0), (t1_, v1) = f.endpoints
    checks.append((v0 == 0.0 and abs(v1 - np.pi) <= 1e-12 and t0_ == 0.0
                   and abs(t1_ - np.pi) <= 1e-15, "endpoint convention"))
    res = _result(1, "circle law", t0, checks)
    if res.seconds > 30.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s > 30s"
    return res


def criterion_2_ellipse_square(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    rects = find_rectangles(ctx.curves["ellipse21"], np.pi / 2, grid_n=48)
    checks = [(len(rects) == 1, f"{len(rects)} geometric squares (want 1)")]
    if rects:
        c = 2.0 / np.sqrt(5.0)
        expect = {c + c * 1j, -c + c * 1j, -c - c * 1j, c - c * 1j}
        worst = max(min(abs(v - e) for e in expect) for v in rects[0].vertices)
        checks.append((worst <= 1e-8, f"vertex error {worst:.2e}"))
    res = _result(2, "ellipse (2,1) square", t0, checks)
    if res.seconds > 10.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s > 10s"
    return res


def criterion_3_ellipse_binormals(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    bins = find_binormals(ctx.curves["ellipse21"], grid_n=48)
    checks = [(len(bins) == 4, f"{len(bins)} ordered binormals (want 4)")]
    chords = sorted(round(b.chord_length, 6) for b in bins)
    checks.append((chords == [2.0, 2.0, 4.0, 4.0], f"chords {chords}"))
    indices = sorted(b.morse_index for b in bins)
    checks.append((indices == [1, 1, 2, 2], f"index multiset {indices}"))
    geo = {(round(min(b.params), 6), round(max(b.params), 6)): b.morse_index
           for b in bins}
    checks.append((sorted(geo.values()) == [1, 2],
                   f"geometric binormal indices {sorted(geo.values())}"))
    res = _result(3, "ellipse binormals", t0, checks)
    if res.seconds > 10.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s > 10s"
    return res


def criterion_4_properties(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    for name in ("circle", "ellipse21", "square64"):
        f = ctx.spectral(name)
        v = f.validation
        checks.append((v.monotone_pass,
                       f"{name}: max decrease {v.max_adjacent_decrease:.2e}"))
        checks.append((v.lipschitz_pass,
                       f"{name}: max slope {v.max_slope:.4f} vs {v.slope_bound:.4f}"))
        checks.append((v.bounds_pass,
                       f"{name}: values in [{v.min_value:.3e}, {v.max_value:.6f}]"))
        diagram = ctx.sweep(name)
        spectral_ok = _spectrality_exact(diagram, f)
        checks.append((spectral_ok, f"{name}: spectrality exact"))
    res = _result(4, "spectral properties", t0, checks)
    if res.seconds > 300.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s > 300s"
    return res


def _spectrality_exact(diagram, f) -> bool:
    for th, val in zip(f.thetas, f.values):
        hit = False
        for br in diagram.branches:
            for s in br.samples:
                if s.theta == th and s.action == val:
                    hit = True
                    break
            if hit:
                break
        if not hit:
            return False
    return True


def criterion_5_intervals(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    f_ell = ctx.spectral("ellipse21")
    iv = inscription_interval(f_ell, 0.05)
    target = (2.0 * np.pi - 0.1) / 4.0 - 0.02
    checks.append((iv.length >= target,
                   f"ellipse eps=0.05: length {iv.length:.4f} >= {target:.4f}"))
    for name in ("circle", "ellipse21", "square64"):
        f = ctx.spectral(name)
        eps = 1e-3 * f.area
        iv = inscription_interval(f, eps)
        bound = f.area / f.rad ** 2 - 0.05
        checks.append((iv.length >= bound,
                       f"{name}: length {iv.length:.4f} >= {bound:.4f}"))
    res = _result(5, "inscription intervals", t0, checks)
    if res.seconds > 300.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s > 300s"
    return res


def criterion_6_action_crossval(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    cases = [("circle", 0.9), ("circle", 2.4), ("ellipse21", np.pi / 2),
             ("ellipse21", np.pi / 4), ("square64", np.pi / 2),
             ("square64", np.pi / 4)]
    n_elegant = 0
    for name, theta in cases:
        curve = ctx.curves[name]
        for r in find_rectangles(curve, theta, grid_n=SWEEP_GRID):
            if not is_elegant(curve, r):
                continue
            n_elegant += 1
            av = action_value(curve, r).value
            ic = ice_cream_area(curve, r)
            if abs(av - ic) > 1e-6:
                checks.append((False,
                               f"{name}@{theta:.3f}: |action-icecream|={abs(av-ic):.2e}"))
    checks.append((n_elegant >= 10, f"{n_elegant} elegant inscriptions cross-validated"))

    ell = ctx.curves["ellipse21"]
    base = find_rectangles(ell, np.pi / 2, grid_n=48)[0]
    act0 = action_value(ell, base).value
    moved = transform(ell, rotation=0.7, translation=0.31 - 0.22j, name="moved")
    mrects = find_rectangles(moved, np.pi / 2, grid_n=48)
    g = lambda z: z * np.exp(1j * 0.7) + (0.31 - 0.22j)
    expect = [g(v) for v in base.vertices]
    worst = min(max(min(abs(v - e) for e in expect) for v in m.vertices)
                for m in mrects)
    checks.append((worst <= 1e-8, f"rigid motion vertex error {worst:.2e}"))
    act1 = action_value(moved, mrects[0]).value
    checks.append((abs(act1 - act0) <= 1e-8,
                   f"rigid motion action drift {abs(act1 - act0):.2e}"))

    lam = 2.0
    scaled = transform(ell, scale=lam, name="scaled")
    srects = find_rectangles(scaled, np.pi / 2, grid_n=48)
    act2 = action_value(scaled, srects[0]).value
    rel = abs(act2 - lam ** 2 * act0) / (lam ** 2 * act0)
    checks.append((rel <= 1e-9, f"scaling covariance rel err {rel:.2e}"))

    smooth = lambda u: u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    act3 = action_value(ell, base, profile=smooth).value
    checks.append((abs(act3 - act0) <= 1e-9,
                   f"speed profile drift {abs(act3 - act0):.2e}"))
    return _result(6, "action cross-validation", t0, checks)


def criterion_7_cappings(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    for name, theta in (("circle", 0.9), ("ellipse21", 1.0), ("square64", np.pi / 2),
                        ("ellipse21", 2.5)):
        curve = ctx.curves[name]
        for r in find_rectangles(curve, theta, grid_n=SWEEP_GRID):
            cap = build_capping(curve, r)
            l1, l2 = capping_loop_points(curve, cap)
            w = winding_number_points(l1 - l2)
            dmin = float(np.min(np.abs(l1 - l2)))
            if w != 0:
                checks.append((False, f"{name}@{theta:.2f}: winding {w}"))
            if dmin <= 1e-6:
                checks.append((False, f"{name}@{theta:.2f}: min diff {dmin:.2e}"))
    circle = ctx.curves["circle"]
    r = find_rectangles(circle, np.pi / 2, grid_n=SWEEP_GRID)[0]
    auto = build_capping(circle, r)
    forced = build_capping(circle, r, direction=-_path_direction(r))
    checks.append((auto.winding_correction == 0,
                   f"natural capping correction {auto.winding_correction}"))
    checks.append((abs(forced.winding_correction) == 1,
                   f"reversed path correction {forced.winding_correction}"))
    f1, f2 = capping_loop_points(circle, forced)
    wf = winding_number_points(f1 - f2)
    checks.append((wf == 0, f"reversed path corrected winding {wf}"))
    return _result(7, "capping invariants", t0, checks)


def _path_direction(rect) -> int:
    s, _t, s2, _t2 = rect.params
    fwd = (s2 - s) % (2.0 * np.pi)
    return 1 if fwd <= np.pi else -1


def criterion_8_no_shrinkout(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    poly = fixtures.square_polygon()
    run = approximate_and_track(poly, np.pi / 2, 4, 0.1)
    checks = []
    for lv in run.per_level:
        checks.append((abs(lv.area - poly.area()) <= 1e-10,
                       f"level {lv.level} area gap {abs(lv.area - poly.area()):.2e}"))
        checks.append((lv.curve_length <= 1.1 * poly.perimeter(),
                       f"level {lv.level} length {lv.curve_length:.4f}"))
        checks.append((lv.max_diameter is not None and lv.max_diameter >= 0.5,
                       f"level {lv.level} diameter {lv.max_diameter}"))
    gaps = run.vertex_gaps()
    checks.append((all(g is not None for g in gaps), "gaps defined at every level"))
    for g0, g1 in zip(gaps, gaps[1:]):
        checks.append((g1 <= 2.0 * g0 + 1e-12, f"gap growth {g0:.4f} -> {g1:.4f}"))
    checks.append((gaps[-1] <= 0.05, f"final Hausdorff gap {gaps[-1]:.4f}"))
    res = _result(8, "no-shrinkout fixture", t0, checks)
    if res.seconds > 120.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s > 120s"
    return res


def criterion_9_oracle_equivalence(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    for name in ("ellipse21", "square64"):
        curve = ctx.curves[name]
        for theta in (np.pi / 4, np.pi / 2, 3 * np.pi / 4):
            solver = find_rectangles(curve, theta, grid_n=48, geometric=False)
            oracle = grid_oracle_rectangles(curve, theta)
            missed = [o for o in oracle
                      if not any(torus_dist(o, r.params) < 1e-6 for r in solver)]
            spurious = [r.params for r in solver
                        if not any(torus_dist(o, r.params) < 1e-6 for o in oracle)]
            tag = f"{name}@{theta:.3f}"
            checks.append((not missed and not spurious,
                           f"{tag}: solver {len(solver)} oracle {len(oracle)} "
                           f"missed {len(missed)} spurious {len(spurious)}"))
    return _result(9, "oracle equivalence", t0, checks)


def grid_oracle_rectangles(curve, theta, grid=512, tol=1e-10):
    """Independent rectangle finder: dense residual grid plus scipy polishing.

    Scans the reduced residual norm over a grid x grid (s, t) lattice (the
    other two parameters by nearest-point projection), takes all strict local
    minima on the torus, polishes each with scipy's hybrid root finder, and
    returns the deduplicated canonical quadruples.
    """
    base = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    S, T = np.meshgrid(base, base, indexing="ij")
    s = S.ravel()
    t = T.ravel()
    z = curve.at(s)
    w = curve.at(t)
    m = 0.5 * (z + w)
    d = 0.5 * (z - w) * np.exp(-1j * theta)
    s2 = curve.project_params(m + d)
    t2 = curve.project_params(m - d)
    rot = np.exp(1j * theta)
    m2 = 0.5 * (curve.at(s2) + curve.at(t2))
    d2 = 0.5 * (curve.at(s2) - curve.at(t2)) * rot
    r1 = m2 + d2 - z
    r2 = m2 - d2 - w
    norm = np.maximum(np.abs(r1), np.abs(r2)).reshape(grid, grid)

    rad_cut = 1e-4 * curvemod.curve_radius(curve)
    sep = np.abs(z - w).reshape(grid, grid)
    local_min = np.ones_like(norm, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            local_min &= norm <= np.roll(np.roll(norm, di, axis=0), dj, axis=1)
    local_min &= sep > 2.0 * rad_cut
    cand = np.argwhere(local_min)

    sols = []
    for i, j in cand:
        x0 = np.array([base[i], base[j],
                       s2.reshape(grid, grid)[i, j], t2.reshape(grid, grid)[i, j]])
        sol = optimize.root(lambda p: rectangle_residual(curve, theta, p), x0,
                            method="hybr", tol=1e-13)
        if not sol.success:
            continue
        p = wrap_params(sol.x)
        if float(np.max(np.abs(rectangle_residual(curve, theta, p)))) > tol:
            continue
        if abs(curve.at(p[0]) - curve.at(p[1])) < 2.0 * rad_cut:
            continue
        sols.append(_canonical_quadruple(tuple(p)))
    out = []
    for q in sols:
        if not any(torus_dist(q, kq) < 1e-6 for kq in out):
            out.append(q)
    return out


CRITERIA = (
    criterion_1_circle_law,
    criterion_2_ellipse_square,
    criterion_3_ellipse_binormals,
    criterion_4_properties,
    criterion_5_intervals,
    criterion_6_action_crossval,
    criterion_7_cappings,
    criterion_8_no_shrinkout,
    criterion_9_oracle_equivalence,
)


def run_acceptance(numbers=None) -> list[CriterionResult]:
    ctx = AcceptanceContext()
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        if numbers is not None and i not in numbers:
            continue
        results.append(fn(ctx))
    return results


def format_table(results) -> str:
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"[{mark}] criterion {r.number}: {r.name} "
                     f"({r.seconds:.1f}s) - {r.detail}")
    ok = all(r.passed for r in results)
    lines.append(f"{'ALL CRITERIA PASS' if ok else 'FAILURES PRESENT'}")
    return "\n".join(lines)
