"""Tracking rectangle generators and their actions across the aspect angle.

A sweep solves for all generators on an angle grid, matches solutions between
adjacent grid angles by nearest parameter distance, and stitches the matches
into branches.  Branch ends in the interior of the grid are resolved by
pseudo-arclength continuation, which either locates a fold (a birth or death
event) or reconnects the branch across the gap.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import curve as curvemod
from .action import action_value
from .curve import JordanCurve
from .errors import DiagonalHit, EmptySpectrum, PeglabError
from .inscribe import (InscribedRectangle, _canonical_quadruple, _residual_batch,
                       find_rectangles, rectangle_from_params, torus_dist,
                       wrap_params)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
THETA_CLAMP = 1e-3
STEP_FLOOR = 1e-6
MATCH_MEDIAN_FACTOR = 3.0


@dataclass(frozen=True)
class BranchSample:
    theta: float
    params: tuple
    action: float
    rad: float


@dataclass(frozen=True)
class BranchEvent:
    kind: str                  # "boundary" | "fold" | "stall"
    theta: float
    params: tuple | None = None


@dataclass
class SpectrumBranch:
    id: int
    samples: list
    birth: BranchEvent
    death: BranchEvent
    stalled: bool = False


@dataclass
class SpectrumDiagram:
    branches: list
    curve_area: float
    curve_rad: float
    theta_grid: np.ndarray

    def at_grid(self, i: int) -> list:
        theta = self.theta_grid[i]
        out = []
        for br in self.branches:
            for s in br.samples:
                if abs(s.theta - theta) < 1e-12:
                    out.append((br.id, s))
        return out


def clamp_theta_range(theta_min: float, theta_max: float):
    lo = max(theta_min, THETA_CLAMP)
    hi = min(theta_max, np.pi - THETA_CLAMP)
    if not lo < hi:
        raise ValueError("empty angle range after clamping away from 0 and pi")
    return lo, hi


def _thread_count() -> int:
    raw = os.environ.get("PEGLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# -- pseudo-arclength continuation -------------------------------------------


def _refine_fold(curve, x, tangent, h, tol):
    """Bisect along the branch to the point where the angle component turns.

    x is the last point before the turn; steps that keep the tangent's angle
    sign advance the point, steps that flip it halve.  The fold is localized
    to an arclength of about 1e-8.
    """
    sigma = np.sign(tangent[0])
    tg = tangent
    for _ in range(80):
        if h < 1e-8:
            break
        cand, _r = _corrector(curve, x + h * tg, tg, tol)
        if cand is None:
            h *= 0.5
            continue
        tg_new = _tangent(curve, cand, tg)
        if tg_new @ tg < 0:
            tg_new = -tg_new
        if np.sign(tg_new[0]) == sigma:
            x, tg = cand, tg_new
        else:
            h *= 0.5
    return x


def _tangent(curve, x, prev):
    """Unit tangent of the solution set at x = (theta, params), oriented by prev."""
    _, J = _residual_batch(curve, x[0], x[None, 1:])
    theta = x[0]
    # augment with the theta column: dF/dtheta
    s2, t2 = x[3], x[4]
    rot = np.exp(1j * theta)
    d = 0.5 * (curve.at(s2) - curve.at(t2)) * 1j * rot
    col = np.array([d.real, d.imag, -d.real, -d.imag])
    Jfull = np.column_stack([col, J[0]])          # 4 x 5
    _, S, Vt = np.linalg.svd(Jfull)
    rank = int(np.sum(S > 1e-9 * S[0]))
    null = Vt[rank:]
    if null.shape[0] == 0:
        null = Vt[-1:]
    proj = null @ prev
    vec = proj @ null
    nrm = float(np.linalg.norm(vec))
    if nrm < 1e-10:
        vec = null[np.argmax(np.abs(null[:, 0]))]
        nrm = float(np.linalg.norm(vec))
        if vec @ prev < 0:
            vec = -vec
    tg = vec / nrm
    return tg


def _corrector(curve, x_pred, tg, tol, max_iter=25):
    x = x_pred.copy()
    for _ in range(max_iter):
        F, J = _residual_batch(curve, x[0], x[None, 1:])
        f = F[0]
        if float(np.max(np.abs(f))) < tol:
            return x, float(np.max(np.abs(f)))
        s2, t2 = x[3], x[4]
        rot = np.exp(1j * x[0])
        d = 0.5 * (curve.at(s2) - curve.at(t2)) * 1j * rot
        col = np.array([d.real, d.imag, -d.real, -d.imag])
        Jfull = np.column_stack([col, J[0]])
        G = np.concatenate([f, [float(tg @ (x - x_pred))]])
        JG = np.vstack([Jfull, tg[None, :]])
        step, *_ = np.linalg.lstsq(JG, G, rcond=None)
        if not np.all(np.isfinite(step)):
            return None, np.inf
        x = x - step
        if float(np.max(np.abs(step))) < 1e-13:
            F, _ = _residual_batch(curve, x[0], x[None, 1:], want_jacobian=False)
            r = float(np.max(np.abs(F[0])))
            return (x, r) if r < tol else (None, r)
    return None, np.inf


def _solve_at_theta(curve, theta, params0, tol):
    """Polish params at a pinned angle (used to land exactly on range ends)."""
    p = np.asarray(params0, dtype=float).copy()
    for _ in range(30):
        F, J = _residual_batch(curve, theta, p[None, :])
        f = F[0]
        if float(np.max(np.abs(f))) < tol:
            return wrap_params(p)
        step, *_ = np.linalg.lstsq(J[0], f, rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        p = p - step
    return None


def continue_branch(curve: JordanCurve, seed: InscribedRectangle,
                    theta_range, step: float, tol: float = 1e-10,
                    action_samples: int = 2048,
                    with_actions: bool = True) -> SpectrumBranch:
    """Pseudo-arclength continuation of a generator through an angle window.

    Both directions from the seed are traced; each side ends at the window
    boundary (landed on exactly) or at a fold where the angle component of the
    tangent reverses.  The adaptive step halves on corrector failure down to
    STEP_FLOOR, at which point the branch is truncated and flagged.
    """
    lo, hi = clamp_theta_range(*theta_range)
    x0 = np.array([seed.theta, *seed.params])
    if not lo - 1e-12 <= x0[0] <= hi + 1e-12:
        raise ValueError("seed angle outside the continuation range")

    def sample_at(x):
        rect = rectangle_from_params(curve, x[0], x[1:], 0.0)
        act = (action_value(curve, rect, samples=action_samples).value
               if with_actions else np.nan)
        return BranchSample(theta=float(x[0]), params=rect.params,
                            action=act, rad=rect.rad)

    stalled = False

    def trace(direction):
        nonlocal stalled
        samples = []
        x = x0.copy()
        prev = np.zeros(5)
        prev[0] = direction
        h = step
        event = None
        x_before = x0.copy()
        for _ in range(100000):
            tg = _tangent(curve, x, prev)
            if tg @ prev < 0:
                tg = -tg
            if prev[0] * tg[0] < 0 and np.abs(prev[0]) > 1e-8:
                xf = _refine_fold(curve, x_before, prev, h, tol)
                event = BranchEvent("fold", float(xf[0]), tuple(wrap_params(xf[1:])))
                break
            x_before = x.copy()
            prev = tg
            bound = hi if tg[0] > 0 else lo
            remaining = (bound - x[0]) / tg[0] if abs(tg[0]) > 1e-14 else np.inf
            if 0 <= remaining <= h:
                p_end = _solve_at_theta(curve, bound, x[1:] + remaining * tg[1:], tol)
                if p_end is not None:
                    samples.append(sample_at(np.array([bound, *p_end])))
                event = BranchEvent("boundary", float(bound))
                break
            x_new = None
            while h >= STEP_FLOOR:
                cand, _r = _corrector(curve, x + h * tg, tg, tol)
                if cand is not None:
                    x_new = cand
                    break
                h *= 0.5
            if x_new is None:
                event = BranchEvent("stall", float(x[0]), tuple(wrap_params(x[1:])))
                stalled = True
                log.warning("continuation stalled at step floor near theta=%.6f", x[0])
                break
            x = x_new
            samples.append(sample_at(x))
            h = min(step, h * 1.4)
        else:
            event = BranchEvent("stall", float(x[0]), tuple(wrap_params(x[1:])))
            stalled = True
        return samples, event

    down_samples, birth = trace(-1.0)
    up_samples, death = trace(+1.0)
    samples = list(reversed(down_samples)) + [sample_at(x0)] + up_samples
    return SpectrumBranch(id=0, samples=samples, birth=birth, death=death,
                          stalled=stalled)


# -- grid sweep ---------------------------------------------------------------


def _column(curve, theta, grid_n, tol, action_samples):
    rects = find_rectangles(curve, theta, grid_n=grid_n, tol=tol, geometric=False)
    out = []
    for r in rects:
        try:
            act = action_value(curve, r, samples=action_samples)
        except DiagonalHit as exc:
            log.warning("dropping rectangle at theta=%.6f: %s", theta, exc)
            continue
        out.append((r, act.value))
    return out


def _match_columns(prev_col, next_col):
    """One-to-one matching by canonical parameter distance; -1 means unmatched."""
    na, nb = len(prev_col), len(next_col)
    link = np.full(na, -1, dtype=int)
    if na == 0 or nb == 0:
        return link
    A = np.array([_canonical_quadruple(r.params) for r, _ in prev_col])
    B = np.array([_canonical_quadruple(r.params) for r, _ in next_col])
    d = np.abs(np.mod(A[:, None, :] - B[None, :, :], TWO_PI))
    d = np.minimum(d, TWO_PI - d).max(axis=2)
    best = d.min(axis=1)
    threshold = MATCH_MEDIAN_FACTOR * float(np.median(best))
    order = np.argsort(d, axis=None)
    used_b = set()
    acts_a = np.array([a for _, a in prev_col])
    acts_b = np.array([a for _, a in next_col])
    for flat in order:
        i, j = np.unravel_index(flat, d.shape)
        if link[i] >= 0 or j in used_b or d[i, j] > max(threshold, 1e-9):
            continue
        rivals = np.nonzero(d[i] <= 1.1 * d[i, j])[0]
        rivals = [jj for jj in rivals if jj not in used_b]
        if len(rivals) > 1:
            j_pick = min(rivals, key=lambda jj: abs(acts_b[jj] - acts_a[i]))
            if j_pick != j:
                log.warning("ambiguous branch match resolved by action at i=%d", i)
                j = int(j_pick)
        link[i] = j
        used_b.add(j)
    return link


def sweep_spectrum(curve: JordanCurve, theta_min: float, theta_max: float,
                   n_steps: int = 64, grid_n: int = 48, tol: float = 1e-10,
                   action_samples: int = 2048, direction: str = "up",
                   check_fraction: float = 0.1) -> SpectrumDiagram:
    """Branches of (theta, params, action) over an angle grid.

    Grid columns may be solved concurrently (PEGLAB_THREADS caps the pool);
    stitching is a deterministic sequential pass, so the result is independent
    of execution order and of the sweep direction.
    """
    if n_steps < 64:
        raise ValueError("n_steps must be at least 64")
    lo, hi = clamp_theta_range(theta_min, theta_max)
    grid = np.linspace(lo, hi, n_steps)

    workers = _thread_count()
    def solve(theta):
        return _column(curve, theta, grid_n, tol, action_samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(solve, grid))
    else:
        columns = [solve(th) for th in grid]

    if all(len(c) == 0 for c in columns):
        raise EmptySpectrum("no inscribed rectangles at any sweep angle")

    links = [None] * (n_steps - 1)
    if direction == "up":
        for i in range(n_steps - 1):
            links[i] = _match_columns(columns[i], columns[i + 1])
    else:
        for i in range(n_steps - 2, -1, -1):
            back = _match_columns(columns[i + 1], columns[i])
            link = np.full(len(columns[i]), -1, dtype=int)
            for jb, ja in enumerate(back):
                if ja >= 0:
                    link[ja] = jb
            links[i] = link

    branches = _stitch(curve, grid, columns, links, tol, action_samples)
    _cross_check(curve, grid, columns, grid_n, tol, check_fraction)
    return SpectrumDiagram(
        branches=branches,
        curve_area=curvemod.enclosed_area(curve),
        curve_rad=curvemod.curve_radius(curve),
        theta_grid=grid,
    )


def _stitch(curve, grid, columns, links, tol, action_samples):
    n_steps = len(grid)
    branches = []
    open_by_slot = {}      # slot index in the current column -> branch
    next_id = 0
    for i in range(n_steps):
        new_open = {}
        if i > 0:
            link = links[i - 1]
            for j_prev, br in open_by_slot.items():
                tgt = int(link[j_prev]) if j_prev < len(link) else -1
                if tgt >= 0:
                    new_open[tgt] = br
                else:
                    br.death = _death_event(curve, grid, i - 1, br, tol,
                                            action_samples)
        for j, (rect, act) in enumerate(columns[i]):
            sample = BranchSample(theta=float(grid[i]), params=rect.params,
                                  action=act, rad=rect.rad)
            br = new_open.get(j)
            if br is None:
                br = SpectrumBranch(id=next_id, samples=[sample],
                                    birth=_birth_event(curve, grid, i, rect, tol,
                                                       action_samples),
                                    death=BranchEvent("boundary", float(grid[-1])))
                next_id += 1
                branches.append(br)
                new_open[j] = br
            else:
                br.samples.append(sample)
        open_by_slot = new_open
    for br in open_by_slot.values():
        br.death = BranchEvent("boundary", float(grid[-1]))
    return branches


def _birth_event(curve, grid, i, rect, tol, action_samples):
    if i == 0:
        return BranchEvent("boundary", float(grid[0]))
    res = _resolve_fold(curve, rect, (grid[i - 1], grid[i]), tol, action_samples)
    return res if res is not None else BranchEvent("fold", float(grid[i]))


def _death_event(curve, grid, i, branch, tol, action_samples):
    if i == len(grid) - 1:
        return BranchEvent("boundary", float(grid[-1]))
    last = branch.samples[-1]
    rect = rectangle_from_params(curve, last.theta, last.params, 0.0)
    res = _resolve_fold(curve, rect, (grid[i], grid[i + 1]), tol, action_samples)
    return res if res is not None else BranchEvent("fold", float(grid[i]))


def _resolve_fold(curve, rect, window, tol, action_samples):
    step = (window[1] - window[0]) / 8.0
    try:
        br = continue_branch(curve, rect, window, step, tol=tol,
                             action_samples=action_samples, with_actions=False)
    except Exception as exc:
        log.warning("fold resolution failed near theta=%.6f: %s", rect.theta, exc)
        return None
    for ev in (br.birth, br.death):
        if ev.kind == "fold" and window[0] - 1e-9 <= ev.theta <= window[1] + 1e-9:
            return ev
    return None


def _cross_check(curve, grid, columns, grid_n, tol, fraction):
    """Re-solve a deterministic subset of columns and compare solution sets."""
    if fraction <= 0:
        return
    rng = np.random.default_rng(20240)
    count = max(1, int(round(fraction * len(grid))))
    picks = rng.choice(len(grid), size=count, replace=False)
    for i in sorted(int(p) for p in picks):
        fresh = find_rectangles(curve, grid[i], grid_n=grid_n, tol=tol,
                                geometric=False)
        have = [r.params for r, _ in columns[i]]
        if len(fresh) != len(have):
            raise PeglabError(
                f"diagram incomplete at theta={grid[i]:.6f}: "
                f"{len(have)} branch samples vs {len(fresh)} solver solutions")
        for f in fresh:
            if not any(torus_dist(f.params, h) < 1e-6 for h in have):
                raise PeglabError(
                    f"diagram misses a solver solution at theta={grid[i]:.6f}")
