"""Finding inscribed rectangles and binormals of a Jordan curve.

A rectangle of aspect angle theta in (0, pi) is encoded by a parameter
quadruple (s, t, s2, t2): the pair (gamma(s2), gamma(t2)) spans one diagonal
and rotates onto the other, (gamma(s), gamma(t)), under the diagonal flow by
theta.  Solutions are zeros of a 4-dimensional residual on the parameter
torus, found by damped Newton iteration from a deterministic seed grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import curve as curvemod
from .curve import JordanCurve
from .errors import EmptySpectrum

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEGENERACY_FACTOR = 1e-4     # reject |z - w| below this times the curve radius
DEDUP_PARAM_TOL = 1e-6
CONDITION_WARN = 1e10
HESSIAN_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class InscribedRectangle:
    """A nondegenerate inscribed rectangle with aspect angle theta."""

    theta: float
    params: tuple          # (s, t, s2, t2), each in [0, 2pi)
    vertices: tuple        # four corners in cyclic order
    center: complex
    rad: float             # half the diagonal length
    residual: float


@dataclass(frozen=True)
class Binormal:
    """An ordered pair of curve points whose tangents are normal to their chord."""

    params: tuple          # (s, t)
    chord_length: float
    morse_index: int
    degenerate: bool       # flat Hessian direction (e.g. circle families)


def wrap_params(p):
    return np.mod(p, TWO_PI)


def torus_dist(p, q) -> float:
    d = np.abs(np.mod(np.asarray(p) - np.asarray(q), TWO_PI))
    return float(np.max(np.minimum(d, TWO_PI - d)))


def rectangle_residual(curve: JordanCurve, theta: float, params) -> np.ndarray:
    """The four real defining equations at a parameter quadruple."""
    f, _ = _residual_batch(curve, theta, np.asarray(params, dtype=float)[None, :],
                           want_jacobian=False)
    return f[0]


def _residual_batch(curve, theta, P, want_jacobian=True):
    """Residuals (n,4) and Jacobians (n,4,4) for a batch of quadruples (n,4)."""
    s, t, s2, t2 = P[:, 0], P[:, 1], P[:, 2], P[:, 3]
    flat = np.concatenate([s, t, s2, t2])
    g = curve.at(flat)
    n = P.shape[0]
    gs, gt, gs2, gt2 = g[:n], g[n:2 * n], g[2 * n:3 * n], g[3 * n:]
    rot = np.exp(1j * theta)
    m = 0.5 * (gs2 + gt2)
    d = 0.5 * (gs2 - gt2) * rot
    f1 = m + d - gs
    f2 = m - d - gt
    F = np.stack([f1.real, f1.imag, f2.real, f2.imag], axis=1)
    if not want_jacobian:
        return F, None
    dg = curve.deriv(flat)
    ds, dt, ds2, dt2 = dg[:n], dg[n:2 * n], dg[2 * n:3 * n], dg[3 * n:]
    a = 0.5 * (1.0 + rot)
    b = 0.5 * (1.0 - rot)
    # complex partials of (f1, f2) w.r.t. (s, t, s2, t2)
    j1 = np.stack([-ds, np.zeros_like(dt), a * ds2, b * dt2], axis=1)
    j2 = np.stack([np.zeros_like(ds), -dt, b * ds2, a * dt2], axis=1)
    J = np.empty((n, 4, 4))
    J[:, 0, :] = j1.real
    J[:, 1, :] = j1.imag
    J[:, 2, :] = j2.real
    J[:, 3, :] = j2.imag
    return F, J


def _newton_batch(curve, theta, seeds, tol, max_iter=50):
    """Damped Newton on all seeds at once; returns solutions, residuals, ok mask.

    Steps come from the SVD pseudoinverse, which degrades gracefully to a
    minimum-norm Gauss-Newton step on singular (Morse-Bott) families.
    """
    return _generic_newton_batch(
        lambda P, wj=True: _residual_batch(curve, theta, P, want_jacobian=wj),
        seeds, tol, max_iter)


def _solution_conditions(curve, theta, quads):
    _, J = _residual_batch(curve, theta, np.array(quads))
    S = np.linalg.svd(J, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        conds = S[:, 0] / S[:, -1]
    return np.where(np.isfinite(conds), conds, np.inf)


FAMILY_MAX_REPRESENTATIVES = 32


def _thin_degenerate(kept, conds):
    """Thin Morse-Bott families to representatives near fixed anchor parameters.

    Isolated (well-conditioned) solutions are always kept.  Near-singular ones
    are snapped to a fixed grid of first-parameter anchors, which keeps the
    chosen representatives stable as other inputs (e.g. the aspect angle) vary.
    """
    degen = [k for k, c in zip(kept, conds) if c > CONDITION_WARN]
    regular = [k for k, c in zip(kept, conds) if c <= CONDITION_WARN]
    if len(degen) > FAMILY_MAX_REPRESENTATIVES:
        log.info("degenerate family with %d members; keeping up to %d anchored "
                 "representatives", len(degen), FAMILY_MAX_REPRESENTATIVES)
        firsts = np.array([k[0][0] for k in degen])
        anchors = np.linspace(0.0, TWO_PI, FAMILY_MAX_REPRESENTATIVES,
                              endpoint=False)
        picked = set()
        for a in anchors:
            d = np.abs(np.mod(firsts - a, TWO_PI))
            d = np.minimum(d, TWO_PI - d)
            picked.add(int(np.argmin(d)))
        degen = [degen[i] for i in sorted(picked)]
    return regular + degen


def _canonical_quadruple(q):
    swapped = (q[1], q[0], q[3], q[2])
    return min(tuple(q), swapped)


def _dedup_params(quads, residuals, tol):
    """Keep the best representative of each parameter cluster, modulo pair swap."""
    order = np.argsort(residuals)
    canon = np.array([_canonical_quadruple(q) for q in quads])
    kept_idx: list[int] = []
    kept_arr = np.empty((0, canon.shape[1]))
    for i in order:
        if kept_arr.shape[0]:
            d = np.abs(np.mod(kept_arr - canon[i], TWO_PI))
            d = np.minimum(d, TWO_PI - d)
            if float(np.min(np.max(d, axis=1))) < tol:
                continue
        kept_idx.append(i)
        kept_arr = np.vstack([kept_arr, canon[i]])
    return [(tuple(canon[i]), residuals[i]) for i in kept_idx]


def rectangle_from_params(curve: JordanCurve, theta: float, params, residual: float
                          ) -> InscribedRectangle:
    s, t, s2, t2 = wrap_params(np.asarray(params, dtype=float))
    pts = curve.at(np.array([s, t, s2, t2]))
    z, w, zp, wp = (complex(p) for p in pts)
    center = 0.5 * (z + w)
    rad = 0.5 * abs(z - w)
    return InscribedRectangle(
        theta=float(theta),
        params=(float(s), float(t), float(s2), float(t2)),
        vertices=(zp, z, wp, w),
        center=center,
        rad=float(rad),
        residual=float(residual),
    )


def find_rectangles(curve: JordanCurve, theta: float, grid_n: int = 48,
                    tol: float = 1e-10, geometric: bool = True
                    ) -> list[InscribedRectangle]:
    """All inscribed theta-rectangles found from a grid_n x grid_n seed grid.

    Each seed (s, t) is completed to a quadruple by projecting the rotated
    pair back onto the curve, then polished by damped Newton.  Converged
    solutions are filtered for nondegeneracy, deduplicated modulo the ordered
    pair swap, and (by default) merged into geometric rectangles; pass
    geometric=False to keep distinct ordered-pair generators separate.
    """
    if not (0.0 < theta < np.pi):
        raise ValueError("theta must lie strictly between 0 and pi")
    if grid_n < 32:
        raise ValueError("grid_n must be at least 32")
    rad_cut = DEGENERACY_FACTOR * curvemod.curve_radius(curve)

    base = np.linspace(0.0, TWO_PI, grid_n, endpoint=False) + TWO_PI / (2 * grid_n)
    S, T = np.meshgrid(base, base, indexing="ij")
    s0 = S.ravel()
    t0 = T.ravel()
    keep = np.abs(curve.at(s0) - curve.at(t0)) > rad_cut
    s0, t0 = s0[keep], t0[keep]
    zr, wr = _rotate_back(curve, theta, s0, t0)
    s2_0 = curve.project_params(zr)
    t2_0 = curve.project_params(wr)
    seeds = np.column_stack([s0, t0, s2_0, t2_0])

    sols, res, ok = _newton_batch(curve, theta, seeds, tol)
    sols, res = sols[ok], res[ok]
    if sols.size == 0:
        return []
    d = np.abs(curve.at(sols[:, 0]) - curve.at(sols[:, 1]))
    keep = d >= 2.0 * rad_cut
    sols, res = sols[keep], res[keep]
    if sols.size == 0:
        return []

    kept = _dedup_params([tuple(q) for q in sols], res, DEDUP_PARAM_TOL)
    conds = _solution_conditions(curve, theta, [q for q, _ in kept])
    kept = _thin_degenerate(kept, conds)
    rects = [rectangle_from_params(curve, theta, q, r) for q, r in kept]
    if geometric:
        rects = _dedup_geometric(rects, 1e-6 * max(curve.scale(), 1.0))
    return sorted(rects, key=lambda r: r.params)


def _rotate_back(curve, theta, s, t):
    z = curve.at(s)
    w = curve.at(t)
    m = 0.5 * (z + w)
    d = 0.5 * (z - w) * np.exp(-1j * theta)
    return m + d, m - d


def _vertex_set_dist(a, b) -> float:
    A = np.asarray(a)
    B = np.asarray(b)
    d = np.abs(A[:, None] - B[None, :])
    return max(float(np.max(np.min(d, axis=1))), float(np.max(np.min(d, axis=0))))


def _dedup_geometric(rects, tol):
    out = []
    for r in sorted(rects, key=lambda r: r.residual):
        if any(_vertex_set_dist(r.vertices, o.vertices) < tol for o in out):
            continue
        out.append(r)
    return out


# -- binormals ---------------------------------------------------------------


def binormal_residual(curve: JordanCurve, s, t):
    """Orthogonality defects of both tangents against the chord."""
    delta = curve.at(s) - curve.at(t)
    f1 = np.real(curve.deriv(s) * np.conj(delta))
    f2 = np.real(curve.deriv(t) * np.conj(delta))
    return f1, f2


def _binormal_batch(curve, P, want_jacobian=True):
    s, t = P[:, 0], P[:, 1]
    flat = np.concatenate([s, t])
    g = curve.at(flat)
    dg = curve.deriv(flat)
    n = P.shape[0]
    gs, gt = g[:n], g[n:]
    ds, dt = dg[:n], dg[n:]
    delta = gs - gt
    F = np.stack([np.real(ds * np.conj(delta)), np.real(dt * np.conj(delta))], axis=1)
    if not want_jacobian:
        return F, None
    d2 = curve.deriv2(flat)
    d2s, d2t = d2[:n], d2[n:]
    cross = np.real(ds * np.conj(dt))
    J = np.empty((n, 2, 2))
    J[:, 0, 0] = np.real(d2s * np.conj(delta)) + np.abs(ds) ** 2
    J[:, 0, 1] = -cross
    J[:, 1, 0] = cross
    J[:, 1, 1] = np.real(d2t * np.conj(delta)) - np.abs(dt) ** 2
    return F, J


def chord_hessian(curve: JordanCurve, s: float, t: float) -> np.ndarray:
    """Hessian of half the squared chord length on the parameter torus."""
    gs, gt = curve.at(s), curve.at(t)
    ds, dt = curve.deriv(s), curve.deriv(t)
    d2s, d2t = curve.deriv2(s), curve.deriv2(t)
    delta = gs - gt
    h_ss = np.real(d2s * np.conj(delta)) + abs(ds) ** 2
    h_st = -np.real(ds * np.conj(dt))
    h_tt = -np.real(d2t * np.conj(delta)) + abs(dt) ** 2
    return np.array([[h_ss, h_st], [h_st, h_tt]])


def find_binormals(curve: JordanCurve, grid_n: int = 48, tol: float = 1e-10
                   ) -> list[Binormal]:
    """All ordered binormal pairs, with Morse data from the chord Hessian."""
    if grid_n < 32:
        raise ValueError("grid_n must be at least 32")
    rad_cut = DEGENERACY_FACTOR * curvemod.curve_radius(curve)
    base = np.linspace(0.0, TWO_PI, grid_n, endpoint=False) + TWO_PI / (2 * grid_n)
    S, T = np.meshgrid(base, base, indexing="ij")
    seeds = np.column_stack([S.ravel(), T.ravel()])
    seeds = seeds[np.abs(curve.at(seeds[:, 0]) - curve.at(seeds[:, 1])) > rad_cut]

    sols, res, ok = _generic_newton_batch(
        lambda P, wj=True: _binormal_batch(curve, P, wj), seeds, tol)
    sols, res = sols[ok], res[ok]
    if sols.size == 0:
        return []
    chord = np.abs(curve.at(sols[:, 0]) - curve.at(sols[:, 1]))
    keep = chord > 2.0 * rad_cut
    sols, res = sols[keep], res[keep]
    if sols.size == 0:
        return []

    kept = _dedup_rows([tuple(q) for q in sols], res, DEDUP_PARAM_TOL)
    hessians = [chord_hessian(curve, s, t) for (s, t), _ in kept]
    degens = [abs(float(np.linalg.det(h))) < HESSIAN_DEGENERATE_TOL for h in hessians]
    conds = np.where(degens, np.inf, 0.0)
    kept = _thin_degenerate(kept, conds)

    out = []
    for (s, t), _r in kept:
        hess = chord_hessian(curve, s, t)
        eig = np.linalg.eigvalsh(hess)
        out.append(Binormal(
            params=(float(s), float(t)),
            chord_length=float(abs(curve.at(s) - curve.at(t))),
            morse_index=int(np.sum(eig < 0)),
            degenerate=abs(float(np.linalg.det(hess))) < HESSIAN_DEGENERATE_TOL,
        ))
    return sorted(out, key=lambda b: b.params)


def _dedup_rows(rows, residuals, tol):
    """Best representative per cluster under the torus max-metric (no symmetry)."""
    order = np.argsort(residuals)
    arr = np.array(rows)
    kept_idx: list[int] = []
    kept_arr = np.empty((0, arr.shape[1]))
    for i in order:
        if kept_arr.shape[0]:
            d = np.abs(np.mod(kept_arr - arr[i], TWO_PI))
            d = np.minimum(d, TWO_PI - d)
            if float(np.min(np.max(d, axis=1))) < tol:
                continue
        kept_idx.append(i)
        kept_arr = np.vstack([kept_arr, arr[i]])
    return [(tuple(arr[i]), residuals[i]) for i in kept_idx]


def _generic_newton_batch(fj, seeds, tol, max_iter=50):
    """The damped-Newton engine of _newton_batch for any batched system."""
    P = seeds.copy()
    n = P.shape[0]
    ok = np.zeros(n, dtype=bool)
    res_norm = np.full(n, np.inf)
    last_step = np.full(n, np.inf)
    active = np.arange(n)
    for _ in range(max_iter):
        if active.size == 0:
            break
        F, J = fj(P[active])
        norms = np.max(np.abs(F), axis=1)
        res_norm[active] = norms
        conv = (norms < tol) & (last_step[active] < 1e-12)
        ok[active[conv]] = True
        live = ~conv
        active = active[live]
        if active.size == 0:
            break
        F, J, norms = F[live], J[live], norms[live]
        # Damped normal equations: on singular (Morse-Bott) Jacobians this is a
        # regularized Gauss-Newton step, since J^T F has no null-space component.
        JtJ = np.einsum("nki,nkj->nij", J, J)
        JtF = np.einsum("nki,nk->ni", J, F)
        diag = np.einsum("nii->ni", JtJ)
        eps = 1e-12 * np.maximum(np.max(diag, axis=1), 1.0)
        JtJ[:, np.arange(J.shape[2]), np.arange(J.shape[2])] += eps[:, None]
        step = np.linalg.solve(JtJ, JtF[..., None])[..., 0]
        lam = np.ones(active.size)
        accepted = np.zeros(active.size, dtype=bool)
        new_p = P[active].copy()
        for _ in range(25):
            todo = np.nonzero(~accepted)[0]
            if todo.size == 0:
                break
            trial = P[active[todo]] - lam[todo, None] * step[todo]
            Ft, _ = fj(trial, False)
            tn = np.max(np.abs(Ft), axis=1)
            better = tn <= (1.0 - 0.25 * lam[todo]) * norms[todo] + 1e-15
            sel = todo[better]
            new_p[sel] = trial[better]
            accepted[sel] = True
            lam[~accepted] *= 0.5
        P[active[accepted]] = new_p[accepted]
        last_step[active[accepted]] = np.max(
            np.abs(lam[accepted, None] * step[accepted]), axis=1)
        active = active[accepted]
    return wrap_params(P), res_norm, ok


# -- width -------------------------------------------------------------------


def estimate_width(curve: JordanCurve, theta_steps: int = 32) -> float:
    """Upper estimate of the infimal inscribed-rectangle diameter.

    Scans a theta grid for rectangles, adds the binormal chords (the theta -> 0
    limit of degenerating rectangles), and refines the best candidate by a
    constrained local descent in (theta, parameters).
    """
    if theta_steps < 16:
        raise ValueError("theta_steps must be at least 16")
    thetas = np.pi * (np.arange(1, theta_steps + 1)) / (theta_steps + 1)
    best = np.inf
    best_point = None
    found_any = False
    for theta in thetas:
        for r in find_rectangles(curve, theta, grid_n=32, tol=1e-9):
            found_any = True
            diam = 2.0 * r.rad
            if diam < best:
                best = diam
                best_point = (theta, r.params)
    if not found_any:
        raise EmptySpectrum("no inscribed rectangles at any sampled angle")
    for b in find_binormals(curve, grid_n=32, tol=1e-9):
        best = min(best, b.chord_length)
    if best_point is not None:
        refined = _descend_width(curve, best_point)
        if refined is not None:
            best = min(best, refined)
    return float(best)


def _descend_width(curve, point):
    theta0, params0 = point
    x0 = np.array([theta0, *params0])

    def objective(x):
        return float(np.abs(curve.at(x[1]) - curve.at(x[2])))

    def constraint(x):
        return rectangle_residual(curve, x[0], x[1:])

    try:
        res = optimize.minimize(
            objective, x0, method="SLSQP",
            constraints=[{"type": "eq", "fun": constraint}],
            bounds=[(1e-4, np.pi - 1e-4)] + [(None, None)] * 4,
            options={"maxiter": 200, "ftol": 1e-12},
        )
    except Exception:       # descent is best-effort refinement only
        return None
    if not np.all(np.isfinite(res.x)):
        return None
    if float(np.max(np.abs(constraint(res.x)))) > 1e-7:
        return None
    return objective(res.x)
