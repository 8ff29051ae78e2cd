"""Action of an inscribed rectangle via its diagonal-avoiding capping.

The trajectory of a rectangle flows one diagonal pair onto the other; its two
plane projections are circular arcs about the rectangle center.  The capping
closes the trajectory with a path on curve x curve whose parameter components
travel the same way around the curve, twisted by full core loops until the
difference projection of the closed loop has winding zero.  The action is

    theta * rad^2  -  (projected loop areas, core loops counted exactly),

and for elegant inscriptions it equals the directly computed area of the two
cone regions bounded by the half-diagonals and the curve arcs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import curve as curvemod
from .curve import JordanCurve
from .errors import DiagonalHit, NotElegant
from .geom import PointPair, signed_area_points, winding_number_points
from .inscribe import InscribedRectangle

TWO_PI = 2.0 * np.pi
DIAGONAL_TOL = 1e-6
AREA_AGREE_TOL = 1e-8
MAX_REFINE_SAMPLES = 1 << 21


@dataclass(frozen=True)
class CappedTrajectory:
    """A sampled trajectory plus its winding-zero boundary path on curve x curve."""

    rect: InscribedRectangle
    arc_samples: tuple            # PointPair samples of the flow
    path_a: np.ndarray            # parameter path of the first component
    path_b: np.ndarray            # parameter path of the second component
    winding_correction: int


@dataclass(frozen=True)
class ActionValue:
    value: float
    term_hamiltonian: float
    term_area: float
    winding_correction: int = 0


def _flow(zp, wp, angles):
    m = 0.5 * (zp + wp)
    d = 0.5 * (zp - wp) * np.exp(1j * np.asarray(angles))
    return m + d, m - d


def build_trajectory(rect: InscribedRectangle, samples: int, profile=None
                     ) -> list[PointPair]:
    """The flow trajectory as a list of pairs, uniform in flow time.

    A monotone profile u(t) with u(0)=0, u(1)=1 only reparametrizes the path;
    areas and windings are unchanged, so uniform speed is the default.
    """
    if samples < 64:
        raise ValueError("samples must be at least 64")
    z, w = _flow(rect.vertices[0], rect.vertices[2],
                 rect.theta * _profile_grid(samples, profile))
    return [PointPair(complex(a), complex(b)) for a, b in zip(z, w)]


def _profile_grid(n, profile):
    u = np.linspace(0.0, 1.0, n + 1)
    if profile is None:
        return u
    v = np.asarray(profile(u), dtype=float)
    if abs(v[0]) > 1e-12 or abs(v[-1] - 1.0) > 1e-12 or np.any(np.diff(v) < 0):
        raise ValueError("profile must be monotone with endpoints 0 and 1")
    return v


def _same_direction_paths(rect: InscribedRectangle, direction: int | None = None):
    """Parameter spans (start, delta) for both components, same rotation sense.

    By default the direction giving the shorter span for the first component
    is used; passing direction=+1 or -1 overrides it (the other component is
    always forced to the same sense).
    """
    s, t, s2, t2 = rect.params
    fwd = (s2 - s) % TWO_PI
    if direction is None:
        direction = 1 if fwd <= np.pi else -1
    if direction > 0:
        da = fwd if fwd > 0 else TWO_PI
        db = (t2 - t) % TWO_PI
        db = db if db > 0 else TWO_PI
    else:
        da = (s - s2) % TWO_PI
        da = da if da > 0 else TWO_PI
        db = (t - t2) % TWO_PI
        db = db if db > 0 else TWO_PI
        da, db = -da, -db
    return (s, da), (t, db)


def _loop_components(curve, rect, n, direction=None, profile=None):
    """Projected closed loops (pi1, pi2) of trajectory-then-path at resolution n."""
    tz, tw = _flow(rect.vertices[0], rect.vertices[2],
                   rect.theta * _profile_grid(n, profile))
    (a0, da), (b0, db) = _same_direction_paths(rect, direction)
    r = np.linspace(0.0, 1.0, n + 1)
    a = a0 + da * r
    b = b0 + db * r
    pz = curve.at(a)
    pw = curve.at(b)
    # trajectory ends where the path begins; drop duplicated junction points
    loop1 = np.concatenate([tz[:-1], pz[:-1]])
    loop2 = np.concatenate([tw[:-1], pw[:-1]])
    return loop1, loop2, a, b


def _loop_winding(loop1, loop2):
    return winding_number_points(loop1 - loop2)


def build_capping(curve: JordanCurve, rect: InscribedRectangle, samples: int = 512,
                  direction: int | None = None) -> CappedTrajectory:
    """Capping boundary with diagonal winding forced to zero by core loops.

    The raw same-direction path may wind around the diagonal; each appended
    core loop (both parameters advancing together by a full turn) shifts the
    winding by one, so the correction count is exactly the raw winding.
    """
    n = max(64, samples)
    while True:
        loop1, loop2, a, b = _loop_components(curve, rect, n, direction)
        d = loop1 - loop2
        if float(np.min(np.abs(d))) <= DIAGONAL_TOL:
            raise DiagonalHit(
                "capping path passes within tolerance of the diagonal")
        steps = np.abs(np.angle(np.roll(d, -1) / d))
        if float(np.max(steps)) < 0.9 * np.pi:
            break
        if n >= MAX_REFINE_SAMPLES:
            raise DiagonalHit("cannot resolve capping winding near the diagonal")
        n *= 2
    k = _loop_winding(loop1, loop2)
    tz, tw = _flow(rect.vertices[0], rect.vertices[2],
                   rect.theta * np.linspace(0.0, 1.0, n + 1))
    if k != 0:
        r = np.linspace(0.0, 1.0, n + 1)[1:]
        sign = -1.0 if k > 0 else 1.0
        for _ in range(abs(k)):
            a = np.concatenate([a, a[-1] + sign * TWO_PI * r])
            b = np.concatenate([b, b[-1] + sign * TWO_PI * r])
        loop1 = np.concatenate([tz[:-1], curve.at(a[:-1])])
        loop2 = np.concatenate([tw[:-1], curve.at(b[:-1])])
        d = loop1 - loop2
        if float(np.min(np.abs(d))) <= DIAGONAL_TOL:
            raise DiagonalHit("corrected capping path meets the diagonal")
        if _loop_winding(loop1, loop2) != 0:
            raise DiagonalHit("winding correction failed to close the capping class")
    arc = tuple(PointPair(complex(x), complex(y)) for x, y in zip(tz, tw))
    return CappedTrajectory(rect=rect, arc_samples=arc, path_a=a, path_b=b,
                            winding_correction=int(k))


def capping_loop_points(curve: JordanCurve, capping: CappedTrajectory):
    """Both projected closed loops of the stored capping, as point arrays."""
    tz = np.array([p.z for p in capping.arc_samples])
    tw = np.array([p.w for p in capping.arc_samples])
    pz = curve.at(capping.path_a)
    pw = curve.at(capping.path_b)
    return (np.concatenate([tz[:-1], pz[:-1]]),
            np.concatenate([tw[:-1], pw[:-1]]))


def action_value(curve: JordanCurve, rect: InscribedRectangle, samples: int = 2048,
                 direction: int | None = None, profile=None) -> ActionValue:
    """Hamiltonian action of the rectangle's trajectory with its preferred capping.

    The area term refines by doubling with Richardson extrapolation until two
    consecutive extrapolated values agree within AREA_AGREE_TOL; the appended
    core loops contribute exactly winding * 2 * enclosed_area and are accounted
    for in closed form.
    """
    term_h = rect.theta * rect.rad ** 2
    probe = build_capping(curve, rect, samples=max(256, samples // 4),
                          direction=direction)
    k = probe.winding_correction
    core_term = 2.0 * k * curvemod.enclosed_area(curve)

    n = max(256, samples)
    prev_raw = None
    prev_extrap = None
    area = None
    while n <= MAX_REFINE_SAMPLES:
        loop1, loop2, _a, _b = _loop_components(curve, rect, n, direction, profile)
        raw = signed_area_points(loop1) + signed_area_points(loop2)
        if prev_raw is not None:
            extrap = raw + (raw - prev_raw) / 3.0
            if prev_extrap is not None and abs(extrap - prev_extrap) <= AREA_AGREE_TOL:
                area = extrap
                break
            prev_extrap = extrap
        prev_raw = raw
        n *= 2
    if area is None:
        area = prev_extrap if prev_extrap is not None else prev_raw
    term_area = float(area) - core_term
    return ActionValue(value=term_h - term_area, term_hamiltonian=term_h,
                       term_area=term_area, winding_correction=k)


# -- direct region computation for elegant inscriptions ----------------------


def _arc_between(curve, p_from, p_to, n):
    """Forward (counterclockwise) curve arc from parameter p_from to p_to."""
    span = (p_to - p_from) % TWO_PI
    if span == 0.0:
        span = TWO_PI
    return curve.at(p_from + span * np.linspace(0.0, 1.0, n + 1))


def ice_cream_area(curve: JordanCurve, rect: InscribedRectangle) -> float:
    """Total area of the two cone regions of an elegant inscription.

    Each region is bounded by the two half-diagonals from the rectangle center
    and the forward curve arc joining a primed vertex to its rotated image;
    areas come from boundary quadrature with Richardson refinement.
    """
    if not is_elegant(curve, rect):
        raise NotElegant("region boundaries self-intersect for this inscription")
    s, t, s2, t2 = rect.params
    m = rect.center
    total = 0.0
    for p_from, p_to in ((s2, s), (t2, t)):
        n = 1024
        prev_raw = None
        prev_extrap = None
        val = None
        while n <= MAX_REFINE_SAMPLES:
            arc = _arc_between(curve, p_from, p_to, n)
            boundary = np.concatenate([[m], arc])
            raw = signed_area_points(boundary)
            if prev_raw is not None:
                extrap = raw + (raw - prev_raw) / 3.0
                if prev_extrap is not None and abs(extrap - prev_extrap) <= 1e-9:
                    val = extrap
                    break
                prev_extrap = extrap
            prev_raw = raw
            n *= 2
        total += float(val if val is not None else prev_extrap)
    return total


def is_elegant(curve: JordanCurve, rect: InscribedRectangle) -> bool:
    """Proxy for the curve being isotopic into the rectangle rel its vertices.

    Requires the curve to visit the four vertices in the rectangle's cyclic
    order, and the four arc-plus-side loops to be simple with pairwise
    disjoint interiors containing no rectangle vertex.
    """
    s, t, s2, t2 = rect.params
    order = np.argsort([s2, s, t2, t])
    labels = [0, 1, 2, 3]  # cyclic vertex order z', z, w', w
    seq = [labels[i] for i in order]
    start = seq.index(0)
    seq = seq[start:] + seq[:start]
    if seq != [0, 1, 2, 3]:
        # a counterclockwise curve elegantly inscribing a rectangle visits the
        # vertices in the rectangle's own counterclockwise order
        return False

    params = sorted([(s2 % TWO_PI, 0), (s % TWO_PI, 1), (t2 % TWO_PI, 2), (t % TWO_PI, 3)])
    n_arc = 512
    arcs = []
    verts = []
    for i in range(4):
        p0, v0 = params[i]
        p1, v1 = params[(i + 1) % 4]
        arcs.append(_arc_between(curve, p0, p1, n_arc))
        verts.append((rect.vertices[v0], rect.vertices[v1]))

    for i in range(4):
        arc = arcs[i]
        v0, v1 = verts[i]
        if _polyline_hits_segment(arc[1:-1], v1, v0):
            return False
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            v0, v1 = verts[j]
            if _polyline_hits_segment(arcs[i][1:-1], v0, v1):
                return False
    for i in range(4):
        closed = arcs[i]      # the closing side is the implicit last-to-first edge
        for v in rect.vertices:
            if v in (verts[i][0], verts[i][1]):
                continue
            if _point_in_loop(v, closed):
                return False
        for j in range(4):
            if i == j:
                continue
            mid = arcs[j][n_arc // 2]
            if _point_in_loop(mid, closed):
                return False
    return True


def _polyline_hits_segment(points, q1, q2) -> bool:
    p1 = points[:-1]
    p2 = points[1:]
    d1 = np.imag(np.conj(p2 - p1) * (q1 - p1))
    d2 = np.imag(np.conj(p2 - p1) * (q2 - p1))
    d3 = np.imag(np.conj(q2 - q1) * (p1 - q1))
    d4 = np.imag(np.conj(q2 - q1) * (p2 - q1))
    return bool(np.any((d1 * d2 < 0) & (d3 * d4 < 0)))


def _point_in_loop(pt, loop_points) -> bool:
    rel = loop_points - pt
    r = np.abs(rel)
    if float(np.min(r)) < 1e-9:
        return False
    args = np.angle(np.roll(rel, -1) / rel)
    return int(round(float(np.sum(args)) / TWO_PI)) != 0
