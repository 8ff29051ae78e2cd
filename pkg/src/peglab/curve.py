"""Plane Jordan curves as truncated Fourier series, plus polygon smoothing.

A curve is gamma(s) = sum_k c_k exp(i k s) over integer frequencies k.  The
constructor enforces the working invariants: the curve is simple, immersed,
and traversed counterclockwise (positive enclosed area).  All operations are
pure; instances are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree

from .errors import NotSimpleAfterSmoothing, NotSimpleCurve

GRID_N = 4096          # validation / projection grid size
SIMPLE_TOL = 1e-10     # coincidence tolerance for self-intersection claims


class JordanCurve:
    """A simple closed real analytic curve with counterclockwise orientation."""

    def __init__(self, modes, name: str = "curve", validate: bool = True):
        items = sorted((int(k), complex(c)) for k, c in dict(modes).items())
        self.freqs = np.array([k for k, _ in items], dtype=int)
        self.coefs = np.array([c for _, c in items], dtype=complex)
        self.name = str(name)
        if self.freqs.size == 0 or not np.any(self.freqs != 0):
            raise NotSimpleCurve("curve needs at least one nonzero frequency")
        if enclosed_area(self) < 0.0:
            # reparametrize s -> -s (frequency reversal); same image, CCW traversal
            self.freqs = -self.freqs[::-1]
            self.coefs = self.coefs[::-1].copy()
        self.freqs.setflags(write=False)
        self.coefs.setflags(write=False)
        self._dense_params = np.linspace(0.0, 2.0 * np.pi, GRID_N, endpoint=False)
        self._dense_points = self.at(self._dense_params)
        self._tree = None
        self._radius = None
        if validate:
            self._check_invariants()

    # -- evaluation ---------------------------------------------------------

    def at(self, s):
        """gamma(s); accepts scalars or arrays, 2pi-periodic."""
        return self._series(s, self.coefs)

    def deriv(self, s):
        """gamma'(s) = sum_k i k c_k exp(i k s)."""
        return self._series(s, 1j * self.freqs * self.coefs)

    def deriv2(self, s):
        """gamma''(s)."""
        return self._series(s, -(self.freqs.astype(float) ** 2) * self.coefs)

    def _series(self, s, coefs):
        s = np.asarray(s, dtype=float)
        e = np.exp(1j * s)
        out = np.zeros(np.broadcast(s, 0j).shape, dtype=complex)
        # Evaluate by cumulative powers of e^{is}: one exp call total.
        kp, cp = 0, np.ones_like(e)
        for k, c in zip(self.freqs, coefs):
            if k >= 0:
                while kp < k:
                    cp = cp * e
                    kp += 1
                out += c * cp
        kn, cn = 0, np.ones_like(e)
        ec = np.conj(e)
        for k, c in zip(self.freqs[::-1], coefs[::-1]):
            if k < 0:
                while kn > k:
                    cn = cn * ec
                    kn -= 1
                out += c * cn
        if out.shape == ():
            return complex(out)
        return out

    # -- internals ----------------------------------------------------------

    def dense_tree(self) -> cKDTree:
        if self._tree is None:
            pts = self._dense_points
            self._tree = cKDTree(np.column_stack([pts.real, pts.imag]))
        return self._tree

    def project_params(self, targets) -> np.ndarray:
        """Dense-grid parameters of the curve points nearest to target points."""
        t = np.atleast_1d(np.asarray(targets, dtype=complex))
        _, idx = self.dense_tree().query(np.column_stack([t.real, t.imag]))
        return self._dense_params[idx]

    def scale(self) -> float:
        """Coarse size of the curve, used for relative tolerances."""
        return float(np.max(np.abs(self._dense_points - np.mean(self._dense_points))))

    def radius(self) -> float:
        """Cached half-diameter."""
        if self._radius is None:
            self._radius = _compute_radius(self)
        return self._radius

    def _check_invariants(self):
        speed = np.abs(self.deriv(self._dense_params))
        if float(np.min(speed)) <= 0.0:
            raise NotSimpleCurve("curve is not immersed (gamma' vanishes on the grid)")
        if enclosed_area(self) <= 0.0:
            raise NotSimpleCurve("curve encloses no area")
        if not is_simple(self):
            raise NotSimpleCurve("curve is not simple")

    def modes_dict(self) -> dict[int, complex]:
        return {int(k): complex(c) for k, c in zip(self.freqs, self.coefs)}

    def __repr__(self):
        return f"JordanCurve({self.name!r}, {self.freqs.size} modes)"


@dataclass(frozen=True)
class PolygonCurve:
    """A simple closed polygon given by its vertices in order."""

    vertices: np.ndarray
    name: str = "polygon"

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex)
        if v.ndim != 1 or v.size < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if np.any(v == np.roll(v, -1)):
            raise ValueError("consecutive polygon vertices must be distinct")
        if _polygon_area(v) < 0.0:
            v = v[::-1].copy()
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if not _polygon_is_simple(v):
            raise ValueError("polygon is self-intersecting")

    def area(self) -> float:
        return _polygon_area(self.vertices)

    def perimeter(self) -> float:
        return float(np.sum(np.abs(np.roll(self.vertices, -1) - self.vertices)))

    def at(self, s):
        """Constant-speed evaluation; s in [0, 2pi) covers one full traversal."""
        v = self.vertices
        edges = np.roll(v, -1) - v
        lens = np.abs(edges)
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        total = cum[-1]
        arc = (np.asarray(s, dtype=float) % (2.0 * np.pi)) * total / (2.0 * np.pi)
        idx = np.clip(np.searchsorted(cum, arc, side="right") - 1, 0, v.size - 1)
        local = (arc - cum[idx]) / lens[idx]
        return v[idx] + local * edges[idx]


def _polygon_area(v: np.ndarray) -> float:
    x, y = v.real, v.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1, p2, q1, q2) -> np.ndarray:
    """Proper-crossing test for segment arrays (shared endpoints do not count)."""
    d1 = np.imag(np.conj(p2 - p1) * (q1 - p1))
    d2 = np.imag(np.conj(p2 - p1) * (q2 - p1))
    d3 = np.imag(np.conj(q2 - q1) * (p1 - q1))
    d4 = np.imag(np.conj(q2 - q1) * (p2 - q1))
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def _polygon_is_simple(v: np.ndarray) -> bool:
    n = v.size
    a = v
    b = np.roll(v, -1)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    return not np.any(_segments_cross(a[i], b[i], a[j], b[j]))


# -- measurements -----------------------------------------------------------


def evaluate(curve: JordanCurve, s):
    """Point of the curve at parameter s."""
    return curve.at(s)


def derivative(curve: JordanCurve, s):
    """Velocity of the curve at parameter s."""
    return curve.deriv(s)


def enclosed_area(curve: JordanCurve) -> float:
    """Signed enclosed area; equals pi * sum_k k |c_k|^2 for a Fourier curve."""
    return float(np.pi * np.sum(curve.freqs * np.abs(curve.coefs) ** 2))


def curve_radius(curve: JordanCurve) -> float:
    """Half the diameter, via coarse grid search refined by local ascent."""
    return curve.radius()


def _compute_radius(curve: JordanCurve) -> float:
    pts = curve._dense_points[::4]        # 1024-point coarse stage
    prm = curve._dense_params[::4]
    diff = np.abs(pts[:, None] - pts[None, :])
    i, j = np.unravel_index(np.argmax(diff), diff.shape)

    def neg_sq(x):
        d = curve.at(x[0]) - curve.at(x[1])
        return -(d.real * d.real + d.imag * d.imag)

    res = optimize.minimize(
        neg_sq, np.array([prm[i], prm[j]]), method="Nelder-Mead",
        options={"xatol": 1e-13, "fatol": 1e-14, "maxiter": 4000},
    )
    best = max(-res.fun, float(diff[i, j]) ** 2)
    return 0.5 * float(np.sqrt(best))


def curve_length(curve: JordanCurve) -> float:
    """Arc length by trapezoid doubling; spectrally accurate for analytic curves."""
    n = 256
    prev = None
    while n <= 2 ** 21:
        s = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        val = float(np.mean(np.abs(curve.deriv(s)))) * 2.0 * np.pi
        if prev is not None and abs(val - prev) <= 1e-9 * abs(val):
            return val
        prev = val
        n *= 2
    return prev


def is_simple(curve: JordanCurve) -> bool:
    """True iff distinct parameters map to distinct points.

    Candidate close pairs are collected from the dense sample grid by radius
    query; each candidate is confirmed or dismissed by a local Newton solve of
    gamma(s) = gamma(t).  A confirmed coincidence within SIMPLE_TOL at circular
    parameter separation above the grid scale means the curve is not simple.
    """
    params = curve._dense_params
    pts = curve._dense_points
    n = params.size
    step = 2.0 * np.pi / n
    gap = np.abs(np.roll(pts, -1) - pts)
    radius = 2.0 * float(np.max(gap))
    pairs = curve.dense_tree().query_pairs(r=radius, output_type="ndarray")
    if pairs.size == 0:
        return True
    sep = np.abs(pairs[:, 0] - pairs[:, 1])
    sep = np.minimum(sep, n - sep)
    suspects = pairs[sep > 4]
    min_sep = 8 * step
    for i, j in suspects:
        s, t = params[i], params[j]
        if _confirm_coincidence(curve, s, t, min_sep):
            return False
    return True


def _confirm_coincidence(curve: JordanCurve, s: float, t: float, min_sep: float) -> bool:
    for _ in range(40):
        g = curve.at(s) - curve.at(t)
        if abs(g) < SIMPLE_TOL:
            break
        ds, dt = curve.deriv(s), curve.deriv(t)
        jac = np.array([[ds.real, -dt.real], [ds.imag, -dt.imag]])
        rhs = np.array([g.real, g.imag])
        try:
            delta = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            delta, *_ = np.linalg.lstsq(jac, rhs, rcond=None)
        if not np.all(np.isfinite(delta)):
            return False
        step = float(np.max(np.abs(delta)))
        s -= delta[0]
        t -= delta[1]
        if step < 1e-14:
            break
    else:
        return False
    if abs(curve.at(s) - curve.at(t)) >= SIMPLE_TOL:
        return False
    circ = abs((s - t) % (2.0 * np.pi))
    circ = min(circ, 2.0 * np.pi - circ)
    return circ > min_sep


def param_shift(curve: JordanCurve, c: float, name: str | None = None) -> JordanCurve:
    """The same geometric curve reparametrized by s -> s + c."""
    modes = {int(k): coef * np.exp(1j * k * c) for k, coef in curve.modes_dict().items()}
    return JordanCurve(modes, name or curve.name, validate=False)


def transform(curve: JordanCurve, rotation: float = 0.0, translation: complex = 0j,
              scale: float = 1.0, name: str | None = None) -> JordanCurve:
    """Rigid motion / homothety of a curve, as a new mode list."""
    factor = scale * np.exp(1j * rotation)
    modes = {int(k): factor * c for k, c in curve.modes_dict().items()}
    modes[0] = modes.get(0, 0j) + complex(translation)
    return JordanCurve(modes, name or curve.name, validate=False)


# -- polygon smoothing ------------------------------------------------------


def smooth_approximate(polygon: PolygonCurve, mode_count: int, smoothing: float) -> JordanCurve:
    """Real analytic approximation of a polygon with its exact enclosed area.

    Constant-speed samples of the polygon are Fourier-truncated to frequencies
    |k| <= mode_count, damped by exp(-smoothing * k^2), and rescaled about the
    mean point so the enclosed area matches the polygon area exactly.
    """
    if mode_count < 8:
        raise ValueError("mode_count must be at least 8")
    if smoothing <= 0.0:
        raise ValueError("smoothing must be positive")
    m = max(4096, 8 * mode_count)
    s = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    samples = polygon.at(s)
    spec = np.fft.fft(samples) / m
    freqs = np.fft.fftfreq(m, d=1.0 / m).astype(int)
    keep = np.abs(freqs) <= mode_count
    modes = {}
    for k, c in zip(freqs[keep], spec[keep]):
        modes[int(k)] = c * np.exp(-smoothing * float(k) ** 2)

    area_raw = np.pi * sum(k * abs(c) ** 2 for k, c in modes.items())
    target = polygon.area()
    if area_raw <= 0.0:
        raise NotSimpleAfterSmoothing("smoothed curve lost its orientation")
    lam = float(np.sqrt(target / area_raw))
    center = modes.get(0, 0j)
    scaled = {k: (center + lam * (c - center) if k == 0 else lam * c)
              for k, c in modes.items()}
    try:
        return JordanCurve(scaled, name=f"{polygon.name}-smoothed")
    except NotSimpleCurve as exc:
        raise NotSimpleAfterSmoothing(
            f"smoothing {smoothing:g} too small for this polygon: {exc}") from exc


# -- persistence ------------------------------------------------------------


def curve_to_json(curve: JordanCurve) -> str:
    payload = {
        "name": curve.name,
        "modes": [
            {"k": int(k), "re": float(c.real), "im": float(c.imag)}
            for k, c in zip(curve.freqs, curve.coefs)
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def curve_from_json(text: str) -> JordanCurve:
    payload = json.loads(text)
    modes = {int(m["k"]): complex(float(m["re"]), float(m["im"])) for m in payload["modes"]}
    return JordanCurve(modes, name=payload.get("name", "curve"))


def polygon_to_json(polygon: PolygonCurve) -> str:
    payload = {
        "name": polygon.name,
        "vertices": [[float(v.real), float(v.imag)] for v in polygon.vertices],
    }
    return json.dumps(payload, indent=2) + "\n"


def polygon_from_json(text: str) -> PolygonCurve:
    payload = json.loads(text)
    verts = np.array([complex(x, y) for x, y in payload["vertices"]])
    return PolygonCurve(verts, name=payload.get("name", "polygon"))


def save_curve(curve: JordanCurve, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(curve_to_json(curve))


def load_curve(path) -> JordanCurve:
    with open(path, encoding="utf-8") as fh:
        return curve_from_json(fh.read())


def save_polygon(polygon: PolygonCurve, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(polygon_to_json(polygon))


def load_polygon(path) -> PolygonCurve:
    with open(path, encoding="utf-8") as fh:
        return polygon_from_json(fh.read())
