"""Pair-space primitives: the rotation flow about the diagonal, windings, areas.

Sign convention used throughout the package: ``rot_theta`` rotates the
difference coordinate ``d = (z - w)/2`` by ``exp(+i*theta)`` while fixing the
midpoint ``m = (z + w)/2``.  Every downstream angle, orientation, and area
sign depends on this one choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CenterOnLoop

CENTER_TOL = 1e-9


@dataclass(frozen=True)
class PointPair:
    """An ordered pair of plane points, i.e. a point of C x C."""

    z: complex
    w: complex


@dataclass(frozen=True)
class SampledLoop:
    """A closed polyline; the edge from the last point back to the first is implicit."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim != 1 or pts.size < 3:
            raise ValueError("a loop needs at least 3 points")
        nxt = np.roll(pts, -1)
        if np.any(pts == nxt):
            raise ValueError("consecutive loop points must be distinct")
        object.__setattr__(self, "points", pts)


def rotate_pairs(z, w, theta: float):
    """Vectorized diagonal rotation: arrays of z and w to their rotated images."""
    if theta == 0.0:
        return z, w
    m = 0.5 * (z + w)
    d = 0.5 * (z - w) * np.exp(1j * theta)
    return m + d, m - d


def rot_theta(p: PointPair, theta: float) -> PointPair:
    """Rotate a pair by angle theta about the diagonal z == w.

    This is the time-theta flow of the quadratic Hamiltonian |z - w|^2 / 4;
    it fixes the midpoint and rotates the difference coordinate.
    """
    z, w = rotate_pairs(p.z, p.w, theta)
    return PointPair(complex(z), complex(w))


def diff_projection(p: PointPair) -> complex:
    """Difference coordinate z - w; vanishes exactly on the diagonal."""
    return p.z - p.w


def winding_number(loop: SampledLoop, center: complex = 0j) -> int:
    """Total winding of a sampled loop around a center point.

    Accumulates the wrapped argument increment edge by edge, which is exact
    (an integer) as long as no edge subtends an angle of pi or more at the
    center.  Raises CenterOnLoop if a sample sits within CENTER_TOL of the
    center.
    """
    rel = loop.points - center
    if np.min(np.abs(rel)) <= CENTER_TOL:
        raise CenterOnLoop(f"loop sample within {CENTER_TOL} of winding center")
    args = np.angle(np.roll(rel, -1) / rel)
    total = float(np.sum(args))
    return int(round(total / (2.0 * np.pi)))


def winding_number_points(points: np.ndarray, center: complex = 0j) -> int:
    """winding_number on a bare closed point array (first-to-last edge implied)."""
    return winding_number(SampledLoop(points), center)


def signed_area(loop: SampledLoop) -> float:
    """Shoelace signed area of the closed polyline; counterclockwise positive."""
    return signed_area_points(loop.points)


def signed_area_points(points: np.ndarray) -> float:
    x = points.real
    y = points.imag
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))
