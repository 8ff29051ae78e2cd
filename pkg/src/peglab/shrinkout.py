"""Rectangle persistence along polygon-approximation sequences.

Smoothing a polygon at geometrically decreasing strengths gives a sequence of
analytic curves of equal enclosed area and bounded length.  Rectangles whose
action stays away from 0 and from the enclosed area cannot shrink out along
such a sequence; the tracker records, per level, the largest such rectangle
and checks that the tracked vertices converge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import curve as curvemod
from .action import action_value
from .curve import JordanCurve, PolygonCurve, smooth_approximate
from .errors import DiagonalHit
from .inscribe import find_rectangles


@dataclass(frozen=True)
class LevelReport:
    level: int
    smoothing: float
    curve_length: float
    area: float
    n_rectangles: int
    n_filtered: int
    max_diameter: float | None      # None when nothing survives the filter
    action: float | None
    vertices: tuple | None
    hausdorff_to_prev: float | None


@dataclass
class ApproximationRun:
    target: PolygonCurve
    theta: float
    epsilon: float
    approximants: list
    per_level: list

    def diameters(self):
        return [lv.max_diameter for lv in self.per_level]

    def vertex_gaps(self):
        return [lv.hausdorff_to_prev for lv in self.per_level[1:]]


def vertex_hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    A = np.asarray(a, dtype=complex)
    B = np.asarray(b, dtype=complex)
    d = np.abs(A[:, None] - B[None, :])
    return max(float(np.max(np.min(d, axis=1))), float(np.max(np.min(d, axis=0))))


def approximate_and_track(polygon: PolygonCurve, theta: float, levels: int,
                          epsilon: float, mode_count: int = 64,
                          smoothing0: float = 4e-3, smoothing_factor: float = 4.0,
                          grid_n: int = 48) -> ApproximationRun:
    """Track action-filtered rectangles across a smoothing sequence.

    Every approximant keeps the polygon's area exactly; rectangles at the
    given aspect angle are filtered to actions inside (epsilon, area-epsilon),
    and the largest filtered rectangle's diameter and vertices are recorded
    per level, along with the vertex movement between consecutive levels.
    """
    if levels < 3:
        raise ValueError("levels must be at least 3")
    area = polygon.area()
    if not 0.0 < epsilon < 0.5 * area:
        raise ValueError("epsilon must lie in (0, area/2)")

    approximants = []
    reports = []
    prev_vertices = None
    for j in range(levels):
        smoothing = smoothing0 * smoothing_factor ** (-j)
        curve = smooth_approximate(polygon, mode_count, smoothing)
        approximants.append(curve)
        rects = find_rectangles(curve, theta, grid_n=grid_n)
        filtered = []
        for r in rects:
            try:
                act = action_value(curve, r)
            except DiagonalHit:
                continue
            if epsilon < act.value < area - epsilon:
                filtered.append((r, act.value))
        if filtered:
            best, act = max(filtered, key=lambda ra: 2.0 * ra[0].rad)
            gap = (vertex_hausdorff(best.vertices, prev_vertices)
                   if prev_vertices is not None else None)
            reports.append(LevelReport(
                level=j, smoothing=smoothing,
                curve_length=curvemod.curve_length(curve),
                area=curvemod.enclosed_area(curve),
                n_rectangles=len(rects), n_filtered=len(filtered),
                max_diameter=2.0 * best.rad, action=act,
                vertices=best.vertices, hausdorff_to_prev=gap,
            ))
            prev_vertices = best.vertices
        else:
            reports.append(LevelReport(
                level=j, smoothing=smoothing,
                curve_length=curvemod.curve_length(curve),
                area=curvemod.enclosed_area(curve),
                n_rectangles=len(rects), n_filtered=0,
                max_diameter=None, action=None, vertices=None,
                hausdorff_to_prev=None,
            ))
            prev_vertices = None
    return ApproximationRun(target=polygon, theta=theta, epsilon=epsilon,
                            approximants=approximants, per_level=reports)


def disk_area_bound(length_bound: float, disk_radius: float) -> float:
    """Largest area a closed curve of the given length encloses inside a disk.

    The bound is (length / circumference) * disk area = length * radius / 2;
    it vanishes linearly with the disk radius, which is what forces the area
    term of a shrinking candidate's action to zero.
    """
    if length_bound <= 0.0 or disk_radius <= 0.0:
        raise ValueError("length and radius must be positive")
    return 0.5 * length_bound * disk_radius
