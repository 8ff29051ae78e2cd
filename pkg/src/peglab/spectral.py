"""Selecting and validating a candidate spectral function from a spectrum.

The selector walks the diagram's grid columns with a dynamic program whose
penalty charges monotonicity violations, slope in excess of the squared
curve radius, and endpoint mismatches against 0 and the enclosed area.  Among
minimal-penalty selections the pointwise-smallest is preferred.  The result
is a numerically selected candidate constrained by the invariant's known
properties, not a certified value of the invariant itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntervalEmpty, NoAdmissiblePath
from .sweep import SpectrumDiagram

# penalty weights of the selection program; the endpoint bias only anchors the
# ends and must stay far below the property weights, or it could buy a
# slope-violating branch jump near the range ends
MONOTONICITY_WEIGHT = 1.0
LIPSCHITZ_WEIGHT = 1.0
ENDPOINT_BIAS_WEIGHT = 0.01
MONOTONICITY_TOL_FACTOR = 1e-4      # of the enclosed area
LIPSCHITZ_SLACK = 1e-2              # relative slack on the slope bound


@dataclass(frozen=True)
class ValidationReport:
    max_adjacent_decrease: float
    max_slope: float
    slope_bound: float
    min_value: float
    max_value: float
    area: float
    monotone_pass: bool
    lipschitz_pass: bool
    bounds_pass: bool

    def all_pass(self) -> bool:
        return self.monotone_pass and self.lipschitz_pass and self.bounds_pass


@dataclass
class SpectralFunction:
    thetas: np.ndarray
    values: np.ndarray
    branch_ids: np.ndarray
    area: float
    rad: float
    endpoints: tuple = ((0.0, 0.0), (np.pi, None))
    validation: ValidationReport | None = None

    def __post_init__(self):
        if self.endpoints[1][1] is None:
            self.endpoints = ((0.0, 0.0), (float(np.pi), float(self.area)))

    def extended(self):
        """Samples with the conventional endpoint values prepended/appended."""
        th = np.concatenate([[0.0], self.thetas, [np.pi]])
        vals = np.concatenate([[0.0], self.values, [self.area]])
        return th, vals

    def interp(self, theta: float) -> float:
        th, vals = self.extended()
        return float(np.interp(theta, th, vals))


def select_spectral_function(diagram: SpectrumDiagram) -> SpectralFunction:
    """Minimal-penalty monotone selection through the diagram's branch actions.

    Every value of the result is the action of some branch at that grid angle
    (spectrality holds by construction).  Raises NoAdmissiblePath when even the
    best selection decreases by more than the monotonicity tolerance somewhere.
    """
    grid = diagram.theta_grid
    n = len(grid)
    area = diagram.curve_area
    rad2 = diagram.curve_rad ** 2
    columns: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    for br in diagram.branches:
        for s in br.samples:
            i = int(np.argmin(np.abs(grid - s.theta)))
            if abs(grid[i] - s.theta) < 1e-12 and np.isfinite(s.action):
                columns[i].append((s.action, br.id))
    if any(len(c) == 0 for c in columns):
        raise NoAdmissiblePath("spectrum has empty grid columns")

    mono_tol = MONOTONICITY_TOL_FACTOR * area
    slope_cap = rad2 * (1.0 + LIPSCHITZ_SLACK)

    # DP over columns; cost is lexicographic (penalty, sum of values) so that
    # zero-penalty ties resolve to the pointwise-smallest admissible selection.
    costs = [np.zeros(len(columns[0])), ]
    sums = [np.array([a for a, _ in columns[0]])]
    backs: list[np.ndarray] = []
    costs[0] = ENDPOINT_BIAS_WEIGHT * np.abs(sums[0] - 0.0)
    for i in range(1, n):
        dtheta = grid[i] - grid[i - 1]
        prev_a = np.array([a for a, _ in columns[i - 1]])
        cur_a = np.array([a for a, _ in columns[i]])
        decrease = np.maximum(0.0, prev_a[:, None] - cur_a[None, :])
        mono_pen = MONOTONICITY_WEIGHT * np.maximum(0.0, decrease - mono_tol)
        slope = np.abs(cur_a[None, :] - prev_a[:, None]) / dtheta
        lip_pen = LIPSCHITZ_WEIGHT * np.maximum(0.0, slope - slope_cap) * dtheta
        trans = costs[i - 1][:, None] + mono_pen + lip_pen
        tsum = sums[i - 1][:, None] + cur_a[None, :]
        # lexicographic argmin over the previous column
        best = np.argmin(trans + 1e-9 * tsum / max(area, 1.0), axis=0)
        backs.append(best)
        costs.append(trans[best, np.arange(len(cur_a))])
        sums.append(tsum[best, np.arange(len(cur_a))])
    final_a = np.array([a for a, _ in columns[-1]])
    total = costs[-1] + ENDPOINT_BIAS_WEIGHT * np.abs(final_a - area)
    j = int(np.argmin(total + 1e-9 * sums[-1] / max(area, 1.0)))

    picks = [0] * n
    picks[-1] = j
    for i in range(n - 1, 0, -1):
        picks[i - 1] = int(backs[i - 1][picks[i]])
    values = np.array([columns[i][picks[i]][0] for i in range(n)])
    branch_ids = np.array([columns[i][picks[i]][1] for i in range(n)], dtype=int)

    worst_drop = float(np.max(np.maximum(0.0, -np.diff(values)))) if n > 1 else 0.0
    if worst_drop > mono_tol:
        raise NoAdmissiblePath(
            f"best selection still decreases by {worst_drop:.3e} "
            f"(tolerance {mono_tol:.3e})")

    f = SpectralFunction(thetas=grid.copy(), values=values,
                         branch_ids=branch_ids, area=area, rad=diagram.curve_rad)
    f.validation = validate_properties(f, area, diagram.curve_rad)
    return f


def validate_properties(f: SpectralFunction, area: float, rad: float
                        ) -> ValidationReport:
    """Check the selected function against the invariant's known properties."""
    if f.thetas.size < 2:
        raise ValueError("need at least two samples to validate")
    diffs = np.diff(f.values)
    dthetas = np.diff(f.thetas)
    max_dec = float(np.max(np.maximum(0.0, -diffs)))
    max_slope = float(np.max(np.abs(diffs) / dthetas))
    bound = rad ** 2 * (1.0 + LIPSCHITZ_SLACK)
    return ValidationReport(
        max_adjacent_decrease=max_dec,
        max_slope=max_slope,
        slope_bound=bound,
        min_value=float(np.min(f.values)),
        max_value=float(np.max(f.values)),
        area=area,
        monotone_pass=max_dec <= MONOTONICITY_TOL_FACTOR * area,
        lipschitz_pass=max_slope <= bound,
        bounds_pass=(float(np.min(f.values)) >= -1e-12
                     and float(np.max(f.values)) <= area + 1e-12),
    )


@dataclass(frozen=True)
class InscriptionInterval:
    a: float
    b: float
    length: float
    guaranteed_length: float
    slack: float
    meets_guarantee: bool


def inscription_interval(f: SpectralFunction, epsilon: float) -> InscriptionInterval:
    """Angles where the selected function stays within epsilon of neither bound.

    Computed on the piecewise-linear extension through the conventional
    endpoint values; a is the first crossing of epsilon, b the last crossing
    of area - epsilon.  The reported length is compared against the
    quantitative guarantee (area - 2 epsilon) / rad^2 minus grid slack.
    """
    area = f.area
    if not 0.0 < epsilon < 0.5 * area:
        raise ValueError("epsilon must lie in (0, area/2)")
    th, vals = f.extended()
    a = _first_crossing(th, vals, epsilon)
    b = _last_crossing(th, vals, area - epsilon)
    if a is None or b is None or a >= b:
        raise IntervalEmpty("no angles clear both action bounds")
    gaps = np.diff(f.thetas)
    slack = 2.0 * float(np.max(gaps)) + 1e-9
    bound = (area - 2.0 * epsilon) / (f.rad ** 2)
    return InscriptionInterval(
        a=float(a), b=float(b), length=float(b - a),
        guaranteed_length=bound, slack=slack,
        meets_guarantee=(b - a) >= bound - slack,
    )


def _first_crossing(th, vals, level):
    idx = np.nonzero(vals >= level)[0]
    if idx.size == 0:
        return None
    i = int(idx[0])
    if i == 0:
        return th[0]
    t0, t1, v0, v1 = th[i - 1], th[i], vals[i - 1], vals[i]
    if v1 == v0:
        return t1
    return t0 + (level - v0) * (t1 - t0) / (v1 - v0)


def _last_crossing(th, vals, level):
    idx = np.nonzero(vals <= level)[0]
    if idx.size == 0:
        return None
    i = int(idx[-1])
    if i == len(th) - 1:
        return th[-1]
    t0, t1, v0, v1 = th[i], th[i + 1], vals[i], vals[i + 1]
    if v1 == v0:
        return t0
    return t0 + (level - v0) * (t1 - t0) / (v1 - v0)
