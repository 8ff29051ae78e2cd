import json

import numpy as np
import pytest
from scipy.special import ellipe

from oracles import (dense_radius, hausdorff, min_far_pair_distance,
                     shoelace_area_dense, trapezoid_length)
from peglab import curve as C
from peglab.errors import NotSimpleAfterSmoothing, NotSimpleCurve

FAT_ELLIPSE = {1: 1.0, -1: 0.25}     # semi-axes 1.25 and 0.75


def test_eval_single_mode(circle):
    assert circle.at(0.0) == pytest.approx(1.0 + 0.0j, abs=1e-15)
    assert circle.at(np.pi / 2) == pytest.approx(1j, abs=1e-15)


def test_eval_coefficient_sum():
    fat = C.JordanCurve(FAT_ELLIPSE)
    assert fat.at(0.0) == pytest.approx(1.25 + 0.0j, abs=1e-15)


def test_eval_periodic(ellipse):
    s = np.linspace(0.0, 2.0 * np.pi, 13)
    assert np.allclose(ellipse.at(s), ellipse.at(s + 2.0 * np.pi), atol=1e-12)


def test_derivative_circle(circle):
    assert C.derivative(circle, 0.0) == pytest.approx(1j, abs=1e-15)
    assert C.derivative(circle, np.pi) == pytest.approx(-1j, abs=1e-12)


def test_derivative_termwise():
    fat = C.JordanCurve(FAT_ELLIPSE)
    assert C.derivative(fat, 0.0) == pytest.approx(0.75j, abs=1e-15)


def test_derivative_matches_finite_difference(ellipse, square64):
    h = 1e-6
    for curve in (ellipse, square64):
        for s in (0.3, 1.9, 4.4):
            fd = (curve.at(s + h) - curve.at(s - h)) / (2 * h)
            assert abs(curve.deriv(s) - fd) < 1e-6
            fd2 = (curve.deriv(s + h) - curve.deriv(s - h)) / (2 * h)
            assert abs(curve.deriv2(s) - fd2) < 1e-5


def test_enclosed_area_circle(circle):
    assert C.enclosed_area(circle) == pytest.approx(np.pi, abs=1e-15)


def test_enclosed_area_fat_ellipse_vs_shoelace_oracle():
    fat = C.JordanCurve(FAT_ELLIPSE)
    exact = 15.0 * np.pi / 16.0
    assert C.enclosed_area(fat) == pytest.approx(exact, abs=1e-12)
    assert shoelace_area_dense(fat) == pytest.approx(exact, abs=1e-7)


def test_enclosed_area_scaling(ellipse):
    for lam in (0.5, 2.0, 3.0):
        scaled = C.transform(ellipse, scale=lam)
        assert C.enclosed_area(scaled) == pytest.approx(
            lam ** 2 * C.enclosed_area(ellipse), rel=1e-13)


def test_curve_radius_circle(circle):
    assert C.curve_radius(circle) == pytest.approx(1.0, abs=1e-9)


def test_curve_radius_fat_ellipse_vs_grid_oracle():
    fat = C.JordanCurve(FAT_ELLIPSE)
    assert C.curve_radius(fat) == pytest.approx(1.25, abs=1e-9)
    assert dense_radius(fat) == pytest.approx(1.25, abs=1e-5)


def test_curve_radius_ellipse21(ellipse):
    assert C.curve_radius(ellipse) == pytest.approx(2.0, abs=1e-9)
    assert dense_radius(ellipse) == pytest.approx(2.0, abs=1e-5)


def test_curve_length_circle(circle):
    assert C.curve_length(circle) == pytest.approx(2.0 * np.pi, rel=1e-10)


def test_curve_length_scaled_circle():
    big = C.JordanCurve({1: 2.0})
    assert C.curve_length(big) == pytest.approx(4.0 * np.pi, rel=1e-10)


def test_curve_length_ellipse_elliptic_integral(ellipse):
    exact = 8.0 * float(ellipe(0.75))     # 9.6884482205...
    got = C.curve_length(ellipse)
    assert got == pytest.approx(exact, rel=1e-10)
    assert got == pytest.approx(trapezoid_length(ellipse), rel=1e-12)


def test_is_simple_accepts(circle, ellipse, square64):
    for curve in (circle, ellipse, square64):
        assert C.is_simple(curve)


def test_is_simple_rejects_inner_loop():
    with pytest.raises(NotSimpleCurve):
        C.JordanCurve({1: 1.0, 2: 0.9})
    probe = C.JordanCurve({1: 1.0, 2: 0.9}, validate=False)
    assert not C.is_simple(probe)
    # oracle: far-apart parameters land on (nearly) the same point
    assert min_far_pair_distance(probe) < 1e-2


def test_is_simple_oracle_agrees_on_simple_curves(ellipse):
    assert min_far_pair_distance(ellipse) > 0.1


def test_orientation_canonicalized():
    cw = C.JordanCurve({-1: 1.0})       # clockwise circle gets reversed
    assert C.enclosed_area(cw) == pytest.approx(np.pi, abs=1e-13)


def test_constructor_invariants(circle, ellipse, square64):
    grid = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    for curve in (circle, ellipse, square64):
        assert C.enclosed_area(curve) > 0
        assert np.isfinite(C.curve_length(curve))
        assert float(np.min(np.abs(curve.deriv(grid)))) > 0


def test_isoperimetric_inequality(circle, ellipse, square64):
    for curve in (circle, ellipse, square64):
        L = C.curve_length(curve)
        A = C.enclosed_area(curve)
        assert L ** 2 >= 4.0 * np.pi * A - 1e-9
    Lc = C.curve_length(circle)
    assert Lc ** 2 == pytest.approx(4.0 * np.pi * C.enclosed_area(circle), abs=1e-6)


def test_measurement_scaling(ellipse):
    for lam in (0.5, 2.0, 3.0):
        scaled = C.transform(ellipse, scale=lam)
        assert C.curve_length(scaled) == pytest.approx(
            lam * C.curve_length(ellipse), rel=1e-9)
        assert C.curve_radius(scaled) == pytest.approx(
            lam * C.curve_radius(ellipse), rel=1e-9)


# -- smoothing ----------------------------------------------------------------


def test_smooth_square_area_exact(square_polygon):
    curve = C.smooth_approximate(square_polygon, 64, 1e-3)
    assert abs(C.enclosed_area(curve) - 4.0) <= 1e-12 * 4.0
    assert C.curve_length(curve) <= 1.1 * square_polygon.perimeter()


def test_smooth_hexagon_hausdorff():
    hexagon = C.PolygonCurve(np.exp(1j * np.linspace(0, 2 * np.pi, 7)[:-1]), "hex")
    curve = C.smooth_approximate(hexagon, 64, 1e-3)
    s = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    assert hausdorff(curve.at(s), hexagon.at(s)) <= 0.05
    assert abs(C.enclosed_area(curve) - hexagon.area()) <= 1e-12 * hexagon.area()


def test_smooth_heavy_damping_stays_simple(square_polygon):
    curve = C.smooth_approximate(square_polygon, 16, 0.5)
    assert C.is_simple(curve)
    assert C.enclosed_area(curve) == pytest.approx(4.0, rel=1e-12)


def test_smooth_rejects_impossible_smoothing():
    # a needle-thin zigzag cannot survive truncation to very few damped modes
    spikes = []
    for k in range(12):
        ang = 2 * np.pi * k / 12
        r = 1.0 if k % 2 == 0 else 0.02
        spikes.append(r * np.exp(1j * ang))
    needle = C.PolygonCurve(np.array(spikes), "needle")
    with pytest.raises(NotSimpleAfterSmoothing):
        C.smooth_approximate(needle, 8, 1e-6)


def test_smooth_mode_count_floor(square_polygon):
    with pytest.raises(ValueError):
        C.smooth_approximate(square_polygon, 4, 1e-3)


# -- persistence ---------------------------------------------------------------


def test_curve_json_roundtrip(tmp_path, ellipse):
    path = tmp_path / "ellipse.json"
    C.save_curve(ellipse, path)
    first = path.read_bytes()
    back = C.load_curve(path)
    C.save_curve(back, path)
    assert path.read_bytes() == first
    assert back.modes_dict() == ellipse.modes_dict()


def test_curve_json_schema(tmp_path, square64):
    path = tmp_path / "sq.json"
    C.save_curve(square64, path)
    payload = json.loads(path.read_text())
    assert set(payload) == {"name", "modes"}
    assert all(set(m) == {"k", "re", "im"} for m in payload["modes"])


def test_polygon_json_roundtrip(tmp_path, square_polygon):
    path = tmp_path / "poly.json"
    C.save_polygon(square_polygon, path)
    first = path.read_bytes()
    back = C.load_polygon(path)
    C.save_polygon(back, path)
    assert path.read_bytes() == first
    assert np.array_equal(back.vertices, square_polygon.vertices)


def test_polygon_rejects_self_intersection():
    with pytest.raises(ValueError):
        C.PolygonCurve(np.array([0j, 1 + 1j, 1 + 0j, 0 + 1j]))
