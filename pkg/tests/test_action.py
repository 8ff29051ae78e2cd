import numpy as np
import pytest

from peglab import curve as C
from peglab import inscribe as I
from peglab.action import (action_value, build_capping, build_trajectory,
                           capping_loop_points, ice_cream_area, is_elegant)
from peglab.errors import NotElegant
from peglab.geom import winding_number_points


def first_rect(curve, theta, grid_n=32):
    return I.find_rectangles(curve, theta, grid_n=grid_n)[0]


# -- trajectory ----------------------------------------------------------------


def test_trajectory_circle_arc(circle):
    r = first_rect(circle, np.pi / 2)
    traj = build_trajectory(r, 128)
    zs = np.array([p.z for p in traj])
    # first components stay on the unit circle and sweep a quarter turn
    assert np.max(np.abs(np.abs(zs) - 1.0)) < 1e-9
    sweep = np.angle(zs[-1] / zs[0])
    assert sweep == pytest.approx(np.pi / 2, abs=1e-9)


def test_trajectory_endpoints(ellipse):
    r = first_rect(ellipse, 1.1)
    traj = build_trajectory(r, 64)
    assert abs(traj[0].z - r.vertices[0]) < 1e-12
    assert abs(traj[0].w - r.vertices[2]) < 1e-12
    assert abs(traj[-1].z - r.vertices[1]) < 1e-12
    assert abs(traj[-1].w - r.vertices[3]) < 1e-12


def test_trajectory_small_theta_degenerates(ellipse):
    r = first_rect(ellipse, 0.01)
    traj = build_trajectory(r, 64)
    moves = [abs(p.z - traj[0].z) for p in traj]
    assert max(moves) < 0.1


def test_trajectory_sample_floor(ellipse):
    r = first_rect(ellipse, 1.0)
    with pytest.raises(ValueError):
        build_trajectory(r, 16)


# -- capping -------------------------------------------------------------------


def test_capping_circle_retraces(circle):
    r = first_rect(circle, np.pi / 2)
    cap = build_capping(circle, r)
    assert cap.winding_correction == 0
    l1, l2 = capping_loop_points(circle, cap)
    assert winding_number_points(l1 - l2) == 0


def test_capping_winding_zero_everywhere(ellipse, square64):
    for curve, theta in ((ellipse, 0.6), (ellipse, 2.6), (square64, np.pi / 2),
                         (square64, np.pi / 4)):
        for r in I.find_rectangles(curve, theta, grid_n=32):
            cap = build_capping(curve, r)
            l1, l2 = capping_loop_points(curve, cap)
            d = l1 - l2
            assert winding_number_points(d) == 0
            assert float(np.min(np.abs(d))) > 1e-6


def test_capping_reversed_direction_corrected(circle, ellipse):
    for curve, theta in ((circle, np.pi / 2), (ellipse, 1.3)):
        r = first_rect(curve, theta)
        s, _, s2, _ = r.params
        natural = 1 if (s2 - s) % (2 * np.pi) <= np.pi else -1
        cap = build_capping(curve, r, direction=-natural)
        assert abs(cap.winding_correction) == 1
        l1, l2 = capping_loop_points(curve, cap)
        assert winding_number_points(l1 - l2) == 0


def test_capping_near_pi_needs_core_loop(ellipse):
    # close to a flat angle the same-direction path wraps the diagonal once
    r = first_rect(ellipse, 3.0)
    cap = build_capping(ellipse, r)
    l1, l2 = capping_loop_points(ellipse, cap)
    assert winding_number_points(l1 - l2) == 0
    av = action_value(ellipse, r)
    assert av.value == pytest.approx(av.term_hamiltonian - av.term_area, abs=0.0)


# -- action --------------------------------------------------------------------


def test_action_circle_equals_theta(circle):
    for theta in (0.3, 0.9, np.pi / 2, 2.4):
        for r in I.find_rectangles(circle, theta, grid_n=32):
            av = action_value(circle, r)
            assert av.value == pytest.approx(theta, abs=1e-6)
            assert av.term_hamiltonian == pytest.approx(theta, abs=1e-6)
            assert abs(av.term_area) < 1e-8


def test_action_circle_approaches_area_at_flat_angle(circle):
    theta = np.pi - 1e-3
    r = first_rect(circle, theta)
    av = action_value(circle, r)
    assert av.value == pytest.approx(theta, abs=1e-6)
    assert abs(av.value - np.pi) < 2e-3     # endpoint convention ell(pi) = Area


def test_action_scaling_covariance(ellipse):
    lam = 2.0
    base = first_rect(ellipse, np.pi / 2, grid_n=48)
    scaled_curve = C.transform(ellipse, scale=lam)
    scaled = first_rect(scaled_curve, np.pi / 2, grid_n=48)
    a0 = action_value(ellipse, base).value
    a1 = action_value(scaled_curve, scaled).value
    assert a1 == pytest.approx(lam ** 2 * a0, rel=1e-9)


def test_action_rigid_motion_invariance(ellipse):
    moved = C.transform(ellipse, rotation=0.7, translation=1.2 - 0.4j)
    a0 = action_value(ellipse, first_rect(ellipse, np.pi / 2, 48)).value
    a1 = action_value(moved, first_rect(moved, np.pi / 2, 48)).value
    assert a1 == pytest.approx(a0, abs=1e-8)


def test_action_reparametrization_invariance(ellipse):
    shifted = C.param_shift(ellipse, 1.234)
    a0 = action_value(ellipse, first_rect(ellipse, np.pi / 2, 48)).value
    a1 = action_value(shifted, first_rect(shifted, np.pi / 2, 48)).value
    assert a1 == pytest.approx(a0, abs=1e-9)


def test_action_profile_independence(ellipse):
    r = first_rect(ellipse, 1.3, 48)
    a0 = action_value(ellipse, r).value
    smooth = lambda u: u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    a1 = action_value(ellipse, r, profile=smooth).value
    assert a1 == pytest.approx(a0, abs=1e-9)


def test_action_range_sanity(ellipse, square64):
    for curve, theta in ((ellipse, 0.5), (ellipse, 2.0), (square64, np.pi / 2),
                         (square64, 2.5)):
        area = C.enclosed_area(curve)
        for r in I.find_rectangles(curve, theta, grid_n=32):
            v = action_value(curve, r).value
            assert 0.0 < v < 2.0 * area


def test_action_capping_independence(ellipse):
    # any same-direction path choice gives the same action once corrected
    r = first_rect(ellipse, 1.3, 48)
    a_short = action_value(ellipse, r).value
    s, _, s2, _ = r.params
    natural = 1 if (s2 - s) % (2 * np.pi) <= np.pi else -1
    a_long = action_value(ellipse, r, direction=-natural).value
    assert a_long == pytest.approx(a_short, abs=1e-7)


# -- ice cream and elegance ------------------------------------------------------


def test_ice_cream_circle(circle):
    for theta in (0.8, np.pi / 2, 2.1):
        r = first_rect(circle, theta)
        assert ice_cream_area(circle, r) == pytest.approx(theta, abs=1e-7)


def test_ice_cream_matches_action_ellipse(ellipse):
    r = first_rect(ellipse, np.pi / 2, 48)
    av = action_value(ellipse, r).value
    assert ice_cream_area(ellipse, r) == pytest.approx(av, abs=1e-6)


def test_ice_cream_matches_action_square(square64):
    hits = 0
    for theta in (np.pi / 4, np.pi / 2):
        for r in I.find_rectangles(square64, theta, grid_n=48):
            if is_elegant(square64, r):
                hits += 1
                av = action_value(square64, r).value
                assert ice_cream_area(square64, r) == pytest.approx(av, abs=1e-6)
    assert hits >= 3


def test_elegance_convex(circle, ellipse):
    for theta in (0.8, np.pi / 2, 2.4):
        assert is_elegant(circle, first_rect(circle, theta))
    assert is_elegant(ellipse, first_rect(ellipse, np.pi / 2, 48))


def test_elegance_rejects_threaded_inscription():
    # four outward petals leave inward reaches that cross the rectangle sides
    flower = C.JordanCurve({1: 1.0, 4: 0.18}, "flower")
    rects = I.find_rectangles(flower, np.pi / 2, grid_n=40)
    assert rects
    flags = [is_elegant(flower, r) for r in rects]
    assert not any(flags)
    with pytest.raises(NotElegant):
        ice_cream_area(flower, rects[0])


def test_elegance_mixed_on_rippled_square(square64):
    flags = [is_elegant(square64, r)
             for r in I.find_rectangles(square64, np.pi / 4, grid_n=48)]
    assert any(flags) and not all(flags)
