import numpy as np
import pytest

from oracles import binormal_grid_oracle
from peglab import curve as C
from peglab import inscribe as I
from peglab.verify import grid_oracle_rectangles

C_EXACT = 2.0 / np.sqrt(5.0)        # ellipse-square vertex coordinate
RAD_EXACT = 2.0 * np.sqrt(2.0) / np.sqrt(5.0)


def test_residual_zero_at_circle_solution(circle):
    # the antipodal pair at angle -theta rotates onto the pair at angle 0
    r = I.rectangle_residual(circle, np.pi / 2, (0.0, np.pi, 1.5 * np.pi, 0.5 * np.pi))
    assert np.max(np.abs(r)) < 1e-14


def test_residual_nonzero_off_solution(circle):
    r = I.rectangle_residual(circle, np.pi / 2, (0.0, 2.0, 4.0, 5.5))
    assert np.max(np.abs(r)) > 0.1


def test_residual_periodicity(ellipse):
    p = np.array([0.3, 2.5, 4.0, 5.7])
    base = I.rectangle_residual(ellipse, 1.1, p)
    for k in range(4):
        shifted = p.copy()
        shifted[k] += 2.0 * np.pi
        assert np.allclose(I.rectangle_residual(ellipse, 1.1, shifted), base,
                           atol=1e-12)


def test_ellipse_square_exact(ellipse):
    rects = I.find_rectangles(ellipse, np.pi / 2, grid_n=48)
    assert len(rects) == 1
    r = rects[0]
    assert r.rad == pytest.approx(RAD_EXACT, abs=1e-10)
    expect = {C_EXACT * (1 + 1j), C_EXACT * (-1 + 1j),
              C_EXACT * (-1 - 1j), C_EXACT * (1 - 1j)}
    for v in r.vertices:
        assert min(abs(v - e) for e in expect) < 1e-8
    assert abs(r.center) < 1e-10
    assert r.residual <= 1e-10


def test_ellipse_square_generator_pair(ellipse):
    gens = I.find_rectangles(ellipse, np.pi / 2, grid_n=48, geometric=False)
    assert len(gens) == 2      # the two diagonals give distinct ordered solutions


def test_circle_family_representatives(circle):
    for theta in (0.7, np.pi / 2):
        rects = I.find_rectangles(circle, theta, grid_n=32)
        assert len(rects) >= 8
        for r in rects:
            assert r.rad == pytest.approx(1.0, abs=1e-8)
            assert abs(r.center) < 1e-8


def test_rectangle_type_invariants(ellipse, square64):
    from peglab.geom import PointPair, rot_theta
    for curve, theta in ((ellipse, 1.0), (ellipse, 2.2), (square64, np.pi / 2)):
        width_floor = 1e-4 * C.curve_radius(curve)
        for r in I.find_rectangles(curve, theta, grid_n=32):
            z, w = r.vertices[1], r.vertices[3]
            zp, wp = r.vertices[0], r.vertices[2]
            rotated = rot_theta(PointPair(zp, wp), theta)
            assert abs(rotated.z - z) < 1e-9 and abs(rotated.w - w) < 1e-9
            assert abs(abs(z - w) - abs(zp - wp)) < 1e-9
            assert abs((z + w) / 2 - (zp + wp) / 2) < 1e-9
            assert abs(z - w) > width_floor
            assert r.residual <= 1e-10


def test_found_set_matches_grid_oracle(ellipse):
    for theta in (np.pi / 4, np.pi / 2):
        solver = I.find_rectangles(ellipse, theta, grid_n=48, geometric=False)
        oracle = grid_oracle_rectangles(ellipse, theta, grid=256)
        assert len(solver) == len(oracle)
        for o in oracle:
            assert any(I.torus_dist(o, r.params) < 1e-6 for r in solver)


def test_equivariance_under_rigid_motion(ellipse):
    g = lambda z: z * np.exp(1j * 0.9) + (0.4 - 1.1j)
    moved = C.transform(ellipse, rotation=0.9, translation=0.4 - 1.1j)
    base = I.find_rectangles(ellipse, 1.2, grid_n=40)
    other = I.find_rectangles(moved, 1.2, grid_n=40)
    assert len(base) == len(other)
    for r in base:
        image = [g(v) for v in r.vertices]
        best = min(max(min(abs(v - e) for e in image) for v in o.vertices)
                   for o in other)
        assert best < 1e-8


# -- binormals -----------------------------------------------------------------


def test_ellipse_binormals(ellipse):
    bins = I.find_binormals(ellipse, grid_n=48)
    assert len(bins) == 4
    chords = sorted(round(b.chord_length, 9) for b in bins)
    assert chords == [2.0, 2.0, 4.0, 4.0]
    assert sorted(b.morse_index for b in bins) == [1, 1, 2, 2]
    assert not any(b.degenerate for b in bins)
    # ordered pairs come in swapped twins
    keys = {tuple(np.round(b.params, 6)) for b in bins}
    for s, t in list(keys):
        assert (t, s) in keys


def test_ellipse_binormal_orthogonality_residual(ellipse):
    for b in I.find_binormals(ellipse, grid_n=32):
        f1, f2 = I.binormal_residual(ellipse, b.params[0], b.params[1])
        assert abs(f1) < 1e-10 and abs(f2) < 1e-10


def test_ellipse_binormals_vs_grid_oracle(ellipse):
    cells = binormal_grid_oracle(ellipse, grid=1024)
    # oracle cells cluster around the two axes (four ordered pairs)
    bins = I.find_binormals(ellipse, grid_n=32)
    for b in bins:
        near = min(max(abs((b.params[0] - s + np.pi) % (2 * np.pi) - np.pi),
                       abs((b.params[1] - t + np.pi) % (2 * np.pi) - np.pi))
                   for s, t in cells)
        assert near < 0.02
    for s, t in cells:
        near = min(max(abs((b.params[0] - s + np.pi) % (2 * np.pi) - np.pi),
                       abs((b.params[1] - t + np.pi) % (2 * np.pi) - np.pi))
                   for b in bins)
        assert near < 0.02


def test_morse_rank_bookkeeping(ellipse):
    bins = I.find_binormals(ellipse, grid_n=32)
    geometric = {}
    for b in bins:
        key = tuple(sorted(np.round(b.params, 6)))
        geometric[key] = b.morse_index
    assert sorted(geometric.values()) == [1, 2]


def test_circle_binormals_degenerate(circle):
    bins = I.find_binormals(circle, grid_n=32)
    assert len(bins) >= 8
    assert all(b.degenerate for b in bins)
    for b in bins:
        assert b.chord_length == pytest.approx(2.0, abs=1e-8)


# -- width ---------------------------------------------------------------------


def test_width_circle(circle):
    assert I.estimate_width(circle, 16) == pytest.approx(2.0, abs=1e-6)


def test_width_ellipse(ellipse):
    w = I.estimate_width(ellipse, 16)
    assert w <= 2.0 + 1e-3
    assert w >= 1.9


def test_width_scaling(circle):
    lam = 2.0
    scaled = C.transform(circle, scale=lam)
    w1 = I.estimate_width(circle, 16)
    w2 = I.estimate_width(scaled, 16)
    assert w2 == pytest.approx(lam * w1, rel=1e-6)


def test_width_consistency_with_rectangles(ellipse):
    w = I.estimate_width(ellipse, 16)
    for theta in (0.8, 1.6, 2.4):
        for r in I.find_rectangles(ellipse, theta, grid_n=32):
            assert 2.0 * r.rad >= w - 1e-6


def test_preconditions(circle):
    with pytest.raises(ValueError):
        I.find_rectangles(circle, 0.0)
    with pytest.raises(ValueError):
        I.find_rectangles(circle, 1.0, grid_n=8)
    with pytest.raises(ValueError):
        I.find_binormals(circle, grid_n=8)
    with pytest.raises(ValueError):
        I.estimate_width(circle, 4)
