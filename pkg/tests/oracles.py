"""Independent reference computations used to pin expected test values.

Everything here deliberately avoids the code paths under test: areas come
from dense shoelace sums, the pair rotation from an ODE integrator, radii
from brute-force grids, and rectangle/binormal sets from dense residual scans
polished by scipy's own root finder.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp


def shoelace_area_dense(curve, n=100_000) -> float:
    s = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    p = curve.at(s)
    x, y = p.real, p.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def dense_radius(curve, n=4096) -> float:
    s = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    p = curve.at(s)
    best = 0.0
    chunk = 256
    for i in range(0, n, chunk):
        d = np.abs(p[i:i + chunk, None] - p[None, :])
        best = max(best, float(np.max(d)))
    return 0.5 * best


def trapezoid_length(curve, n=1 << 20) -> float:
    s = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return float(np.mean(np.abs(curve.deriv(s)))) * 2.0 * np.pi


def min_far_pair_distance(curve, n=8192, min_sep_steps=32) -> float:
    """Smallest distance between samples whose parameters are far apart."""
    s = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    p = curve.at(s)
    best = np.inf
    chunk = 256
    idx = np.arange(n)
    for i in range(0, n, chunk):
        rows = idx[i:i + chunk]
        d = np.abs(p[rows, None] - p[None, :])
        sep = np.abs(rows[:, None] - idx[None, :])
        sep = np.minimum(sep, n - sep)
        d[sep < min_sep_steps] = np.inf
        best = min(best, float(np.min(d)))
    return best


def flow_pair_ode(z: complex, w: complex, theta: float):
    """Integrate the quadratic-Hamiltonian vector field for time theta.

    With the symplectic convention fixed by the package (difference coordinate
    rotating counterclockwise), the field is dz/dt = (i/2)(z-w),
    dw/dt = -(i/2)(z-w).
    """
    def rhs(_t, y):
        zz = y[0] + 1j * y[1]
        ww = y[2] + 1j * y[3]
        dz = 0.5j * (zz - ww)
        dw = -0.5j * (zz - ww)
        return [dz.real, dz.imag, dw.real, dw.imag]

    sol = solve_ivp(rhs, (0.0, theta), [z.real, z.imag, w.real, w.imag],
                    rtol=1e-12, atol=1e-12, dense_output=False)
    y = sol.y[:, -1]
    return complex(y[0], y[1]), complex(y[2], y[3])


def hausdorff(a, b) -> float:
    A = np.asarray(a, dtype=complex)
    B = np.asarray(b, dtype=complex)
    d = np.abs(A[:, None] - B[None, :])
    return max(float(np.max(np.min(d, axis=1))), float(np.max(np.min(d, axis=0))))


def binormal_grid_oracle(curve, grid=1024, keep_below=None):
    """Local minima of the orthogonality residual on a dense parameter grid.

    Returns the (s, t) grid cells where both tangent-chord inner products are
    locally smallest; used to count and locate binormals independently.
    """
    base = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    S, T = np.meshgrid(base, base, indexing="ij")
    s, t = S.ravel(), T.ravel()
    gs, gt = curve.at(s), curve.at(t)
    ds, dt = curve.deriv(s), curve.deriv(t)
    delta = gs - gt
    f = np.maximum(np.abs(np.real(ds * np.conj(delta))),
                   np.abs(np.real(dt * np.conj(delta)))).reshape(grid, grid)
    sep = np.abs(delta).reshape(grid, grid)
    mask = np.ones_like(f, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= f <= np.roll(np.roll(f, di, axis=0), dj, axis=1)
    mask &= sep > 0.2 * dense_radius(curve, 512)
    if keep_below is not None:
        mask &= f < keep_below
    cells = np.argwhere(mask)
    return [(base[i], base[j]) for i, j in cells]


def square_family_vertices(t: float):
    """The inscribed squares of the square with corners (+-1, +-1)."""
    return (complex(1, t), complex(-t, 1), complex(-1, -t), complex(t, -1))
