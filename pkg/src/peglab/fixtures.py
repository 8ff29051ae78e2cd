"""Built-in test curves with pinned coefficients.

The circle and ellipse are given by exact mode lists; the smoothed square is
stored as a pinned JSON mode list generated once from the unit-square polygon
(64 modes, smoothing 1e-3) so that downstream numbers stay stable.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .curve import JordanCurve, PolygonCurve, curve_from_json

FIXTURE_NAMES = ("circle", "ellipse21", "square64")


def circle() -> JordanCurve:
    """Unit circle."""
    return JordanCurve({1: 1.0}, "circle")


def ellipse21() -> JordanCurve:
    """Ellipse with semi-axes 2 and 1."""
    return JordanCurve({1: 1.5, -1: 0.5}, "ellipse21")


def square_polygon() -> PolygonCurve:
    """Square with corners (+-1, +-1), counterclockwise from the bottom-right."""
    return PolygonCurve(np.array([1 - 1j, 1 + 1j, -1 + 1j, -1 - 1j]), "square")


def square64() -> JordanCurve:
    """Pinned smoothed square: 64 modes, smoothing 1e-3, area exactly 4."""
    text = resources.files("peglab").joinpath("fixtures/square64.json").read_text()
    return curve_from_json(text)


def builtin_curve(name: str) -> JordanCurve:
    try:
        return {"circle": circle, "ellipse21": ellipse21, "square64": square64}[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; have {FIXTURE_NAMES}") from None
