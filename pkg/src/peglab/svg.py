"""Standalone SVG renderings of curves, inscriptions, and spectra.

Output is deterministic: fixed sample counts, fixed viewBox computation, and
fixed numeric formatting, so identical inputs give identical bytes.
"""

from __future__ import annotations

import numpy as np

from .action import _flow, _same_direction_paths, is_elegant
from .curve import JordanCurve
from .errors import PeglabError
from .inscribe import InscribedRectangle
from .spectral import SpectralFunction
from .sweep import SpectrumDiagram

CURVE_SAMPLES = 2048
VIEW = 720.0
PAD = 0.08


def _fmt(x: float) -> str:
    return f"{x:.4f}"


class _Mapper:
    def __init__(self, xs, ys):
        x0, x1 = float(np.min(xs)), float(np.max(xs))
        y0, y1 = float(np.min(ys)), float(np.max(ys))
        span = max(x1 - x0, y1 - y0, 1e-9)
        pad = PAD * span
        self.x0, self.y0, self.span = x0 - pad, y0 - pad, span + 2 * pad
        self.scale = VIEW / self.span

    def pt(self, z: complex) -> str:
        x = (z.real - self.x0) * self.scale
        y = VIEW - (z.imag - self.y0) * self.scale
        return f"{_fmt(x)},{_fmt(y)}"


def _document(body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {VIEW:.0f} {VIEW:.0f}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def curve_scene(curve: JordanCurve, rectangles=(), shade_elegant: bool = True) -> str:
    """Curve polyline, inscription markers, diagonal arcs, shaded regions."""
    s = np.linspace(0.0, 2.0 * np.pi, CURVE_SAMPLES, endpoint=False)
    pts = curve.at(s)
    rects = list(rectangles)
    all_x = pts.real
    all_y = pts.imag
    m = _Mapper(all_x, all_y)
    body = []
    for rect in rects:
        if shade_elegant and is_elegant(curve, rect):
            body.extend(_icecream_paths(curve, rect, m))
    poly = " ".join(m.pt(p) for p in pts)
    body.append(f'<polyline class="curve" fill="none" stroke="#222" '
                f'stroke-width="1.5" points="{poly} {m.pt(pts[0])}"/>')
    for rect in rects:
        body.extend(_rect_elements(curve, rect, m))
    return _document(body)


def _rect_elements(curve, rect, m):
    out = []
    v = rect.vertices
    for a, b in ((v[0], v[2]), (v[1], v[3])):   # the two diagonals
        out.append(f'<line class="diagonal" stroke="#888" stroke-width="1" '
                   f'x1="{m.pt(a).split(",")[0]}" y1="{m.pt(a).split(",")[1]}" '
                   f'x2="{m.pt(b).split(",")[0]}" y2="{m.pt(b).split(",")[1]}"/>')
    sides = " ".join(m.pt(p) for p in v)
    out.append(f'<polygon class="rect" fill="none" stroke="#0a5" '
               f'stroke-width="1" points="{sides}"/>')
    u = np.linspace(0.0, 1.0, 128)
    z_arc, w_arc = _flow(v[0], v[2], rect.theta * u)
    for arc in (z_arc, w_arc):
        d = "M " + " L ".join(m.pt(p) for p in arc)
        out.append(f'<path class="arc" fill="none" stroke="#d40" '
                   f'stroke-width="1.2" d="{d}"/>')
    for p in v:
        x, y = m.pt(p).split(",")
        out.append(f'<circle class="vertex" cx="{x}" cy="{y}" r="4" fill="#06c"/>')
    return out


def _icecream_paths(curve, rect, m):
    out = []
    s, t, s2, t2 = rect.params
    for p_from, p_to in ((s2, s), (t2, t)):
        span = (p_to - p_from) % (2.0 * np.pi)
        arc = curve.at(p_from + span * np.linspace(0.0, 1.0, 256))
        path = [m.pt(rect.center)] + [m.pt(p) for p in arc]
        d = "M " + " L ".join(path) + " Z"
        out.append(f'<path class="icecream" fill="#fc3" fill-opacity="0.45" '
                   f'stroke="none" d="{d}"/>')
    return out


def spectrum_scene(diagram: SpectrumDiagram, overlay: SpectralFunction | None = None
                   ) -> str:
    """Action against angle, one path per branch, events marked."""
    th_all, ac_all = [], []
    for br in diagram.branches:
        for smp in br.samples:
            if np.isfinite(smp.action):
                th_all.append(smp.theta)
                ac_all.append(smp.action)
    if not th_all:
        raise PeglabError("empty diagram cannot be drawn")
    m = _Mapper(np.array(th_all), np.array(ac_all))
    body = []
    for br in diagram.branches:
        pts = [m.pt(complex(smp.theta, smp.action)) for smp in br.samples
               if np.isfinite(smp.action)]
        if not pts:
            continue
        d = "M " + " L ".join(pts)
        body.append(f'<path class="branch" fill="none" stroke="#06c" '
                    f'stroke-width="1.2" d="{d}"/>')
        for ev in (br.birth, br.death):
            if ev.kind != "boundary":
                ref = br.samples[0] if ev is br.birth else br.samples[-1]
                x, y = m.pt(complex(ev.theta, ref.action)).split(",")
                body.append(f'<circle class="event event-{ev.kind}" cx="{x}" '
                            f'cy="{y}" r="5" fill="#d40"/>')
    if overlay is not None:
        pts = [m.pt(complex(th, v)) for th, v in zip(overlay.thetas, overlay.values)]
        body.append(f'<polyline class="spectral" fill="none" stroke="#000" '
                    f'stroke-width="2.5" points="{" ".join(pts)}"/>')
    return _document(body)


def emit_svg(obj, path, **kwargs) -> None:
    """Write the SVG scene for a curve or a spectrum diagram to a file."""
    if isinstance(obj, JordanCurve):
        text = curve_scene(obj, **kwargs)
    elif isinstance(obj, SpectrumDiagram):
        text = spectrum_scene(obj, **kwargs)
    elif isinstance(obj, tuple) and isinstance(obj[0], JordanCurve):
        text = curve_scene(obj[0], obj[1], **kwargs)
    else:
        raise TypeError(f"cannot render {type(obj).__name__} as SVG")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise PeglabError(f"cannot write SVG: {exc}") from exc
