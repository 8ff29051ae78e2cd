"""peglab: inscribed rectangles, actions, and spectral functions of Jordan curves."""

__version__ = "0.1.0"
