"""Numerical laboratory for Strichartz and local smoothing estimates over fractal time sets."""

__version__ = "0.1.0"
