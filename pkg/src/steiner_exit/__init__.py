"""Steiner symmetrization of polygons and Monte Carlo exit-time checks."""

__version__ = "0.1.0"
