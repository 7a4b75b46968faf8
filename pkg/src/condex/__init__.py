"""Conditional extrema: curves that interpolate waypoints while following a prior field."""

__version__ = "1.0.0"
