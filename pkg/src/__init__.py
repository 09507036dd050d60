"""PWHS Toolkit - numerical analysis of three-zone piecewise holomorphic systems."""

__version__ = "1.0.0"
