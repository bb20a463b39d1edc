"""Numerical laboratory for fractional Lieb-Thirring type inequalities."""

__version__ = "0.1.0"
