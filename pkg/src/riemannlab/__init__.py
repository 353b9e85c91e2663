"""Numerical laboratory for Riemann-type non-differentiable functions."""

__version__ = "0.1.0"
