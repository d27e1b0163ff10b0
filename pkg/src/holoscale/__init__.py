"""Numerical laboratory for the scaling method on domains in C^2."""

__version__ = "0.1.0"
