"""Numerical toolkit for scalar and finite-matrix Herglotz functions."""

__version__ = "0.1.0"
