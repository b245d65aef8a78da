"""Numerical verification toolkit for strongly quasiconvex functions."""

__version__ = "0.1.0"
