"""Largest-eigenvalue toolkit for sparse random graphs G(n, p)."""

__version__ = "0.1.0"
