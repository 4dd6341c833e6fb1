"""Numerical laboratory for almost-Hermitian geometry.

Curvature of user-defined manifold charts is computed exactly at a point
through truncated Taylor-jet arithmetic, then fed to identity checkers and
a structure-classification matcher.
"""

__version__ = "0.1.0"
