"""Relative monodromy of sections of families of elliptic curves.

Transport periods and elliptic logarithms of a section around loops in a
punctured base, read off the integral affine monodromy, and measure the
lattice it spans.
"""
__version__ = "0.1.0"

__all__ = ["__version__"]
