"""Nonnegative cosine polynomials and explicit zero-free regions for zeta."""

__version__ = "0.1.0"
