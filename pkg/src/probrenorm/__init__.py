"""Probabilistic renormalization of divergent series."""

__version__ = "0.1.0"
