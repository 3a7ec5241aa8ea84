"""Finite-dimensional operator-system calculus over an LMI/LP feasibility engine."""

__version__ = "0.1.0"
