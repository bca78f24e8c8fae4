"""Extremal problems for linear-fractional integral functionals depending on a parameter."""

__version__ = "0.1.0"
