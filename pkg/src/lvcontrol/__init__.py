"""Boundary control laboratory for a weak-competition Lotka-Volterra system."""

__version__ = "0.1.0"
