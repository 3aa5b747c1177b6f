"""Density-matrix simulation of blind measurement-based quantum computation."""

__version__ = "0.1.0"
