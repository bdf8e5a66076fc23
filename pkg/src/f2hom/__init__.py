"""Computational homological algebra over the two-element field."""

__version__ = "0.1.0"
