"""Berger-type deformed Sasaki geometry on tangent bundles, verified by oracles."""

__version__ = "0.1.0"
