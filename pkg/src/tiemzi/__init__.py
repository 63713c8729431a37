"""Mach-Zehnder interferometry with translational-internal entangled (TIE) atoms."""

__version__ = "0.1.0"
