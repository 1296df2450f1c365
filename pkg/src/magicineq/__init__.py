"""Certified verification of the modular-form inequalities behind the E8 magic function."""

__version__ = "0.1.0"
