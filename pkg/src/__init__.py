"""Simulation toolkit for non-binary LDPC coded modulation over fading channels."""

__version__ = "0.1.0"
