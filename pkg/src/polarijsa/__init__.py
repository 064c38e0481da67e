"""Biphoton joint spectral amplitudes scattered by a Tavis-Cummings polariton cavity."""

__version__ = "0.1.0"
