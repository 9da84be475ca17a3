"""Density-matrix exponentiation with emulated measurement: simulation, compilation and analysis."""

__version__ = "0.1.0"
