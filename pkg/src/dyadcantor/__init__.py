"""Exact counting, measure and Fourier tools for dyadic approximation in the Cantor set."""

__version__ = "0.1.0"
