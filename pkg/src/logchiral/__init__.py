"""Exact computations for logarithmic chiral de Rham complexes."""

__version__ = "0.1.0"
