"""Numerical and exact verification tools for Eisenstein-Kronecker numbers,
Hecke L-values of CM elliptic curves and their p-adic interpolation."""

__version__ = "0.1.0"
