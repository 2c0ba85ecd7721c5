"""Density coefficients for class-number sums of indefinite binary quadratic forms."""
__version__ = "0.1.0"
