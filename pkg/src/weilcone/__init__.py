"""Exact pullbacks of Weil divisors and singularity checks on cones over
polarized varieties."""

__version__ = "0.1.0"
