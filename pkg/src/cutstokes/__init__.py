"""Unfitted finite element solver for the two-phase Stokes interface problem."""

__version__ = "0.1.0"
