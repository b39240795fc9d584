"""Finite conformal deformations as Virasoro operators, and SLE martingales."""

__version__ = "0.1.0"
