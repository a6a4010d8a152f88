"""Exact and certified computations around the lonely runner problem."""

__version__ = "0.1.0"
