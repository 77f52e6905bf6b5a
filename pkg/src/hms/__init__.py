"""Exact invariants of Hilbert modular surfaces over real quadratic fields."""

__version__ = "0.1.0"
