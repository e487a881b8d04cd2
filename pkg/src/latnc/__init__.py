"""Nested lattice network coding for the two-user broadcast channel with side information."""

__version__ = "0.1.0"
