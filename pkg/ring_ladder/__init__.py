"""Josephson dynamics of Bose condensates in two coupled ring lattices."""

__version__ = "0.1.0"
