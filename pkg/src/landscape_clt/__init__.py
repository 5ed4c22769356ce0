"""Empirical central limit theorems for the level distribution of random landscapes."""

__version__ = "0.1.0"
