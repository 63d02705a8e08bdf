"""Flat surfaces, their universal covers, and statistics of typical geodesics."""

__version__ = "0.1.0"
