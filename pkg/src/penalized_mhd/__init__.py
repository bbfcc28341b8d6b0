"""Penalized compressible MHD on a periodic box with immersed solids."""

__version__ = "0.1.0"
