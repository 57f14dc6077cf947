"""Numerical laboratory for interior regularity of rough-coefficient elliptic equations."""

__version__ = "0.1.0"
