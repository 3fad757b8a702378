"""Discrete active inference agents seen from the first, second and third person."""

__version__ = "0.1.0"
