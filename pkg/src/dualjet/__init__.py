"""Symbolic geometry of h-normal N-linear connections on the dual 1-jet space."""

__version__ = "0.1.0"
