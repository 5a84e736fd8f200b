"""Polaron-ansatz toolkit for emitters coupled to a one-dimensional line."""

__version__ = "0.1.0"
