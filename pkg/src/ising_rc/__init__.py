"""Ising model on hypercubic boxes: random-current identities and Monte Carlo."""

__version__ = "0.1.0"
