"""Binomial-heap self-recognition tables for autonomic grid networks."""

__version__ = "0.1.0"
