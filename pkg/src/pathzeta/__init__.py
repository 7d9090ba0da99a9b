"""Topology of superlevel sets of sampled one-dimensional stochastic paths."""

__version__ = "0.1.0"
