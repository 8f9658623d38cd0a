"""Finite-scale diagnostics for asymptotically tree-graded and relatively
hyperbolic groups."""

__version__ = "0.1.0"
