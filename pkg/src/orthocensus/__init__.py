"""Exact computations for orthogonal modular fourfolds of lattices 2U + <-2d> + <-6>."""

__version__ = "0.1.0"
