"""Numerical laboratory for periodic generalized KdV: Bourgain-space norms,
pseudospectral integration, Picard iterates, divisor counting and the
I-method almost-conservation experiment."""

__version__ = "0.1.0"
