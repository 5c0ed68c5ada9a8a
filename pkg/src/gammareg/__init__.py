"""Convex envelopes, conjugates and generalized minimizers of functions
sampled on grids over compact convex domains."""

__version__ = "0.1.0"
