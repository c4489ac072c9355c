"""Thick-thin tiling, metric models and cone comparisons for moduli spaces of surfaces."""

__version__ = "0.1.0"
