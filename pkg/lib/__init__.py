"""Conformal-scale analysis of compactified spacetimes: mass function, horizons and the mass bound."""

__version__ = "1.0.0"
