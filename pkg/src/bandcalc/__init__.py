"""bandcalc: an executable band-surgery calculus for oriented link diagrams."""

__version__ = "0.1.0"
