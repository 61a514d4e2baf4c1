"""High-precision evaluation of zeta through Hasse-Sondow coefficients and their integral interpolant."""

__version__ = "0.1.0"
