"""Random-matrix statistics of the classical compact groups and the Riemann zeta function."""

__version__ = "0.1.0"
