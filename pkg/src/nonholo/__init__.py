"""Nonholonomic integrator toolkit.

Simulation, controllability analysis, steering synthesis, and
minimum-energy extremals for integrator systems whose fiber coordinates
accumulate line integrals of a field along the base path.
"""

__version__ = "0.1.0"
