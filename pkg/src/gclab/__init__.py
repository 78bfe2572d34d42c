"""Simulation lab for uniform empirical-measure convergence under dependence.

Builds stationary sequence models with known dependence structure, measures
empirical sup-deviations, and numerically checks the covariance, entropy and
mixing conditions that guarantee uniform almost-sure convergence.
"""

__version__ = "0.1.0"
