"""Reachable-space polytopes for serial manipulators over short time horizons"""

__version__ = "0.1.0"
