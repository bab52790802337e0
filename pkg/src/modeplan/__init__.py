"""Multi-robot multi-goal path planning in composite configuration space."""

__version__ = "0.1.0"
