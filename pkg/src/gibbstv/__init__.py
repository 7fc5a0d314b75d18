"""Distance bounds between Gibbs point processes, with simulation-based checks."""

__version__ = "0.1.0"
