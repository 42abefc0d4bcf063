"""One-dimensional rough integration toolkit."""

__version__ = "0.1.0"
