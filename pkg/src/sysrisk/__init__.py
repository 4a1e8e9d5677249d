"""Random fixed points for a network of one big bank and many small banks."""

__version__ = "0.1.0"
