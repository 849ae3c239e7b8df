"""Anchored top-two best-arm identification toolkit"""

__version__ = "0.1.0"
