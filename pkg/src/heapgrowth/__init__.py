"""Ballistic deposition, heaps of pieces and their matrix and integrable pictures."""

__version__ = "0.1.0"
