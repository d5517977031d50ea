"""Composite face image attack planning and vulnerability benchmarking."""

__version__ = "0.1.0"
