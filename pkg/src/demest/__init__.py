"""Estimate detector error models of QEC memory experiments from syndrome statistics."""

__version__ = "0.1.0"
