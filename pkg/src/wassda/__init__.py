"""Variational data assimilation with optimal-transport bias regularization."""

__version__ = "0.1.0"
