"""Grover-mixer QAOA expectation values from spectrum characteristic functions."""

__version__ = "0.1.0"
