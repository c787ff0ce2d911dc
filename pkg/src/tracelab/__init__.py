"""Trace weights over prime fields."""

__version__ = "0.1.0"
