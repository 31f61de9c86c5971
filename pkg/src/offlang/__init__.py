"""Offensive / hate-speech classification toolkit for HASOC-style data."""

__version__ = "0.1.0"
