"""Prompt-ensemble medical entity recognition over clinical text."""

__version__ = "0.1.0"
