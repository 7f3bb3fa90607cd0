"""Predicting reconfigurable platform configurations for data-flow graphs."""

__version__ = "0.1.0"
