"""Simulation and design tools for interaction-free measurement circuits."""

__version__ = "0.1.0"
