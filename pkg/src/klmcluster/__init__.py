"""Optical cluster-state quantum computing: simulation, compilation and resource models."""

__version__ = "0.1.0"
