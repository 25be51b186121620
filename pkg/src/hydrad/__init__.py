"""Simulation-backed automated irrigation controller with an HTTP control plane."""

__version__ = "0.1.0"
