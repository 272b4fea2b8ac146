"""Pseudo-spectral simulator and verification harness for du/dt = Au + |u|^alpha u on a half-space."""

__version__ = "0.1.0"
