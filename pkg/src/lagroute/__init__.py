"""Parallel grid router using Lagrangian relaxation of channel-width limits."""

__version__ = "0.1.0"
