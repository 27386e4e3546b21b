"""Deterministic agent-based simulations of emergent spatial order."""

__version__ = "0.1.0"
