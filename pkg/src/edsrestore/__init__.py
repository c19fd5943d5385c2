"""Decentralized multi-agent restoration scheduling for blacked-out distribution grids."""

__version__ = "0.1.0"
