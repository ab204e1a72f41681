"""Nested reset counter systems: machines, coverability, ordinals and gadgets."""

__version__ = "0.1.0"
