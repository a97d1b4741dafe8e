"""Simulation of a low-frequency magnetic-induction link through a metal pipe wall."""

__version__ = "0.1.0"
