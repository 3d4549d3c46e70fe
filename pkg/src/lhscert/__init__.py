"""Finite-data certificates of local hidden state models for qutrit-qubit states."""

__version__ = "0.1.0"
