"""Stochastic and exact eigensolvers for the 1D optical polaron in the
phonon-only (Lee-Low-Pines) frame, with strong/weak coupling analytics."""

__version__ = "0.1.0"
