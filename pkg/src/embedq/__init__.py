"""Typical stationary state of a quantum system embedded in a large environment.

Builds bare spectra, samples random interactions, diagonalizes the dressed
Hamiltonian and compares the measured long-time occupations of the system with
the overlap-based partition function and its microcanonical, canonical and
Voigt limits.
"""

__version__ = "0.1.0"
