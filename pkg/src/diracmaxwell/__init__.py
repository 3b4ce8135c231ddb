"""Pseudospectral Dirac-Maxwell-Coulomb dynamics on a periodic box, the
Schrodinger-Poisson and Pauli limit solvers, and the verification harness
that confronts them with each other."""

__version__ = "0.1.0"

from .fourier import Lattice, make_lattice

__all__ = ["Lattice", "make_lattice", "__version__"]
