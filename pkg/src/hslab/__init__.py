"""Numerical laboratory for the Dirichlet and Neumann Laplacian on the half-space
in power-weighted Sobolev spaces."""
__version__ = "0.1.0"
