"""Finite-dimensional dg algebras, corings, comodules and their Morita checks."""

from .linalg import QQ, GF, Matrix, ScalarField

__all__ = ["QQ", "GF", "Matrix", "ScalarField"]
__version__ = "0.1.0"
