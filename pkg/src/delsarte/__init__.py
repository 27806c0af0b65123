"""Exact Picard-Fuchs systems for monomial deformations of Delsarte polynomials."""

__version__ = "0.1.0"
