"""Numerical kernels: Bessel J1 and small Hermitian eigensolvers."""

from .bessel import bessel_j1
from .eigen import (
    EigenDecomposition,
    inverse_iteration_min,
    jacobi_eigh,
    jacobi_singular_values,
    pencil_threshold,
)

__all__ = [
    "bessel_j1",
    "EigenDecomposition",
    "inverse_iteration_min",
    "jacobi_eigh",
    "jacobi_singular_values",
    "pencil_threshold",
]
