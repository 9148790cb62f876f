"""Coupled generalized Sylvester / star-Sylvester equation systems.

Spectral nonsingularity certificates (formal matrix products and
block-cyclic pencils), an O(n^3 r) triangular solver built on the
periodic Schur decomposition, and a dense Kronecker-product oracle for
self-verification.
"""

from .kernel import make_givens, householder_qr, two_norm_estimate
from .model import (StarFlag, Equation, SylvesterSystem, PeriodicSystem,
                    parse_system, serialize_system, validate)
from .pschur import (SignedSequence, PeriodicSchurForm, SpectrumReport,
                     periodic_schur, formal_eigenvalues, cyclic_pencil,
                     pencil_eigenvalues, chordal_distance)

__all__ = [
    "make_givens", "householder_qr", "two_norm_estimate",
    "StarFlag", "Equation", "SylvesterSystem", "PeriodicSystem",
    "parse_system", "serialize_system", "validate",
    "SignedSequence", "PeriodicSchurForm", "SpectrumReport",
    "periodic_schur", "formal_eigenvalues", "cyclic_pencil",
    "pencil_eigenvalues", "chordal_distance",
]

__version__ = "0.1.0"
