"""Split special Lagrangian geometry over the double numbers.

Submodules: dnum (double numbers), dmat (D-matrices), planes (plane
predicates, canonical forms, sampling), forms (exterior algebra oracle),
potential (potentials, residuals, surfaces), transport, holo2d, deform,
acceptance and the ``slag`` command line.
"""
from .dnum import DNumber, classify, dexp, dlog, polar
from .dmat import DMatrix, det_d, from_gl

__version__ = "0.1.0"

__all__ = ["DNumber", "classify", "dexp", "dlog", "polar", "DMatrix", "det_d", "from_gl",
           "__version__"]
