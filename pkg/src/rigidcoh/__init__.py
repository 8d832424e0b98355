"""Truncated computations of rigid cohomology for finitely generated F_p-algebras.

The engine builds finite windows of J^m-adic weak completions of a lifted
presentation, their de Rham complexes, and the mapping cone computing the
homotopy limit over m, then certifies Betti numbers by exact or p-adic rank
computations.
"""

from .errors import RigidCohError
from .padic import PadicContext, PadicScalar
from .poly import FormBasis, PolyForm
from .presentation import Presentation

__all__ = ["PadicContext", "PadicScalar", "PolyForm", "FormBasis", "Presentation", "RigidCohError"]
__version__ = "0.1.0"
