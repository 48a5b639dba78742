"""Exact torsion criteria for combinations of local Heegner divisors near a cusp of a unitary
Shimura variety, checked two independent ways (a bilinear residual and a theta obstruction)."""

from .cusp import build_cusp, derive_heisenberg_params
from .fixtures import builtin, load_fixture
from .hlattice import HermitianLattice, LatticeVector
from .qfield import FieldSpec

__version__ = "0.1.0"

__all__ = ["FieldSpec", "HermitianLattice", "LatticeVector", "build_cusp", "builtin",
           "derive_heisenberg_params", "load_fixture"]
