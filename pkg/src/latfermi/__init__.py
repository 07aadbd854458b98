"""latfermi: lattice free-fermion surface bounds, segregation, and small-system ED."""

__version__ = "0.1.0"

from . import bounds, bulk, lattice, manybody, segregation, spectral  # noqa: F401
from .errors import BudgetExceededError, ConvergenceError  # noqa: F401
