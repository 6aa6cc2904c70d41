"""Noetherian functions: chains, closure operations, evaluation, Bernstein
indices, Weierstrass polydiscs, restriction ODEs, ideal chains and
rational point censuses."""

__version__ = "0.1.0"

from .config import DEFAULT, RunConfig
from .errors import BudgetExceeded, ContinuationError, NoetherianError, PrecisionError, PreconditionError
from .poly import ComplexBox, GaussianRational, Polynomial
from .chain import NoetherianChain, NoetherianFunction, RationalSystem

__all__ = ["DEFAULT", "RunConfig", "NoetherianError", "PreconditionError", "PrecisionError", "ContinuationError",
           "BudgetExceeded", "Polynomial", "GaussianRational", "ComplexBox", "NoetherianChain",
           "NoetherianFunction", "RationalSystem"]
