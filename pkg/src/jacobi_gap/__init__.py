"""Lowest-eigenphase distribution of Jacobi ensembles J_N^(a,b).

Two independent routes to the gap probability E_N(phi) and the density
nu_N(phi) = -dE_N/dphi:

* :mod:`~jacobi_gap.ode_solver` integrates the Painleve VI sigma-form system
  from near phi = 0 with initial data from a small-phi expansion;
* :mod:`~jacobi_gap.series_solver` builds the exact rational power series of
  the Hamiltonian about t = 0.

:mod:`~jacobi_gap.mc_oracle` samples the joint density directly and
:mod:`~jacobi_gap.harness` cross-checks the methods and glues them together.
"""

from .errors import (
    BreakdownWarning,
    DomainError,
    EnvelopeViolation,
    GlueFailure,
    JacobiGapError,
    RecursionStall,
    SingularRhs,
    StepFailure,
)
from .params import EnsembleParams, HamiltonianState, SolutionGrid, derive, phi_to_t, t_to_phi

__version__ = "0.1.0"

__all__ = [
    "BreakdownWarning",
    "DomainError",
    "EnsembleParams",
    "EnvelopeViolation",
    "GlueFailure",
    "HamiltonianState",
    "JacobiGapError",
    "RecursionStall",
    "SingularRhs",
    "SolutionGrid",
    "StepFailure",
    "derive",
    "phi_to_t",
    "t_to_phi",
]
