"""Entanglement dynamics of two two-level atoms decaying collectively.

A pair of identical atoms coupled to the same vacuum mode decays
through a superradiant ladder while the antisymmetric (singlet)
component stays dark.  This package provides the closed-form solution
for X-shaped density matrices (:mod:`dickepair.analytic`), an
independent RK4 integrator for the full master equation
(:mod:`dickepair.lindblad`), entanglement measures
(:mod:`dickepair.entangle`), sweep/event scenarios
(:mod:`dickepair.scenarios`) and a CLI (:mod:`dickepair.cli`).
"""

from .analytic import (
    ModelParams,
    SInvariants,
    UnsupportedStateError,
    evolve_werner,
    evolve_x,
    long_time_limit,
    s_invariants,
)
from .entangle import (
    EntanglementReport,
    concurrence_general,
    concurrence_x,
    entanglement_report,
    ppt_verdict,
    xi,
)
from .lindblad import (
    Generator,
    IntegrationError,
    Trajectory,
    build_generator,
    integrate,
    integrate_grid,
    omega0_invariance_check,
    rhs,
)
from .qstate import (
    BASIS_LABELS,
    BELL_BASIS_LABELS,
    InvalidStateError,
    ValidityReport,
    XState,
    as_x_state,
    bell_decomposition,
    bell_state,
    from_x_params,
    ground,
    psi_plus,
    random_x_state,
    rho_tilde,
    rho_tilde_eps,
    singlet,
    singlet_fidelity,
    validate,
    werner,
)
from .scenarios import (
    EventTime,
    SweepSpec,
    concurrence_curve,
    disentanglement_time,
    evolution_series,
    longtime_report,
    onset_time,
    xi_surface,
)

__version__ = "0.1.0"

__all__ = [
    "BASIS_LABELS",
    "BELL_BASIS_LABELS",
    "EntanglementReport",
    "EventTime",
    "Generator",
    "IntegrationError",
    "InvalidStateError",
    "ModelParams",
    "SInvariants",
    "SweepSpec",
    "Trajectory",
    "UnsupportedStateError",
    "ValidityReport",
    "XState",
    "as_x_state",
    "bell_decomposition",
    "bell_state",
    "build_generator",
    "concurrence_curve",
    "concurrence_general",
    "concurrence_x",
    "disentanglement_time",
    "entanglement_report",
    "evolution_series",
    "evolve_werner",
    "evolve_x",
    "from_x_params",
    "ground",
    "integrate",
    "integrate_grid",
    "long_time_limit",
    "longtime_report",
    "omega0_invariance_check",
    "onset_time",
    "ppt_verdict",
    "psi_plus",
    "random_x_state",
    "rho_tilde",
    "rho_tilde_eps",
    "rhs",
    "s_invariants",
    "singlet",
    "singlet_fidelity",
    "validate",
    "werner",
    "xi",
    "xi_surface",
    "__version__",
]
