"""Closed-form dynamics of two atoms decaying into a common vacuum.

The collective coupling splits the two-atom space into a superradiant
ladder ``|++> -> |psi+> -> |-->`` and the dark singlet ``|psi->``.  For
X states with equal inner populations the resulting master equation has
an explicit solution, implemented here; :mod:`dickepair.lindblad`
integrates the same generator numerically and serves as the
cross-check.

Two conserved-looking combinations of the initial state organize
everything: ``s_minus`` (twice the dark singlet fraction, genuinely
conserved) and ``s_plus`` (twice the initial superradiant fraction,
which decays).  The stationary state and its residual entanglement
depend on ``s_minus`` alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .qstate import InvalidStateError, XState, _check_x_params


class UnsupportedStateError(InvalidStateError):
    """State is physical but outside what the closed form covers."""


@dataclass(frozen=True)
class ModelParams:
    """Rates of the collective-decay model.

    Attributes
    ----------
    gamma_decay : float
        Collective decay rate (the dimension-carrying scale; times are
        naturally quoted as ``gamma_decay * t``).
    gamma_shift : float
        Collective shift: both the exchange coupling between the atoms
        and the Lamb-type shift of the ladder, controlled by a single
        knob.
    omega0 : float
        Bare transition frequency.  It rotates only coherences between
        different excitation sectors, which X states never carry, so it
        is accepted for completeness but cannot affect any X-state
        observable (see ``lindblad.omega0_invariance_check``).
    """

    gamma_decay: float = 1.0
    gamma_shift: float = 0.0
    omega0: float = 0.0

    def __post_init__(self):
        for name in ("gamma_decay", "gamma_shift", "omega0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.gamma_decay < 0.0:
            raise ValueError(f"gamma_decay must be nonnegative, got {self.gamma_decay}")


@dataclass(frozen=True)
class SInvariants:
    """Initial-state combinations that drive the closed-form solution.

    Attributes
    ----------
    s_minus : float
        ``rho22 + rho33 - 2*Re(rho23)``: twice the dark singlet
        fraction.  Conserved for all time.
    s_plus : float
        ``rho22 + rho33 + 2*Re(rho23)``: twice the initial
        superradiant fraction.
    rho_i0 : float
        ``Im(rho23)`` at ``t = 0``; the only source of oscillation at
        the shift frequency.
    rho11_0 : float
        Initial double-excitation population, which feeds the
        superradiant ladder while decaying at twice the single-pair
        rate.
    """

    s_minus: float
    s_plus: float
    rho_i0: float
    rho11_0: float


def s_invariants(x: XState) -> SInvariants:
    """Extract the drivers of the closed-form solution from a state."""
    re2 = 2.0 * x.rho23.real
    inner = x.rho22 + x.rho33
    return SInvariants(inner - re2, inner + re2, x.rho23.imag, x.rho11)


def _require_symmetric(x: XState, sym_tol: float) -> None:
    gap = abs(x.rho22 - x.rho33)
    if gap > sym_tol:
        raise UnsupportedStateError(
            f"closed form needs rho22 == rho33, got a gap of {gap}; "
            "use the numeric integrator for population-asymmetric states"
        )


def evolve_x(x: XState, p: ModelParams, t: float, *, sym_tol: float = 1e-12) -> XState:
    """Evolve a population-symmetric X state for a time ``t``.

    Parameters
    ----------
    x : XState
        Initial state; must be physical and have ``rho22 == rho33``
        (within ``sym_tol``).  Asymmetric states are rejected rather
        than silently symmetrized -- hand those to
        :func:`dickepair.lindblad.integrate`.
    p : ModelParams
        Model rates.  ``omega0`` is inert here by design.
    t : float
        Elapsed time, ``t >= 0``.

    Returns
    -------
    XState
        The evolved state.  ``rho44`` is filled in as the trace
        complement, so the trace is exact by construction.
    """
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    _check_x_params(x, 1e-9)
    _require_symmetric(x, sym_tol)
    inv = s_invariants(x)

    gt = p.gamma_decay * t
    decay2 = math.exp(-2.0 * gt)
    decay1 = math.exp(-gt)
    fed = inv.s_plus + 4.0 * inv.rho11_0 * gt

    rho11 = inv.rho11_0 * decay2
    even = (inv.s_minus + decay2 * fed) / 4.0
    wobble = decay1 * inv.rho_i0
    phase = p.gamma_shift * t
    rho22 = even - wobble * math.sin(phase)
    rho33 = even + wobble * math.sin(phase)
    rho23 = (-inv.s_minus + decay2 * fed) / 4.0 + 1j * wobble * math.cos(phase)
    rho44 = 1.0 - rho11 - rho22 - rho33
    return XState(rho11, rho22, rho33, rho44, rho23)


def evolve_werner(f: float, p: ModelParams, t: float) -> XState:
    """Evolve the Werner state with singlet fraction ``f``.

    Written out directly in ``f`` rather than routed through
    :func:`evolve_x`, so the two can cross-check each other.  The
    singlet share ``f`` survives untouched; the rest drains down the
    superradiant ladder into ``|-->``.
    """
    if not 0.0 <= f <= 1.0:
        raise InvalidStateError(f"Werner fraction must lie in [0, 1], got {f}")
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    gt = p.gamma_decay * t
    decay2 = math.exp(-2.0 * gt)
    rest = (1.0 - f) * (1.0 + 2.0 * gt) / 6.0

    rho11 = (1.0 - f) / 3.0 * decay2
    inner = f / 2.0 + decay2 * rest
    rho23 = -f / 2.0 + decay2 * rest
    rho44 = 1.0 - rho11 - 2.0 * inner
    return XState(rho11, inner, inner, rho44, rho23)


def long_time_limit(x: XState) -> XState:
    """Stationary state reached from ``x`` under collective decay.

    Everything but the dark singlet share drains to ``|-->``; what
    remains is a mixture of the singlet (weight ``s_minus / 2``) and the
    ground state.  Its concurrence is ``s_minus / 2``.
    """
    _check_x_params(x, 1e-9)
    s = s_invariants(x).s_minus
    quarter = s / 4.0
    return XState(0.0, quarter, quarter, 1.0 - s / 2.0, -quarter)
