"""Two-qubit density matrices for a pair of two-level atoms.

Everything in this package works in the product basis

    ``{|++>, |+->, |-+>, |-->}``   (indices 0..3)

where ``|+>`` is the excited and ``|->`` the ground state of a single
atom, and the first slot belongs to atom A.  Matrix entries are named
1-based after their position, so ``rho23`` is the coherence between
``|+->`` and ``|-+>``.

The states of interest here are *X states*: density matrices whose only
nonzero entries are the four populations and the inner coherence
``rho23`` (and its conjugate).  They are closed under the collective
decay studied in :mod:`dickepair.analytic` and
:mod:`dickepair.lindblad`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Labels of the computational product basis, in storage order.
BASIS_LABELS = ("++", "+-", "-+", "--")

#: Labels of the decay-adapted basis used by :func:`bell_decomposition`:
#: both-excited, symmetric Bell state, antisymmetric (singlet) Bell
#: state, both-ground.
BELL_BASIS_LABELS = ("++", "psi+", "psi-", "--")

# Columns are |++>, |psi+>, |psi->, |--> expressed in the product basis.
_BELL_TRANSFORM = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0), 0.0],
        [0.0, 1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0), 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)


class InvalidStateError(ValueError):
    """Raised when numbers handed in as a quantum state are not one."""


@dataclass(frozen=True)
class XState:
    """Parameters of an X-shaped two-qubit density matrix.

    Attributes
    ----------
    rho11, rho22, rho33, rho44 : float
        Populations of ``|++>``, ``|+->``, ``|-+>``, ``|-->``.
    rho23 : complex
        Coherence between ``|+->`` and ``|-+>``; the (2,3) matrix entry.
        The (3,2) entry is its conjugate.

    Construction performs no physicality checks; use
    :func:`from_x_params` (or :func:`validate`) to enforce them.
    """

    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho23: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rho11", float(self.rho11))
        object.__setattr__(self, "rho22", float(self.rho22))
        object.__setattr__(self, "rho33", float(self.rho33))
        object.__setattr__(self, "rho44", float(self.rho44))
        object.__setattr__(self, "rho23", complex(self.rho23))

    @property
    def rho32(self) -> complex:
        """The (3,2) entry, conjugate of :attr:`rho23`."""
        return self.rho23.conjugate()

    @property
    def populations(self) -> tuple[float, float, float, float]:
        return (self.rho11, self.rho22, self.rho33, self.rho44)

    def trace(self) -> float:
        return self.rho11 + self.rho22 + self.rho33 + self.rho44

    def to_matrix(self) -> np.ndarray:
        """Assemble the 4x4 density matrix (no physicality checks)."""
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = self.rho11
        rho[1, 1] = self.rho22
        rho[2, 2] = self.rho33
        rho[3, 3] = self.rho44
        rho[1, 2] = self.rho23
        rho[2, 1] = self.rho23.conjugate()
        rho.flags.writeable = False
        return rho


@dataclass(frozen=True)
class ValidityReport:
    """Diagnostics from :func:`validate`.

    Attributes
    ----------
    hermiticity_defect : float
        Max entrywise ``|rho - rho^dagger|``.
    trace_defect : float
        ``|Tr(rho) - 1|``.
    min_eigenvalue : float
        Smallest eigenvalue of the hermitized matrix.
    passed : bool
        True when all three stay within the tolerances passed to
        :func:`validate`.
    """

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    passed: bool


def _as_matrix(state) -> np.ndarray:
    """Accept an :class:`XState` or a 4x4 array-like, return an ndarray."""
    if isinstance(state, XState):
        return state.to_matrix()
    rho = np.asarray(state, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got shape {rho.shape}")
    return rho


def _check_x_params(x: XState, tol: float) -> None:
    """Raise InvalidStateError unless `x` describes a physical X state."""
    pops = x.populations
    if not all(np.isfinite(pops)) or not np.isfinite(x.rho23):
        raise InvalidStateError("X-state parameters must be finite")
    low = min(pops)
    if low < -tol:
        raise InvalidStateError(f"negative population {low}")
    defect = abs(x.trace() - 1.0)
    if defect > max(tol, 1e-10):
        raise InvalidStateError(f"populations sum to {x.trace()}, not 1 (defect {defect})")
    # Positivity of the inner 2x2 block; with nonnegative populations
    # this is the only extra condition an X matrix needs to be PSD.
    minor = x.rho22 * x.rho33 - abs(x.rho23) ** 2
    if minor < -tol:
        raise InvalidStateError(
            f"coherence too large: |rho23|^2 = {abs(x.rho23) ** 2} exceeds "
            f"rho22*rho33 = {x.rho22 * x.rho33}"
        )


def from_x_params(x: XState, *, tol: float = 1e-9) -> np.ndarray:
    """Build the 4x4 density matrix of an X state, enforcing physicality.

    Parameters
    ----------
    x : XState
        Populations and inner coherence.
    tol : float
        Slack allowed on positivity and the unit trace, absorbing
        roundoff from upstream arithmetic.

    Returns
    -------
    np.ndarray
        Read-only complex 4x4 matrix in the ``BASIS_LABELS`` order.

    Raises
    ------
    InvalidStateError
        If populations are negative, do not sum to one, or the
        coherence violates ``|rho23|^2 <= rho22*rho33``.
    """
    _check_x_params(x, tol)
    return x.to_matrix()


def as_x_state(state, *, tol: float = 1e-12) -> XState:
    """Extract X-state parameters from a matrix, rejecting off-pattern entries.

    Parameters
    ----------
    state : array-like or XState
        Density matrix expected to carry weight only on the diagonal
        and the (2,3)/(3,2) coherence.
    tol : float
        Largest magnitude tolerated on entries outside the X pattern
        and on imaginary parts of the diagonal.

    Returns
    -------
    XState
    """
    if isinstance(state, XState):
        return state
    rho = _as_matrix(state)
    mask = np.zeros((4, 4), dtype=bool)
    mask[np.diag_indices(4)] = True
    mask[1, 2] = mask[2, 1] = True
    worst = np.max(np.abs(rho[~mask]))
    if worst > tol:
        raise InvalidStateError(f"matrix is not X-shaped: off-pattern entry of size {worst}")
    imag = np.max(np.abs(np.diag(rho).imag))
    if imag > tol:
        raise InvalidStateError(f"diagonal has imaginary part of size {imag}")
    return XState(
        rho[0, 0].real,
        rho[1, 1].real,
        rho[2, 2].real,
        rho[3, 3].real,
        (rho[1, 2] + rho[2, 1].conjugate()) / 2.0,
    )


# ---------------------------------------------------------------------------
# canonical states
# ---------------------------------------------------------------------------

def werner(f: float) -> XState:
    """Singlet-weighted Werner state.

    The mixture ``f * |psi-><psi-| + (1-f)/3 * (identity - |psi-><psi-|)``
    with singlet fidelity ``f``.

    Parameters
    ----------
    f : float
        Singlet fraction, in ``[0, 1]``.
    """
    if not 0.0 <= f <= 1.0:
        raise InvalidStateError(f"Werner fraction must lie in [0, 1], got {f}")
    outer = (1.0 - f) / 3.0
    inner = (1.0 + 2.0 * f) / 6.0
    return XState(outer, inner, inner, outer, (1.0 - 4.0 * f) / 6.0)


def rho_tilde(a: float) -> XState:
    """Singlet-free mixed state with tunable double-excitation weight.

    Two thirds of the weight sit on the symmetric Bell state
    ``|psi+>``; the rest is split between ``|++>`` (weight ``a/3``) and
    ``|-->`` (weight ``(1-a)/3``).  Contains no singlet component, so
    all of its entanglement is transient under collective decay.

    Parameters
    ----------
    a : float
        Double-excitation knob, in ``[0, 1]``.
    """
    if not 0.0 <= a <= 1.0:
        raise InvalidStateError(f"parameter a must lie in [0, 1], got {a}")
    third = 1.0 / 3.0
    return XState(a * third, third, third, (1.0 - a) * third, third)


def rho_tilde_eps(a: float, eps: float) -> XState:
    """Perturbation of :func:`rho_tilde` that adds a small singlet share.

    Moves weight ``2*eps/3`` from ``|-->`` onto the singlet ``|psi->``,
    leaving a protected stationary entanglement of ``2*eps/3``.

    Parameters
    ----------
    a : float
        Double-excitation knob, in ``[0, 1]``.
    eps : float
        Singlet admixture, ``eps >= 0`` with ``a + 2*eps <= 1``.
    """
    if not 0.0 <= a <= 1.0:
        raise InvalidStateError(f"parameter a must lie in [0, 1], got {a}")
    if eps < 0.0:
        raise InvalidStateError(f"parameter eps must be nonnegative, got {eps}")
    if a + 2.0 * eps > 1.0 + 1e-15:
        raise InvalidStateError(f"need a + 2*eps <= 1, got {a + 2.0 * eps}")
    third = 1.0 / 3.0
    return XState(
        a * third,
        (1.0 + eps) * third,
        (1.0 + eps) * third,
        (1.0 - a - 2.0 * eps) * third,
        (1.0 - eps) * third,
    )


def singlet() -> XState:
    """The antisymmetric Bell state ``(|+-> - |-+>)/sqrt(2)`` -- dark
    under collective decay."""
    return XState(0.0, 0.5, 0.5, 0.0, -0.5)


def psi_plus() -> XState:
    """The symmetric Bell state ``(|+-> + |-+>)/sqrt(2)`` -- superradiant."""
    return XState(0.0, 0.5, 0.5, 0.0, 0.5)


def ground() -> XState:
    """Both atoms in ``|->``; the decay endpoint for singlet-free states."""
    return XState(0.0, 0.0, 0.0, 1.0)


def excited() -> XState:
    """Both atoms in ``|+>``."""
    return XState(1.0, 0.0, 0.0, 0.0)


def bell_state(label: str) -> np.ndarray:
    """Density matrix of one of the four Bell states.

    Parameters
    ----------
    label : str
        One of ``"phi+"``, ``"phi-"``, ``"psi+"``, ``"psi-"``.  Note the
        ``phi`` pair carries a (1,4) coherence and is therefore *not* an
        X state in the sense used by the analytic solver.
    """
    s = 1.0 / np.sqrt(2.0)
    vectors = {
        "phi+": np.array([s, 0.0, 0.0, s], dtype=complex),
        "phi-": np.array([s, 0.0, 0.0, -s], dtype=complex),
        "psi+": np.array([0.0, s, s, 0.0], dtype=complex),
        "psi-": np.array([0.0, s, -s, 0.0], dtype=complex),
    }
    try:
        vec = vectors[label]
    except KeyError:
        raise ValueError(f"unknown Bell state {label!r}; choose from {sorted(vectors)}") from None
    rho = np.outer(vec, vec.conjugate())
    rho.flags.writeable = False
    return rho


def random_x_state(rng: np.random.Generator, *, symmetric: bool = False) -> XState:
    """Draw a random physical X state.

    Populations come from a flat Dirichlet draw; the coherence magnitude
    is a uniform fraction of its positivity bound ``sqrt(rho22*rho33)``
    with a uniform phase.

    Parameters
    ----------
    rng : numpy.random.Generator
        Source of randomness (seed it for reproducible tests).
    symmetric : bool
        If True, equalize the inner populations so the state is
        accepted by the closed-form evolution.
    """
    p = rng.dirichlet(np.ones(4))
    if symmetric:
        inner = (p[1] + p[2]) / 2.0
        p = np.array([p[0], inner, inner, p[3]])
    bound = np.sqrt(p[1] * p[2])
    mag = rng.uniform(0.0, bound) if bound > 0.0 else 0.0
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return XState(p[0], p[1], p[2], p[3], mag * np.exp(1j * phase))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def singlet_fidelity(state) -> float:
    """Overlap ``<psi-| rho |psi->`` with the dark singlet.

    This fraction is conserved exactly under collective decay, which is
    what makes it the natural label for Werner states here.
    """
    rho = _as_matrix(state)
    value = (rho[1, 1] + rho[2, 2] - rho[1, 2] - rho[2, 1]) / 2.0
    return value.real


def validate(
    state,
    *,
    tol_herm: float = 1e-10,
    tol_trace: float = 1e-10,
    tol_psd: float = 1e-9,
) -> ValidityReport:
    """Measure how far a matrix is from being a density matrix.

    Purely diagnostic: it never raises on unphysical numbers, it just
    reports them.  The PSD tolerance is looser than the other two by
    default because eigenvalues of nearly singular matrices wobble more
    than traces do.

    Parameters
    ----------
    state : array-like or XState
        Candidate density matrix.
    tol_herm, tol_trace, tol_psd : float
        Acceptance thresholds; ``passed`` requires the hermiticity and
        trace defects to stay below the first two and the smallest
        eigenvalue to stay above ``-tol_psd``.

    Returns
    -------
    ValidityReport
    """
    rho = _as_matrix(state)
    herm_defect = float(np.max(np.abs(rho - rho.conjugate().T)))
    trace_defect = float(abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag))
    hermitized = (rho + rho.conjugate().T) / 2.0
    if np.isfinite(hermitized).all():
        min_eig = float(np.linalg.eigvalsh(hermitized)[0])
    else:
        # eigvalsh would blow up on NaN/inf; report the failure instead
        min_eig = float("nan")
    passed = bool(
        herm_defect <= tol_herm and trace_defect <= tol_trace and min_eig >= -tol_psd
    )
    return ValidityReport(herm_defect, trace_defect, min_eig, passed)


def bell_decomposition(state) -> np.ndarray:
    """Rewrite a density matrix in the decay-adapted basis.

    Returns the matrix in the ``BELL_BASIS_LABELS`` order
    ``{|++>, |psi+>, |psi->, |-->}``.  Its (3,3) entry is the conserved
    singlet population; the (2,3) coherence decays at the collective
    rate while precessing at the exchange shift.
    """
    rho = _as_matrix(state)
    out = _BELL_TRANSFORM.conjugate().T @ rho @ _BELL_TRANSFORM
    out.flags.writeable = False
    return out


def bell_recompose(matrix) -> np.ndarray:
    """Inverse of :func:`bell_decomposition`."""
    mat = np.asarray(matrix, dtype=complex)
    if mat.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got shape {mat.shape}")
    out = _BELL_TRANSFORM @ mat @ _BELL_TRANSFORM.conjugate().T
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def density_matrix_to_dict(state) -> dict:
    """JSON-ready representation of a density matrix.

    Complex entries become ``[re, im]`` pairs and the basis order is
    recorded explicitly so files stay self-describing.
    """
    rho = _as_matrix(state)
    return {
        "basis_order": list(BASIS_LABELS),
        "matrix": [[_pair(rho[i, j]) for j in range(4)] for i in range(4)],
    }


def density_matrix_from_dict(payload: dict) -> np.ndarray:
    """Rebuild a density matrix written by :func:`density_matrix_to_dict`."""
    order = payload.get("basis_order")
    if tuple(order or ()) != BASIS_LABELS:
        raise InvalidStateError(
            f"basis_order must be {list(BASIS_LABELS)}, got {order!r}"
        )
    cells = payload["matrix"]
    rho = np.array(
        [[complex(cells[i][j][0], cells[i][j][1]) for j in range(4)] for i in range(4)]
    )
    rho.flags.writeable = False
    return rho


def x_state_to_dict(x: XState) -> dict:
    """JSON-ready representation of an :class:`XState`."""
    return {
        "basis_order": list(BASIS_LABELS),
        "rho11": x.rho11,
        "rho22": x.rho22,
        "rho33": x.rho33,
        "rho44": x.rho44,
        "rho23": _pair(x.rho23),
    }


def x_state_from_dict(payload: dict) -> XState:
    """Rebuild an :class:`XState` written by :func:`x_state_to_dict`."""
    order = payload.get("basis_order")
    if tuple(order or ()) != BASIS_LABELS:
        raise InvalidStateError(
            f"basis_order must be {list(BASIS_LABELS)}, got {order!r}"
        )
    re, im = payload["rho23"]
    return XState(
        payload["rho11"],
        payload["rho22"],
        payload["rho33"],
        payload["rho44"],
        complex(re, im),
    )
