"""Entanglement measures for two-qubit states.

Three independent routes to the same physics:

* :func:`concurrence_x` -- closed form on X states,
  ``C = 2 * max(0, |rho23| - sqrt(rho11*rho44))``;
* :func:`concurrence_general` -- the spin-flip construction valid for
  any two-qubit density matrix;
* :func:`ppt_verdict` -- the partial-transpose criterion, exact for
  two qubits.

On X states the sign of :func:`xi` (= ``rho11*rho44 - |rho23|^2``)
decides entanglement: negative exactly when the concurrence is
positive.  The boundary ``xi == 0`` is reported as separable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qstate import XState, _as_matrix

VERDICT_SEPARABLE = "separable"
VERDICT_ENTANGLED = "entangled"


@dataclass(frozen=True)
class EntanglementReport:
    """Concurrence, the separability indicator ``xi``, and the verdict."""

    concurrence: float
    xi: float
    verdict: str


def xi(x: XState) -> float:
    """Separability indicator for X states.

    ``xi = rho11*rho44 - |rho23|^2``; the state is entangled exactly
    when this is negative.  For physical X states the value lies in
    ``[-1/4, 1/4]`` (the singlet sits at the minimum).
    """
    return x.rho11 * x.rho44 - abs(x.rho23) ** 2


def concurrence_x(x: XState) -> float:
    """Concurrence of an X state, in closed form.

    Populations are clamped at zero before the square root so that
    roundoff-negative values from upstream arithmetic cannot produce
    NaNs; the result is clipped to ``[0, 1]``.
    """
    inside = max(x.rho11, 0.0) * max(x.rho44, 0.0)
    value = 2.0 * (abs(x.rho23) - np.sqrt(inside))
    return float(min(max(value, 0.0), 1.0))


def _sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix via its spectrum."""
    eigval, eigvec = np.linalg.eigh(matrix)
    eigval = np.clip(eigval, 0.0, None)
    return (eigvec * np.sqrt(eigval)) @ eigvec.conjugate().T


def concurrence_general(state) -> float:
    """Concurrence of an arbitrary two-qubit density matrix.

    Uses the spin-flip construction: with
    ``rho_f = (sy x sy) conj(rho) (sy x sy)`` the concurrence is
    ``max(0, l1 - l2 - l3 - l4)`` where ``l_i`` are the decreasing
    square roots of the eigenvalues of ``sqrt(rho) rho_f sqrt(rho)``.
    The Hermitian sandwich keeps the eigenproblem well conditioned;
    eigenvalues are clamped at zero before the square root.
    """
    rho = _as_matrix(state)
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    flip = np.kron(sy, sy)
    rho_f = flip @ rho.conjugate() @ flip
    root = _sqrtm_psd((rho + rho.conjugate().T) / 2.0)
    sandwich = root @ rho_f @ root
    eigval = np.linalg.eigvalsh((sandwich + sandwich.conjugate().T) / 2.0)
    lam = np.sqrt(np.clip(eigval, 0.0, None))[::-1]
    value = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(max(value, 0.0), 1.0))


def partial_transpose(state) -> np.ndarray:
    """Partial transpose over atom B (the second tensor slot)."""
    rho = _as_matrix(state)
    out = rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4).copy()
    out.flags.writeable = False
    return out


def ppt_min_eigenvalue(state) -> float:
    """Smallest eigenvalue of the partial transpose."""
    pt = partial_transpose(state)
    return float(np.linalg.eigvalsh((pt + pt.conjugate().T) / 2.0)[0])


def ppt_verdict(state, *, boundary_tol: float = 1e-12) -> str:
    """Separability verdict from the partial-transpose criterion.

    Exact for a pair of qubits: entangled if and only if the partial
    transpose has a negative eigenvalue.  Eigenvalues within
    ``boundary_tol`` of zero count as separable, matching the
    convention used for ``xi == 0``.
    """
    if ppt_min_eigenvalue(state) < -boundary_tol:
        return VERDICT_ENTANGLED
    return VERDICT_SEPARABLE


def entanglement_report(x: XState) -> EntanglementReport:
    """Bundle concurrence, ``xi`` and the verdict for an X state.

    The verdict follows the sign of ``xi``; an exact zero is reported
    as separable.
    """
    value = xi(x)
    verdict = VERDICT_ENTANGLED if value < 0.0 else VERDICT_SEPARABLE
    return EntanglementReport(concurrence_x(x), value, verdict)
