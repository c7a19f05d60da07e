"""Scalar entanglement and mixedness functionals on two-qubit states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import partial_trace, partial_transpose
from .states import DensityMatrix

SEPARABILITY_TOL = -1e-9

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_YY = np.kron(_SIGMA_Y, _SIGMA_Y)


@dataclass(frozen=True)
class MeasureVector:
    """The four per-state scalars recorded by every experiment."""

    concurrence: float
    negativity: float
    purity: float
    local_purity_gap: float


def _rho(rho: DensityMatrix | np.ndarray) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the descending square roots of the eigenvalues of
    sqrt(rho) R sqrt(rho) with R = (sy x sy) conj(rho) (sy x sy); the
    Hermitian route avoids a non-Hermitian eigenproblem.  Round-off
    negatives are clamped before the square roots.
    """
    m = _rho(rho)
    w, u = np.linalg.eigh(0.5 * (m + m.conj().T))
    sqrt_m = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    r = _YY @ m.conj() @ _YY
    h = sqrt_m @ r @ sqrt_m
    ev = np.linalg.eigvalsh(0.5 * (h + h.conj().T))
    lam = np.sqrt(np.clip(ev, 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def negativity(rho: DensityMatrix) -> float:
    """Absolute sum of the negative eigenvalues of the partial transpose."""
    pt = partial_transpose(_rho(rho), (2, 2), (0,))
    ev = np.linalg.eigvalsh(pt)
    return float(-ev[ev < 0.0].sum())


def purity(rho: DensityMatrix) -> float:
    """trace(rho^2)."""
    m = _rho(rho)
    return float(np.real(np.einsum("ij,ji->", m, m)))


def local_purity_gap(rho: DensityMatrix) -> float:
    """|tr rho_A^2 - tr rho_B^2|, the marginal-purity asymmetry."""
    m = _rho(rho)
    ra = partial_trace(m, (2, 2), (0,))
    rb = partial_trace(m, (2, 2), (1,))
    pa = np.real(np.einsum("ij,ji->", ra, ra))
    pb = np.real(np.einsum("ij,ji->", rb, rb))
    return float(abs(pa - pb))


def is_separable(rho: DensityMatrix) -> bool:
    """PPT test (necessary and sufficient for two qubits)."""
    pt = partial_transpose(_rho(rho), (2, 2), (0,))
    return bool(np.linalg.eigvalsh(pt).min() >= SEPARABILITY_TOL)


def measure_vector(rho: DensityMatrix) -> MeasureVector:
    """All four measures of one state."""
    return MeasureVector(
        concurrence=concurrence(rho),
        negativity=negativity(rho),
        purity=purity(rho),
        local_purity_gap=local_purity_gap(rho),
    )
