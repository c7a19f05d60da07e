"""Choi-matrix channel algebra and the PPT-operation conditions.

A channel Lambda on the two-qubit space is represented by its Choi matrix

    J = (Lambda (x) id) |Omega><Omega|,   |Omega> = (1/2) sum_i |i i>,

a Hermitian operator on the 16-dim space ordered (A1, B1, A2, B2), where
(A1, B1) is the output copy and (A2, B2) the input copy.  Under this
normalization the channel acts as

    Lambda(rho) = 4 * tr_{A2B2}[ J (I (x) rho^T) ],

trace-nonincreasing reads tr_{A1B1} J <= I/4, and a single product Kraus
pair K = a (x) b contributes |vec K><vec K| / 4 with tr = tr(K* K)/4.

A PPT operation is a channel that is completely positive (J PSD), maps PPT
states to PPT states (J stays PSD under partial transposition over Alice's
subsystems {A1, A2}), and is trace-nonincreasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .linops import HERMITICITY_TOL, kron, partial_trace, partial_transpose
from .states import DensityMatrix

CHOI_DIMS = (2, 2, 2, 2)
ALICE_SUBSYSTEMS = (0, 2)
OUTPUT_SUBSYSTEMS = (0, 1)
INPUT_SUBSYSTEMS = (2, 3)
PPT_CHECK_TOL = 1e-8
POVM_TOL = 1e-9


@dataclass(frozen=True)
class ChoiMatrix:
    """Choi matrix of a (sub)normalized channel on two qubits."""

    matrix: np.ndarray
    shape: tuple[int, ...] = CHOI_DIMS
    input_dims: tuple[int, int] = (2, 2)
    output_dims: tuple[int, int] = (2, 2)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (16, 16):
            raise ValueError(f"Choi matrix must be 16x16, got {m.shape}")
        dev = np.abs(m - m.conj().T).max()
        if dev > HERMITICITY_TOL:
            raise ValueError(f"Choi matrix is not Hermitian (deviation {dev:.3e})")
        tr = float(m.trace().real)
        if tr > 1.0 + 1e-9:
            raise ValueError(f"Choi trace {tr:.12g} exceeds 1 (not trace-nonincreasing)")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class KrausPair:
    """One product Kraus branch a (x) b of a local stochastic operation."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        if a.shape != (2, 2) or b.shape != (2, 2):
            raise ValueError("Kraus operators must be 2x2")
        pov = kron(a.conj().T @ a, b.conj().T @ b)
        top = float(np.linalg.eigvalsh(pov).max())
        if top > 1.0 + POVM_TOL:
            raise ValueError(f"a*a (x) b*b has eigenvalue {top:.12g} > 1 (POVM violation)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def swap_operator() -> np.ndarray:
    """The unitary V with V|ij> = |ji>."""
    v = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            v[j * 2 + i, i * 2 + j] = 1.0
    return v


def kraus_to_choi(ops: Sequence[KrausPair]) -> ChoiMatrix:
    """Choi matrix of the channel sum_i (a_i x b_i) rho (a_i x b_i)*."""
    if not ops:
        raise ValueError("need at least one Kraus pair")
    povm = np.zeros((4, 4), dtype=complex)
    j = np.zeros((16, 16), dtype=complex)
    for pair in ops:
        k = kron(pair.a, pair.b)
        povm += k.conj().T @ k
        w = k.reshape(16)
        j += np.outer(w, w.conj())
    top = float(np.linalg.eigvalsh(povm - np.eye(4)).max())
    if top > POVM_TOL:
        raise ValueError(f"sum of a*a (x) b*b exceeds I by {top:.3e} (POVM violation)")
    return ChoiMatrix(j / 4.0)


def apply_choi(j: ChoiMatrix, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """The channel output Lambda(rho) = 4 tr_{A2B2}[ J (I (x) rho^T) ]."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"state must be 4x4, got {m.shape}")
    j4 = j.matrix.reshape(4, 4, 4, 4)
    return 4.0 * np.einsum("aibj,ij->ab", j4, m)


def check_ppt_operation(j: ChoiMatrix) -> tuple[bool, bool, bool]:
    """The three PPT-operation conditions (CP, PPT-preserving, TNI).

    cp_ok:  min eig J >= -1e-8;
    ppt_ok: min eig of J partially transposed over {A1, A2} >= -1e-8;
    tni_ok: max eig of (tr_{A1B1} J - I/4) <= 1e-8.
    """
    m = j.matrix
    cp_ok = bool(np.linalg.eigvalsh(m).min() >= -PPT_CHECK_TOL)
    pt = partial_transpose(m, CHOI_DIMS, ALICE_SUBSYSTEMS)
    ppt_ok = bool(np.linalg.eigvalsh(pt).min() >= -PPT_CHECK_TOL)
    reduced = partial_trace(m, CHOI_DIMS, INPUT_SUBSYSTEMS)
    tni_ok = bool(np.linalg.eigvalsh(reduced - np.eye(4) / 4.0).max() <= PPT_CHECK_TOL)
    return cp_ok, ppt_ok, tni_ok


def slocc_swap_kraus(y: float) -> KrausPair:
    """The single local Kraus pair that swaps xi(x, y) with probability y/(1-y).

    a = b = |1><0| + sqrt(y/(1-y)) |0><1|, valid for 0 < y <= 1/2.
    """
    if not 0.0 < y <= 0.5:
        raise ValueError(f"y must lie in (0, 1/2], got {y}")
    r = np.sqrt(y / (1.0 - y))
    a = np.array([[0.0, r], [1.0, 0.0]], dtype=complex)
    return KrausPair(a, a.copy())
