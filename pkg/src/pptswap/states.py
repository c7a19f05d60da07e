"""Two-qubit density matrices and random-state generation.

Randomness contract
-------------------
All sampling uses numpy's Philox counter-based 64-bit generator.  A sample
stream is opened as ``Generator(Philox(key=seed))`` for one 64-bit unsigned
seed.  Batch experiments derive per-sample seeds from a master seed as

    seed_i = blake2b-64( LE64(master_seed) || LE64(i) )

(see :func:`derive_stream_seed`), so independent samples come from disjoint
streams and any sample can be regenerated in isolation.  Both the generator
and the derivation rule are part of the stable interface; records written by
the CLI store the derived per-sample seed.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .linops import HERMITICITY_TOL

TRACE_TOL = 1e-10
EIGEN_FLOOR = -1e-9

_KET_00 = 0
_KET_01 = 1
_KET_10 = 2
_KET_11 = 3


@dataclass(frozen=True)
class DensityMatrix:
    """A two-qubit state: Hermitian, unit trace, PSD within tolerance."""

    matrix: np.ndarray
    dim: int = 0
    shape: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        n = m.shape[0]
        dim = self.dim if self.dim else n
        shape = tuple(self.shape) if self.shape else (2,) * int(round(np.log2(n)))
        if int(np.prod(shape)) != n or dim != n:
            raise ValueError(f"dim {dim} / shape {shape} inconsistent with a {n}x{n} matrix")
        dev = np.abs(m - m.conj().T).max()
        if dev > HERMITICITY_TOL:
            raise ValueError(f"density matrix is not Hermitian (deviation {dev:.3e})")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace differs from 1 (trace = {tr.real:.12g})")
        lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if lo < EIGEN_FLOOR:
            raise ValueError(f"density matrix has a negative eigenvalue ({lo:.3e})")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "shape", shape)


@dataclass(frozen=True)
class RandomStateSpec:
    """Rank and seed for one random two-qubit state."""

    rank: int
    seed: int

    def __post_init__(self) -> None:
        if self.rank not in (2, 3, 4):
            raise ValueError(f"rank must be one of 2, 3, 4, got {self.rank}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def derive_stream_seed(master_seed: int, index: int) -> int:
    """Per-sample 64-bit stream seed: blake2b-64 of the two little-endian words."""
    payload = struct.pack("<QQ", master_seed & (2**64 - 1), index & (2**64 - 1))
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def generator_from_seed(seed: int) -> np.random.Generator:
    """Open the documented Philox stream for one 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))


def xi_state(x: float, y: float) -> DensityMatrix:
    """x |psi><psi| + (1-x) |01><01| with |psi> = sqrt(y)|00> + sqrt(1-y)|11>."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"y must lie in [0, 1], got {y}")
    psi = np.zeros(4, dtype=complex)
    psi[_KET_00] = np.sqrt(y)
    psi[_KET_11] = np.sqrt(1.0 - y)
    m = x * np.outer(psi, psi.conj())
    m[_KET_01, _KET_01] += 1.0 - x
    return DensityMatrix(m)


def xi_prime_state(xp: float, y: float) -> DensityMatrix:
    """x'(|psi><psi| + |01><01|) + (1-2x')|psi_perp><psi_perp|.

    |psi_perp> = sqrt(1-y)|00> - sqrt(y)|11>.  The parameter range is
    1/3 < x' <= 1/2; at x' = 1/2 the state coincides with xi(1/2, y).
    """
    if not (1.0 / 3.0 < xp <= 0.5):
        raise ValueError(f"x' must lie in (1/3, 1/2], got {xp}")
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"y must lie in [0, 1], got {y}")
    psi = np.zeros(4, dtype=complex)
    psi[_KET_00] = np.sqrt(y)
    psi[_KET_11] = np.sqrt(1.0 - y)
    perp = np.zeros(4, dtype=complex)
    perp[_KET_00] = np.sqrt(1.0 - y)
    perp[_KET_11] = -np.sqrt(y)
    m = xp * np.outer(psi, psi.conj())
    m[_KET_01, _KET_01] += xp
    m += (1.0 - 2.0 * xp) * np.outer(perp, perp.conj())
    return DensityMatrix(m)


def pure_state(amplitudes) -> DensityMatrix:
    """Normalized projector |chi><chi| from a 4-component amplitude vector."""
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if v.shape != (4,):
        raise ValueError(f"expected 4 amplitudes, got {v.shape}")
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("amplitude vector must be nonzero")
    v = v / nrm
    return DensityMatrix(np.outer(v, v.conj()))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary via QR with the R-diagonal phase fix."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    phases = diag / np.abs(diag)
    return q * phases


def random_simplex_eigenvalues(rank: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the (rank-1)-simplex, padded with exact trailing zeros."""
    if rank not in (2, 3, 4):
        raise ValueError(f"rank must be one of 2, 3, 4, got {rank}")
    lam = np.zeros(4)
    e = rng.standard_exponential(rank)
    lam[:rank] = e / e.sum()
    return lam


def random_density(spec: RandomStateSpec) -> DensityMatrix:
    """U diag(lambda) U* with simplex eigenvalues and a Haar unitary.

    Draw order is fixed (eigenvalues, then unitary) so results are
    bit-reproducible for a given seed.
    """
    rng = generator_from_seed(spec.seed)
    lam = random_simplex_eigenvalues(spec.rank, rng)
    u = haar_unitary(4, rng)
    m = (u * lam) @ u.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m)
