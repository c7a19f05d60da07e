"""Dense complex linear algebra on small matrices.

Matrices are plain complex numpy arrays in row-major order.  Multipartite
operators carry their subsystem structure as a shape tuple, e.g. ``(2, 2)``
for a two-qubit space ordered (A, B) and ``(2, 2, 2, 2)`` for the 16-dim
channel space ordered (A1, B1, A2, B2).  Subsystem index sets always refer
to positions in that fixed ordering.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

HERMITICITY_TOL = 1e-10


def _as_matrix(m: np.ndarray) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {a.ndim}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix contains non-finite entries")
    return a


def _check_shape(m: np.ndarray, shape: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in shape)
    if any(d < 1 for d in dims):
        raise ValueError(f"every subsystem dimension must be >= 1, got {dims}")
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise ValueError(f"shape {dims} implies a {n}x{n} matrix, got {m.shape}")
    return dims


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def partial_trace(m: np.ndarray, shape: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out all subsystems not in ``keep``; trace is preserved.

    ``keep`` holds indices into ``shape``; the result lives on the kept
    subsystems in their original order.
    """
    a = _as_matrix(m)
    dims = _check_shape(a, shape)
    n = len(dims)
    kept = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in kept):
        raise ValueError(f"keep indices {kept} out of range for {n} subsystems")
    t = a.reshape(dims + dims)
    row = list(range(n))
    col = list(range(n, 2 * n))
    for s in range(n):
        if s not in kept:
            col[s] = row[s]  # contract this pair of axes
    out_axes = [row[s] for s in kept] + [col[s] for s in kept]
    t = np.einsum(t, row + col, out_axes)
    d = int(np.prod([dims[s] for s in kept])) if kept else 1
    return t.reshape(d, d)


def partial_transpose(m: np.ndarray, shape: Sequence[int], transposed: Iterable[int]) -> np.ndarray:
    """Transpose the indices of the selected subsystems; an involution."""
    a = _as_matrix(m)
    dims = _check_shape(a, shape)
    n = len(dims)
    sel = sorted(set(int(s) for s in transposed))
    if any(s < 0 or s >= n for s in sel):
        raise ValueError(f"transposed indices {sel} out of range for {n} subsystems")
    t = a.reshape(dims + dims)
    for s in sel:
        t = np.swapaxes(t, s, s + n)
    d = a.shape[0]
    return t.reshape(d, d)


def _require_hermitian(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    dev = np.abs(a - a.conj().T).max() if a.size else 0.0
    if dev > HERMITICITY_TOL:
        raise ValueError(f"{what} is not Hermitian (max |h - h^dag| = {dev:.3e})")
    return 0.5 * (a + a.conj().T)


def hermitian_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues real and in
    non-increasing order and eigenvectors as columns, so that
    ``h = U @ diag(w) @ U.conj().T``.  Inputs within the Hermiticity
    tolerance are symmetrized before decomposition.
    """
    a = _require_hermitian(_as_matrix(h))
    w, u = np.linalg.eigh(a)
    return w[::-1].copy(), u[:, ::-1].copy()


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    a = _require_hermitian(_as_matrix(m))
    return float(np.abs(np.linalg.eigvalsh(a)).sum())


def trace_distance(r: np.ndarray, s: np.ndarray) -> float:
    """Trace distance (1/2)||r - s||_1 between Hermitian matrices."""
    a = _as_matrix(r)
    b = _as_matrix(s)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return 0.5 * trace_norm(a - b)


def read_matrix(path: str) -> np.ndarray:
    """Read a complex matrix from the text format used by the CLI.

    Line 1 is the dimension n; the next n lines hold n entries each, every
    entry written as ``re,im``.  Lines starting with ``#`` are ignored.
    """
    rows: list[list[complex]] = []
    n = -1
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if n < 0:
                n = int(line)
                if n < 1:
                    raise ValueError(f"bad dimension {n} in {path}")
                continue
            entries = []
            for tok in line.split():
                re_s, _, im_s = tok.partition(",")
                if not _:
                    raise ValueError(f"malformed entry {tok!r} in {path} (want re,im)")
                entries.append(complex(float(re_s), float(im_s)))
            rows.append(entries)
    if n < 0:
        raise ValueError(f"empty matrix file {path}")
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix in {path} is not {n}x{n}")
    return np.array(rows, dtype=complex)


def write_matrix(path: str, m: np.ndarray) -> None:
    """Write a matrix in the text format understood by :func:`read_matrix`."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix text format holds square matrices only")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{a.shape[0]}\n")
        for row in a:
            fh.write(" ".join(f"{e.real:.17g},{e.imag:.17g}" for e in row) + "\n")
