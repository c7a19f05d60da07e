"""The swap SDPs (exact and approximate) plus analytic formulas and bound curves.

Exact mode decision variables: the Hermitian Choi matrix J and the
probability p.  Constraints: J PSD, J PSD after partial transposition over
{A1, A2}, I/4 - tr_{A1B1} J PSD, and the equality
4 tr_{A2B2}[J (I x rho^T)] = p V rho V.  Objective: maximize p.

For rank-deficient rho the equality plus J >= 0 force J to annihilate
null(V rho V) x supp(rho^T): for w in the null space, <w|..|w> pairs J with
the PSD matrix |w><w| x rho^T at trace zero.  J is therefore parameterized
directly on the orthogonal complement of that subspace; the equality rows
then reduce to the support block of V rho V (rank^2 real equations, the rest
hold identically).  Without this reduction the primal has no interior point
and the interior-point iteration stalls near the optimum.

Approximate mode replaces the equality target by the trace-distance ball of
radius eps around V rho V: with sigma = 4 tr_{A2B2}[J (I x rho^T)] and
p = tr sigma, require sigma - p V rho V = P - Q with P, Q PSD and
tr(P + Q) <= 2 eps p.  The margin restores a full-support interior, so no
reduction is applied.  At eps = 0 this degenerates to the exact mode (and is
solved by it: the margin block would leave no interior for the solver).

All Hermitian constraints reach the real solver through hermitian_embedding.
The rho-independent constraint tensors are built once and shared read-only
across problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from types import SimpleNamespace

import numpy as np

from .channels import ChoiMatrix, apply_choi, check_ppt_operation, swap_operator
from .linops import trace_distance
from .sdpcore import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    STATUS_NUMERICAL_TROUBLE,
    STATUS_OPTIMAL,
    SdpProblem,
    SdpSolution,
    hermitian_embedding,
    solve,
)
from .states import DensityMatrix

APPLY_MATCH_TOL = 1e-6
RANK_TOL = 1e-10
PRODUCT_DET_TOL = 1e-10
FACTOR_RESIDUAL_TOL = 1e-8
SPAN_RANK_TOL = 1e-8

# Every PSD block of a feasible point of the swap problems has trace at most 2:
# the embedded Choi block and its partial transpose share one trace (partial
# transposition and face compression both preserve it), and that trace plus the
# success-complement block's equals 2 identically in the variables, so
# positivity caps each one at 2.  Frobenius norm <= trace for PSD matrices;
# 1% headroom over the bound.  Used to price infeasibility certificates in
# the projection oracle.
SWAP_CONE_RADIUS = 2.02


@dataclass(frozen=True)
class SwapResult:
    """Optimal swap probability and the channel that attains it."""

    probability: float
    choi: ChoiMatrix
    duality_gap: float
    status: str
    epsilon: float
    iterations: int


@lru_cache(maxsize=8)
def _hermitian_index_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coordinate enumeration for n x n Hermitian: diagonals, then (Re, Im) pairs."""
    ii, jj, imag = [], [], []
    for i in range(n):
        ii.append(i)
        jj.append(i)
        imag.append(False)
    for i in range(n):
        for j in range(i + 1, n):
            ii.append(i)
            jj.append(j)
            imag.append(False)
            ii.append(i)
            jj.append(j)
            imag.append(True)
    arrays = (np.array(ii), np.array(jj), np.array(imag))
    for arr in arrays:
        arr.flags.writeable = False
    return arrays


@lru_cache(maxsize=8)
def _hermitian_basis(n: int) -> np.ndarray:
    """Basis dual to the coordinate map: coords(basis[c]) = e_c."""
    ii, jj, imag = _hermitian_index_arrays(n)
    basis = np.zeros((n * n, n, n), dtype=complex)
    for c in range(n * n):
        i, j = int(ii[c]), int(jj[c])
        if i == j:
            basis[c, i, i] = 1.0
        elif not imag[c]:
            basis[c, i, j] = 1.0
            basis[c, j, i] = 1.0
        else:
            basis[c, i, j] = 1.0j
            basis[c, j, i] = -1.0j
    basis.flags.writeable = False
    return basis


def _coords(h: np.ndarray, idx: tuple[np.ndarray, np.ndarray, np.ndarray]) -> np.ndarray:
    """Real coordinates of a (batch of) Hermitian matrices under the basis above."""
    ii, jj, imag = idx
    vals = h[..., ii, jj]
    return np.where(imag, vals.imag, vals.real)


def _embed_batch(h: np.ndarray) -> np.ndarray:
    """hermitian_embedding applied along the first axis."""
    n = h.shape[-1]
    out = np.zeros(h.shape[:-2] + (2 * n, 2 * n))
    out[..., :n, :n] = h.real
    out[..., :n, n:] = -h.imag
    out[..., n:, :n] = h.imag
    out[..., n:, n:] = h.real
    return out


@lru_cache(maxsize=1)
def _tensors() -> SimpleNamespace:
    """rho-independent constraint tensors, built once and frozen."""
    idx16 = _hermitian_index_arrays(16)
    idx4 = _hermitian_index_arrays(4)
    b16 = _hermitian_basis(16)      # (256, 16, 16)
    b4 = _hermitian_basis(4)        # (16, 4, 4)

    f_j = np.zeros((257, 32, 32))
    f_j[:256] = _embed_batch(b16)

    t = b16.reshape(256, 2, 2, 2, 2, 2, 2, 2, 2)
    t = np.swapaxes(t, 1, 5)        # transpose subsystem A1
    t = np.swapaxes(t, 3, 7)        # transpose subsystem A2
    f_pt = np.zeros((257, 32, 32))
    f_pt[:256] = _embed_batch(t.reshape(256, 16, 16))

    reduced = np.einsum("coioj->cij", b16.reshape(256, 4, 4, 4, 4))
    f_tni = np.zeros((257, 8, 8))
    f_tni[:256] = -_embed_batch(reduced)
    f0_tni = hermitian_embedding(np.eye(4) / 4.0)

    # 288-variable layout for the approximate mode: [J (256), P (16), Q (16)].
    a_j = np.zeros((288, 32, 32))
    a_j[:256] = f_j[:256]
    a_pt = np.zeros((288, 32, 32))
    a_pt[:256] = f_pt[:256]
    a_tni = np.zeros((288, 8, 8))
    a_tni[:256] = f_tni[:256]
    p_blk = np.zeros((288, 8, 8))
    p_blk[256:272] = _embed_batch(b4)
    q_blk = np.zeros((288, 8, 8))
    q_blk[272:288] = _embed_batch(b4)
    trace_coord = np.zeros(16)
    trace_coord[:4] = 1.0           # diagonal coordinates carry the trace

    ns = SimpleNamespace(
        idx16=idx16, idx4=idx4, b16=b16, b4=b4,
        f_j=f_j, f_pt=f_pt, f_tni=f_tni, f0_tni=f0_tni,
        a_j=a_j, a_pt=a_pt, a_tni=a_tni, p_blk=p_blk, q_blk=q_blk,
        trace_coord=trace_coord,
        zero32=np.zeros((32, 32)), zero8=np.zeros((8, 8)), zero1=np.zeros((1, 1)),
    )
    for arr in vars(ns).values():
        if isinstance(arr, np.ndarray):
            arr.flags.writeable = False
    return ns


def _mat(rho: DensityMatrix | np.ndarray) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _equality_images(rho_m: np.ndarray) -> np.ndarray:
    """Y_c = 4 tr_{A2B2}[ B_c (I x rho^T) ] for every Hermitian basis element."""
    ts = _tensors()
    b5 = ts.b16.reshape(256, 4, 4, 4, 4)
    return 4.0 * np.einsum("caibj,ij->cab", b5, rho_m)


def _face_lift(rho_m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Isometry onto the subspace every feasible Choi matrix acts within.

    The eigenbasis u of rho induces the orthonormal basis
    {(V u_k) x conj(u_l)} of the Choi space; the pairs with u_k in the null
    space and u_l in the support span the forced annihilator (J PSD pairs
    each |w><w| x rho^T at trace zero).  Returns the complement isometry W
    (16 x m), the support columns of V rho V, their eigenvalues, and the two
    factor subspaces null(V rho V) and supp(rho^T) as column blocks.
    """
    lam, u = np.linalg.eigh(0.5 * (rho_m + rho_m.conj().T))
    keep = lam > lam[-1] * RANK_TOL
    v = swap_operator()
    left = v @ u
    right = u.conj()
    cols = [np.kron(left[:, k], right[:, l])
            for k in range(4) for l in range(4)
            if keep[k] or not keep[l]]
    w = np.stack(cols, axis=1)
    return w, left[:, keep], lam[keep], left[:, ~keep], right[:, keep]


def _product_directions(cols: np.ndarray) -> list[np.ndarray]:
    """Unit vectors of rank-1 2x2 reshape spanning the product variety of a subspace.

    dim 1 and 2 are exact (the determinant restricted to the subspace is a
    binary quadratic); dim 3 samples the determinant conic along fixed lines.
    A degenerate determinant (identically zero) means every direction is a
    product; fixed sample combinations then span the subspace through the
    later antilinear factor map.  Candidates are returned unfiltered; the
    rank-1 residual guard sits in the factor map so the face is never cut by
    a vector that is not genuinely a product.
    """
    d = cols.shape[1]
    candidates: list[np.ndarray] = []

    def _along_line(va: np.ndarray, vb: np.ndarray) -> None:
        # det(va + t vb) = c0 + c1 t + c2 t^2 restricted to the line
        c0 = np.linalg.det(va.reshape(2, 2))
        c2 = np.linalg.det(vb.reshape(2, 2))
        c1 = np.linalg.det((va + vb).reshape(2, 2)) - c0 - c2
        coeffs = np.array([c2, c1, c0])
        scale = np.abs(coeffs).max()
        if scale < PRODUCT_DET_TOL:
            candidates.extend([va, vb, va + vb, va + 1j * vb, va - vb, va - 1j * vb])
            return
        for t in np.roots(coeffs):
            candidates.append(va + t * vb)
        candidates.extend([va, vb])

    if d == 1:
        candidates.append(cols[:, 0])
    elif d == 2:
        _along_line(cols[:, 0], cols[:, 1])
    elif d == 3:
        v0, v1, v2 = cols[:, 0], cols[:, 1], cols[:, 2]
        for va, vb in [(v0, v1), (v0, v2), (v1, v2),
                       (v0 + v1, v2), (v0 + 1j * v1, v2), (v0, v1 + 1j * v2),
                       (v0 - v1, v2), (v0, v1 - 1j * v2)]:
            _along_line(va, vb)
    out = []
    for v in candidates:
        nrm = np.linalg.norm(v)
        if nrm > 1e-12:
            out.append(v / nrm)
    return out


def _conj_left_factor(v4: np.ndarray) -> np.ndarray | None:
    """conj(alpha) x beta for a product vector alpha x beta; None if not a product."""
    u, s, vh = np.linalg.svd(v4.reshape(2, 2))
    if s[1] > FACTOR_RESIDUAL_TOL * s[0]:
        return None
    return np.kron(u[:, 0].conj(), vh[0, :])


def _pt_forced_nulls(null_cols: np.ndarray, supp_cols: np.ndarray) -> np.ndarray:
    """Orthonormal basis (16 x k, possibly k = 0) that PT(J) must annihilate.

    The partial transposition over the A factors maps the diagonal value of J
    at a product vector (alpha x beta) x (gamma x delta) to the diagonal of
    PT(J) at the A-conjugated vector.  Product vectors inside the forced
    annihilator of J therefore pin PT(J), which is PSD, to the matching
    conjugated directions.
    """
    pairs = []
    left = [w for w in map(_conj_left_factor, _product_directions(null_cols)) if w is not None]
    right = [w for w in map(_conj_left_factor, _product_directions(supp_cols)) if w is not None]
    for a in left:
        for b in right:
            pairs.append(np.kron(a, b))
    if not pairs:
        return np.zeros((16, 0))
    stack = np.stack(pairs, axis=1)
    u, s, _ = np.linalg.svd(stack, full_matrices=False)
    rank = int(np.sum(s > SPAN_RANK_TOL * s[0]))
    return u[:, :rank]


def _reduced_exact_problem(rho_m: np.ndarray) -> tuple[SdpProblem, np.ndarray]:
    """Exact-swap SDP on the faces forced by a rank-deficient state.

    Two reductions restore a strictly feasible interior: J is parameterized on
    the complement of its forced annihilator, and the PT block is compressed
    onto the complement of its forced null directions (those become affine
    rows PT(J) phi = 0).  The equality system is orthonormalized so the KKT
    matrix keeps full row rank.
    """
    w, u_s, lam_s, null_cols, supp_cols = _face_lift(rho_m)
    m = w.shape[1]
    r = u_s.shape[1]
    basis = _hermitian_basis(m)
    lifted = np.einsum("pi,cij,qj->cpq", w, basis, w.conj())
    lifted = 0.5 * (lifted + lifted.conj().transpose(0, 2, 1))
    n = m * m + 1

    f_j = np.zeros((n, 2 * m, 2 * m))
    f_j[: m * m] = _embed_batch(basis)
    t = lifted.reshape(m * m, 2, 2, 2, 2, 2, 2, 2, 2)
    t = np.swapaxes(t, 1, 5)
    t = np.swapaxes(t, 3, 7)
    pt_imgs = t.reshape(m * m, 16, 16)
    f_tni = np.zeros((n, 8, 8))
    f_tni[: m * m] = -_embed_batch(np.einsum("coioj->cij", lifted.reshape(m * m, 4, 4, 4, 4)))

    y_c = 4.0 * np.einsum("caibj,ij->cab", lifted.reshape(m * m, 4, 4, 4, 4), rho_m)
    m_c = np.einsum("pi,cpq,qj->cij", u_s.conj(), y_c, u_s)
    idx_r = _hermitian_index_arrays(r)
    a_sup = np.zeros((r * r, n))
    a_sup[:, : m * m] = _coords(m_c, idx_r).T
    a_sup[:, m * m] = -_coords(np.diag(lam_s).astype(complex), idx_r)

    pt_nulls = _pt_forced_nulls(null_cols, supp_cols)
    if pt_nulls.shape[1]:
        pi = np.linalg.svd(pt_nulls, full_matrices=True)[0][:, pt_nulls.shape[1]:]
        comp = np.einsum("pi,cpq,qj->cij", pi.conj(), pt_imgs, pi)
        comp = 0.5 * (comp + comp.conj().transpose(0, 2, 1))
        dc = pi.shape[1]
        f_pt = np.zeros((n, 2 * dc, 2 * dc))
        f_pt[: m * m] = _embed_batch(comp)
        col_img = np.einsum("cpq,qk->cpk", pt_imgs, pt_nulls).reshape(m * m, -1)
        a_col = np.zeros((2 * col_img.shape[1], n))
        a_col[:, : m * m] = np.concatenate([col_img.real, col_img.imag], axis=1).T
        a_stack = np.concatenate([a_sup, a_col], axis=0)
    else:
        dc = 16
        f_pt = np.zeros((n, 32, 32))
        f_pt[: m * m] = _embed_batch(pt_imgs)
        a_stack = a_sup

    sv = np.linalg.svd(a_stack, full_matrices=False)
    rank = int(np.sum(sv[1] > 1e-10 * sv[1][0]))
    a = sv[2][:rank]
    c = np.zeros(n)
    c[m * m] = 1.0
    ts = _tensors()
    problem = SdpProblem(
        num_vars=n,
        objective=c,
        psd_blocks=[(np.zeros((2 * m, 2 * m)), f_j),
                    (np.zeros((2 * dc, 2 * dc)), f_pt),
                    (ts.f0_tni, f_tni)],
        equalities=(a, np.zeros(rank)),
    )
    return problem, w


def _exact_parts(rho_m: np.ndarray) -> tuple[SdpProblem, np.ndarray | None]:
    """(problem, face isometry or None) for the exact mode."""
    lam = np.linalg.eigvalsh(0.5 * (rho_m + rho_m.conj().T))
    if np.all(lam > lam[-1] * RANK_TOL):
        ts = _tensors()
        v = swap_operator()
        target = v @ rho_m @ v
        y_c = _equality_images(rho_m)
        a = np.zeros((16, 257))
        a[:, :256] = _coords(y_c, ts.idx4).T
        a[:, 256] = -_coords(target, ts.idx4)
        c = np.zeros(257)
        c[256] = 1.0
        problem = SdpProblem(
            num_vars=257,
            objective=c,
            psd_blocks=[(ts.zero32, ts.f_j), (ts.zero32, ts.f_pt), (ts.f0_tni, ts.f_tni)],
            equalities=(a, np.zeros(16)),
        )
        return problem, None
    return _reduced_exact_problem(rho_m)


def exact_swap_problem(rho: DensityMatrix | np.ndarray) -> SdpProblem:
    """The exact-swap SDP for one state; objective coordinate is p (the last)."""
    return _exact_parts(_mat(rho))[0]


def approx_swap_problem(rho: DensityMatrix | np.ndarray, eps: float) -> SdpProblem:
    """The margin-eps swap SDP; objective is tr sigma, linear in the J coordinates."""
    if eps <= 0.0:
        raise ValueError("approx problem needs eps > 0 (eps = 0 is the exact problem)")
    ts = _tensors()
    rho_m = _mat(rho)
    v = swap_operator()
    target = v @ rho_m @ v
    y_c = _equality_images(rho_m)
    t_c = np.real(np.trace(y_c, axis1=1, axis2=2))
    a = np.zeros((16, 288))
    diff = y_c - t_c[:, None, None] * target
    a[:, :256] = _coords(diff, ts.idx4).T
    a[:, 256:272] = -np.eye(16)
    a[:, 272:288] = np.eye(16)
    c = np.zeros(288)
    c[:256] = t_c
    margin = np.zeros((288, 1, 1))
    margin[:256, 0, 0] = 2.0 * eps * t_c
    margin[256:272, 0, 0] = -ts.trace_coord
    margin[272:288, 0, 0] = -ts.trace_coord
    return SdpProblem(
        num_vars=288,
        objective=c,
        psd_blocks=[
            (ts.zero32, ts.a_j), (ts.zero32, ts.a_pt), (ts.f0_tni, ts.a_tni),
            (ts.zero8, ts.p_blk), (ts.zero8, ts.q_blk), (ts.zero1, margin),
        ],
        equalities=(a, np.zeros(16)),
    )


def choi_from_solution(x: np.ndarray, lift: np.ndarray | None = None) -> ChoiMatrix:
    """Reassemble the Hermitian Choi matrix from the solver's J coordinates.

    With a face isometry the coordinates parameterize the reduced block and
    are conjugated back up to the full Choi space.
    """
    if lift is None:
        j = np.tensordot(x[:256], _tensors().b16, axes=1)
    else:
        m = lift.shape[1]
        j_red = np.tensordot(x[: m * m], _hermitian_basis(m), axes=1)
        j = lift @ j_red @ lift.conj().T
    return ChoiMatrix(0.5 * (j + j.conj().T))


def _wrap_result(rho_m: np.ndarray, sol: SdpSolution, eps: float,
                 lift: np.ndarray | None = None) -> SwapResult:
    raw = float(sol.objective_value)
    status = sol.status
    choi = choi_from_solution(sol.x, lift)
    if status == STATUS_OPTIMAL:
        ok = -1e-8 <= raw <= 1.0 + 1e-8
        ok = ok and all(check_ppt_operation(choi))
        v = swap_operator()
        target = v @ rho_m @ v
        out = apply_choi(choi, rho_m)
        if eps == 0.0:
            ok = ok and np.abs(out - raw * target).max() <= APPLY_MATCH_TOL
        else:
            p_safe = max(raw, 1e-9)
            ok = ok and trace_distance(out / p_safe, target) <= eps + APPLY_MATCH_TOL
        if not ok:
            status = STATUS_NUMERICAL_TROUBLE
    return SwapResult(
        probability=float(min(1.0, max(0.0, raw))),
        choi=choi,
        duality_gap=sol.duality_gap,
        status=status,
        epsilon=eps,
        iterations=sol.iterations,
    )


def exact_swap_probability(rho: DensityMatrix, tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> SwapResult:
    """Optimal probability of exchanging the two subsystems by a PPT operation.

    On an Optimal solve the returned channel is re-validated: the three
    PPT-operation checks must pass and apply_choi must reproduce
    p V rho V within 1e-6; a validation miss downgrades the status to
    NumericalTrouble rather than raising, so batch runs record it per row.
    """
    rho_m = _mat(rho)
    problem, lift = _exact_parts(rho_m)
    sol = solve(problem, tol=tol, max_iter=max_iter)
    return _wrap_result(rho_m, sol, 0.0, lift)


def approx_swap_probability(rho: DensityMatrix, eps: float, tol: float = DEFAULT_TOL,
                            max_iter: int = DEFAULT_MAX_ITER) -> SwapResult:
    """Optimal probability of reaching the trace-distance-eps ball around V rho V."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    rho_m = _mat(rho)
    if eps == 0.0:
        problem, lift = _exact_parts(rho_m)
        sol = solve(problem, tol=tol, max_iter=max_iter)
        return _wrap_result(rho_m, sol, 0.0, lift)
    sol = solve(approx_swap_problem(rho_m, eps), tol=tol, max_iter=max_iter)
    return _wrap_result(rho_m, sol, eps)


def analytic_p_xi(x: float, y: float) -> float:
    """Closed-form optimal swap probability of xi(x, y).

    1 on the parameter boundary (pure or separable); otherwise
    y/(1-y) for y <= 1/2 and (1-y)/y above, independent of x.
    """
    if not 0.0 <= x <= 1.0 or not 0.0 <= y <= 1.0:
        raise ValueError(f"(x, y) must lie in the unit square, got ({x}, {y})")
    if x == 0.0 or x == 1.0 or y == 0.0 or y == 1.0:
        return 1.0
    return y / (1.0 - y) if y <= 0.5 else (1.0 - y) / y


def lower_bound_curve(c: float) -> float:
    """Swap probability guaranteed at concurrence c: (1-sqrt(1-c^2))/(1+sqrt(1-c^2))."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"concurrence must lie in [0, 1], got {c}")
    s = np.sqrt(max(0.0, 1.0 - c * c))
    return float((1.0 - s) / (1.0 + s))


def upper_bound_curve(dp: float) -> float:
    """Swap probability ceiling at marginal-purity gap dp: (1-2dp)/(1+2dp)."""
    if not 0.0 <= dp < 0.5:
        raise ValueError(f"purity gap must lie in [0, 1/2), got {dp}")
    return float((1.0 - 2.0 * dp) / (1.0 + 2.0 * dp))
