"""Discrete realizations of smooth matrix factorizations on a grid.

Pointwise factorizations (SVD, symmetric eigendecomposition, QR) are glued
into continuous families by aligning each grid point's bases to the previous
point with an orthogonal Procrustes rotation per invariant block.  The gauge
freedom inside a block (range space, kernel, positive/negative eigenspace)
is exactly an orthogonal group, so the alignment never violates the defining
block relations; it only removes arbitrary per-point rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matfun as mf
from .errors import (
    ConditioningError,
    IllPosedRankError,
    InertiaChangeError,
    RankDropError,
    StructureError,
)

DEFAULT_GAP_TOL = 1e-8


@dataclass(frozen=True)
class RankSplit:
    """U^T F V = [[Sigma, 0], [0, 0]] with pointwise orthogonal U, V."""

    U: mf.MatrixFunction
    V: mf.MatrixFunction
    Sigma: mf.MatrixFunction
    r: int
    grid: mf.TimeGrid


@dataclass(frozen=True)
class SymRankSplit:
    """Q^T E Q = [[Sigma, 0], [0, 0]] with a single orthogonal Q."""

    Q: mf.MatrixFunction
    Sigma: mf.MatrixFunction
    r: int
    grid: mf.TimeGrid


@dataclass(frozen=True)
class InertiaSplit:
    """W^T D W = diag(I_p, -I_q) with pointwise nonsingular W."""

    W: mf.MatrixFunction
    p: int
    q: int
    grid: mf.TimeGrid


@dataclass(frozen=True)
class RowRankNormalization:
    """U^T B = [B1; 0] with orthogonal U and square nonsingular B1."""

    U: mf.MatrixFunction
    B1: mf.MatrixFunction
    grid: mf.TimeGrid


def procrustes_align(block, ref):
    """Orthogonal G minimizing ||block @ G - ref||_F; returns block @ G."""
    if block.shape[1] == 0:
        return block
    u, _, vt = np.linalg.svd(block.T @ ref)
    return block @ (u @ vt)


def _numerical_rank(s, gap_tol):
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return 0
    thresh = gap_tol * smax
    r = int(np.sum(s > thresh))
    if 0 < r < s.size:
        # require an actual gap around the threshold, not a near-tie
        if s[r - 1] < 10.0 * max(s[r], thresh / 10.0) and s[r] > thresh / 10.0:
            raise IllPosedRankError(
                f"singular values {s[r - 1]:.3e} and {s[r]:.3e} do not separate "
                f"cleanly at gap tolerance {gap_tol:.1e}"
            )
    return r


def rank_split(F, grid, gap_tol=DEFAULT_GAP_TOL):
    """Constant-rank orthogonal splitting of F(t) with continuity alignment."""
    vals = F.eval_on(grid)
    K, m, n = vals.shape
    Us = np.empty((K, m, m))
    Vs = np.empty((K, n, n))
    r = None
    prevU = prevV = None
    for k in range(K):
        u, s, vt = np.linalg.svd(vals[k])
        rk = _numerical_rank(s, gap_tol)
        if r is None:
            r = rk
        elif rk != r:
            raise RankDropError(
                f"rank changed from {r} at t={grid.points[k - 1]} "
                f"to {rk} at t={grid.points[k]}",
                t_first=float(grid.points[k - 1]),
                t_second=float(grid.points[k]),
            )
        v = vt.T
        if prevU is not None:
            u = np.hstack([
                procrustes_align(u[:, :r], prevU[:, :r]),
                procrustes_align(u[:, r:], prevU[:, r:]),
            ])
            v = np.hstack([
                procrustes_align(v[:, :r], prevV[:, :r]),
                procrustes_align(v[:, r:], prevV[:, r:]),
            ])
        Us[k], Vs[k] = u, v
        prevU, prevV = u, v
    Sig = Us[:, :, :r].transpose(0, 2, 1) @ vals @ Vs[:, :, :r]
    return RankSplit(
        mf.SampledMatrixFunction(grid, Us, order=3),
        mf.SampledMatrixFunction(grid, Vs, order=3),
        mf.SampledMatrixFunction(grid, Sig, order=3),
        int(r),
        grid,
    )


def _kernel_defect(Ev, r):
    """Largest principal-angle sine between ker(E) and ker(E^T)."""
    if r == Ev.shape[1]:
        return 0.0
    u, _, vt = np.linalg.svd(Ev)
    right = vt.T[:, r:]
    left = u[:, r:]
    # 2-norm distance of the two orthogonal projectors
    return float(np.linalg.norm(right @ right.T - left @ left.T, 2))


def sym_rank_split(E, grid, gap_tol=DEFAULT_GAP_TOL, kernel_tol=1e-8):
    """One-sided splitting for E with ker E^T = ker E (holds for E = +-E^T)."""
    if E.rows != E.cols:
        raise StructureError("sym_rank_split needs a square matrix function")
    vals = E.eval_on(grid)
    K, n, _ = vals.shape
    Qs = np.empty((K, n, n))
    r = None
    prevQ = None
    for k in range(K):
        u, s, vt = np.linalg.svd(vals[k])
        rk = _numerical_rank(s, gap_tol)
        if r is None:
            r = rk
        elif rk != r:
            raise RankDropError(
                f"rank changed from {r} to {rk} at t={grid.points[k]}",
                t_first=float(grid.points[k - 1]),
                t_second=float(grid.points[k]),
            )
        defect = _kernel_defect(vals[k], rk)
        if defect > kernel_tol:
            raise StructureError(
                f"kernel condition ker(E^T) = ker(E) fails at t={grid.points[k]} "
                f"(projector distance {defect:.3e})"
            )
        q = np.hstack([vt.T[:, :rk], vt.T[:, rk:]])
        if prevQ is not None:
            q = np.hstack([
                procrustes_align(q[:, :r], prevQ[:, :r]),
                procrustes_align(q[:, r:], prevQ[:, r:]),
            ])
        Qs[k] = q
        prevQ = q
    Sig = Qs[:, :, :r].transpose(0, 2, 1) @ vals @ Qs[:, :, :r]
    return SymRankSplit(
        mf.SampledMatrixFunction(grid, Qs, order=3),
        mf.SampledMatrixFunction(grid, Sig, order=3),
        int(r),
        grid,
    )


def smooth_inertia(D, grid, sym_tol=1e-12, near_zero_rel=1e-12):
    """Congruence W(t) with W^T D W = diag(I_p, -I_q), constant signature."""
    vals = D.eval_on(grid)
    K, n, _ = vals.shape
    Ws = np.empty((K, n, n))
    p = q = None
    prevW = None
    prev_t = None
    for k, t in enumerate(grid.points):
        Dk = vals[k]
        scale = max(1.0, float(np.linalg.norm(Dk)))
        if np.linalg.norm(Dk - Dk.T) > sym_tol * scale:
            raise StructureError(f"matrix is not symmetric at t={t}")
        lam, vec = np.linalg.eigh(0.5 * (Dk + Dk.T))
        if np.min(np.abs(lam)) <= near_zero_rel * np.max(np.abs(lam)):
            raise ConditioningError(
                f"eigenvalue too close to zero at t={t}; inertia is ill-posed"
            )
        pk = int(np.sum(lam > 0))
        qk = n - pk
        if p is None:
            p, q = pk, qk
        elif (pk, qk) != (p, q):
            raise InertiaChangeError(
                f"inertia changed from ({p}, {q}) at t={prev_t} to ({pk}, {qk}) at t={t}"
            )
        # eigh sorts ascending: negatives first; reorder positives first and
        # scale so the congruence lands exactly on diag(I_p, -I_q)
        pos = vec[:, qk:] / np.sqrt(lam[qk:])
        neg = vec[:, :qk][:, ::-1] / np.sqrt(-lam[:qk][::-1])
        W = np.hstack([pos, neg])
        if prevW is not None:
            # the residual gauge group of each sign block is orthogonal, so a
            # block Procrustes alignment preserves W^T D W exactly
            W = np.hstack([
                procrustes_align(W[:, :p], prevW[:, :p]),
                procrustes_align(W[:, p:], prevW[:, p:]),
            ])
        Ws[k] = W
        prevW = W
        prev_t = t
    return InertiaSplit(
        mf.SampledMatrixFunction(grid, Ws, order=3), int(p), int(q), grid
    )


def row_rank_normalize(B, grid, gap_tol=DEFAULT_GAP_TOL):
    """Orthogonal U with U^T B = [B1; 0], B1 square nonsingular."""
    vals = B.eval_on(grid)
    K, m, n = vals.shape
    if m < n:
        raise StructureError("full column rank needs at least as many rows as columns")
    Us = np.empty((K, m, m))
    B1s = np.empty((K, n, n))
    prevU = None
    for k, t in enumerate(grid.points):
        u, s, vt = np.linalg.svd(vals[k])
        rk = _numerical_rank(s, gap_tol)
        if rk < n:
            raise RankDropError(
                f"column-rank deficiency at t={t} (rank {rk} < {n})",
                t_first=float(t),
            )
        if prevU is not None:
            u = np.hstack([
                procrustes_align(u[:, :n], prevU[:, :n]),
                procrustes_align(u[:, n:], prevU[:, n:]),
            ])
        Us[k] = u
        B1s[k] = u[:, :n].T @ vals[k]
        prevU = u
    return RowRankNormalization(
        mf.SampledMatrixFunction(grid, Us, order=3),
        mf.SampledMatrixFunction(grid, B1s, order=3),
        grid,
    )


def max_jump(values):
    """Largest Frobenius jump between consecutive sample matrices."""
    return float(np.linalg.norm(np.diff(values, axis=0), axis=(1, 2)).max())


# ---------------------------------------------------------------------------
# smooth kernel frame with consistent derivative samples
# ---------------------------------------------------------------------------

def smooth_kernel_frame(B, grid, rel_tol=1e-10):
    """Orthonormal N(t) spanning ker B(t) with derivative samples.

    B must have full row rank pointwise; N is propagated along the grid by
    the minimal-rotation law  Ndot = -B^+ Bdot N  (classic RK4 with an exact
    re-projection onto the kernel after every step), which keeps the frame
    orthonormal and gives derivative samples consistent with the values to
    the integrator's accuracy.

    Returns (N_values, Ndot_values) of shape (len(grid), n, n - p).
    """
    p, n = B.rows, B.cols
    a = n - p
    K = grid.n

    def pinv(Bv):
        BBt = Bv @ Bv.T
        c = np.linalg.cond(BBt) if p else 1.0
        if p and c > 1e14:
            raise ConditioningError("row-rank-deficient matrix in kernel continuation")
        return Bv.T @ np.linalg.solve(BBt, np.eye(p)) if p else np.zeros((n, 0))

    def project(Bv, N):
        if p:
            N = N - pinv(Bv) @ (Bv @ N)
        qn, rn = np.linalg.qr(N)
        return qn * np.sign(np.diag(rn))

    Ns = np.empty((K, n, a))
    Nds = np.empty((K, n, a))
    if a == 0:
        return Ns, Nds

    B0 = B.eval(grid.points[0])
    _, _, vt = np.linalg.svd(B0) if p else (None, None, np.eye(n))
    N = vt.T[:, p:] if p else np.eye(n)

    def rhs(t, N):
        Bt = B.eval(t)
        Bd = B.derivative(t)
        return -pinv(Bt) @ (Bd @ N) if p else np.zeros_like(N)

    for k, t in enumerate(grid.points):
        Bt = B.eval(t)
        N = project(Bt, N)
        if k > 0:
            N = procrustes_align(N, Ns[k - 1])
        Ns[k] = N
        Nds[k] = rhs(t, N)
        if k + 1 < K:
            h = grid.points[k + 1] - t
            k1 = rhs(t, N)
            k2 = rhs(t + 0.5 * h, N + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, N + 0.5 * h * k2)
            k4 = rhs(t + h, N + h * k3)
            N = N + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Ns, Nds
