"""Global canonical forms under congruence, built constructively.

For an exactly structured pair with a known basis Phi of the homogeneous
solution space, the construction runs the staged congruence pipeline

  self-adjoint:  [Phi completion] -> [skew pairing of the constant E11]
                 -> [row normalization of (E12, E13)] -> [decoupling]
  skew-adjoint:  [Phi completion] -> [inertia normalization of E11]
                 -> [algebraic decoupling]

re-verifying the structural invariants after every stage.  All stages work
on grid samples carrying exact derivative values, so the verification
residuals are limited by roundoff (plus the kernel-frame continuation
error) rather than by interpolation.

Local canonical forms are verified only, never constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import matfun as mf
from . import structure as st
from .errors import (
    BasisDeficiencyError,
    ParityError,
    RegularityError,
    StageError,
    StructureError,
    UnsupportedError,
)
from .factor import smooth_kernel_frame

RANK_FLOOR = 1e-10


def _bT(x):
    return np.transpose(x, (0, 2, 1))


def _maxnorm(x):
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, axis=(1, 2)).max())


@dataclass
class ResidualRecord:
    """Named residuals plus minimum relative singular values of blocks
    required to be pointwise nonsingular."""

    entries: dict
    conditioning: dict = field(default_factory=dict)
    tol: float = 1e-8

    @property
    def worst(self):
        return max(self.entries.values()) if self.entries else 0.0

    def passes(self, tol=None, rank_floor=RANK_FLOOR):
        tol = self.tol if tol is None else tol
        ok = all(v <= tol for v in self.entries.values())
        return ok and all(v >= rank_floor for v in self.conditioning.values())


@dataclass
class SolutionBasis:
    """Basis Phi of the homogeneous solution space, with derivative.

    ``complement`` optionally holds a pointwise orthonormal basis of the
    orthogonal complement of range(Phi); when present the canonical-form
    pipelines use it instead of rebuilding one numerically.
    """

    Phi: mf.MatrixFunction
    Phidot: mf.MatrixFunction
    d: int
    complement: mf.MatrixFunction | None = None


@dataclass
class SelfAdjointGlobalForm:
    p: int
    E33: mf.MatrixFunction
    A22: mf.MatrixFunction
    A23: mf.MatrixFunction
    A32: mf.MatrixFunction
    A33: mf.MatrixFunction
    Q: st.CongruenceTransform
    grid: mf.TimeGrid
    n: int
    pair_transformed: mf.MatrixPair | None = None
    stage_residuals: list = field(default_factory=list)

    @property
    def algebraic_dim(self):
        return self.n - 2 * self.p


@dataclass
class SkewAdjointGlobalForm:
    p: int
    q: int
    E33: mf.MatrixFunction
    A33: mf.MatrixFunction
    Q: st.CongruenceTransform
    grid: mf.TimeGrid
    n: int
    pair_transformed: mf.MatrixPair | None = None
    stage_residuals: list = field(default_factory=list)

    @property
    def algebraic_dim(self):
        return self.n - self.p - self.q


# ---------------------------------------------------------------------------
# solution basis for constant pairs
# ---------------------------------------------------------------------------

_SHIFT_CANDIDATES = (0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 3.14159, -2.71828)


def solution_basis_constant(pair, grid, rank_tol=1e-8):
    """Basis of the solution space of E xdot = A x for constant (E, A).

    Uses the shifted pencil: with Ehat = (l0 E - A)^{-1} E, the invariant
    subspace of Ehat for its nonzero eigenvalues carries the finite
    dynamics; solutions are matrix exponentials on that subspace.
    """
    if not (
        isinstance(pair.E, mf.ConstantMatrixFunction)
        and isinstance(pair.A, mf.ConstantMatrixFunction)
    ):
        raise UnsupportedError("solution_basis_constant needs a constant pair")
    E, A = pair.E.value, pair.A.value
    n = pair.n
    scale = max(1.0, np.linalg.norm(E), np.linalg.norm(A))

    best = None
    for lam0 in _SHIFT_CANDIDATES:
        P = lam0 * E - A
        s = np.linalg.svd(P, compute_uv=False)
        smin = s[-1] / max(s[0], 1e-300)
        if best is None or smin > best[1]:
            best = (lam0, smin, P)
    lam0, smin, P = best
    if smin <= 1e-12:
        raise RegularityError(
            "pencil appears irregular: lambda*E - A is singular at every probe shift"
        )
    Ehat = np.linalg.solve(P, E)

    mags = np.abs(np.linalg.eigvals(Ehat))
    thr = max(rank_tol * mags.max(initial=0.0), 1e-14 * (1.0 + np.linalg.norm(Ehat)))
    T, Z, sdim = sla.schur(Ehat, output="real", sort=lambda re, im: re * re + im * im > thr * thr)
    d = int(sdim)

    t0 = grid.points[0]
    if d == 0:
        phi = mf.SampledMatrixFunction(grid, np.zeros((grid.n, n, 0)), order=3,
                                       deriv_values=np.zeros((grid.n, n, 0)))
        return SolutionBasis(phi, phi, 0, complement=mf.constant(Z))

    Z1 = Z[:, :d]
    B11 = T[:d, :d]
    M = lam0 * np.eye(d) - np.linalg.solve(B11, np.eye(d))

    K = grid.n
    phiv = np.empty((K, n, d))
    phid = np.empty((K, n, d))
    phidd = np.empty((K, n, d))
    for k, t in enumerate(grid.points):
        ex = sla.expm((t - t0) * M)
        phiv[k] = Z1 @ ex
        phid[k] = phiv[k] @ M
        phidd[k] = phid[k] @ M
    res = _maxnorm(E[None] @ phid - A[None] @ phiv)
    if res > 1e-8 * scale:
        raise StageError(
            f"solution basis failed its residual test ({res:.3e})", stage="solution basis"
        )
    Phi = mf.SampledMatrixFunction(grid, phiv, order=3, deriv_values=phid)
    Phidot = mf.SampledMatrixFunction(grid, phid, order=3, deriv_values=phidd)
    return SolutionBasis(Phi, Phidot, d, complement=mf.constant(Z[:, d:]))


def brute_force_dimension(pair):
    """Independent count of finite pencil eigenvalues via the QZ form."""
    if not (
        isinstance(pair.E, mf.ConstantMatrixFunction)
        and isinstance(pair.A, mf.ConstantMatrixFunction)
    ):
        raise UnsupportedError("dimension oracle needs a constant pair")
    _, _, alpha, beta, *_ = sla.ordqz(pair.A.value, pair.E.value, sort="lhp")
    scale = 1.0 + np.abs(alpha).max(initial=0.0)
    return int(np.sum(np.abs(beta) > 1e-10 * scale))


# ---------------------------------------------------------------------------
# staged pipeline machinery (value/derivative arrays on the grid)
# ---------------------------------------------------------------------------

def _congruence_arrays(Ev, Ed, Av, Qv, Qd):
    QT, QdT = _bT(Qv), _bT(Qd)
    E2 = QT @ Ev @ Qv
    E2d = QdT @ Ev @ Qv + QT @ Ed @ Qv + QT @ Ev @ Qd
    A2 = QT @ Av @ Qv - QT @ Ev @ Qd
    return E2, E2d, A2


def _structure_residual_arrays(kind, Ev, Ed, Av):
    if kind == st.SELF_ADJOINT:
        return max(_maxnorm(Ev + _bT(Ev)), _maxnorm(_bT(Av) - Av - Ed))
    return max(_maxnorm(Ev - _bT(Ev)), _maxnorm(_bT(Av) + Av + Ed))


class _Pipeline:
    def __init__(self, pair, grid, kind, stage_tol):
        pair.check_grid(grid)
        self.grid = grid
        self.kind = kind
        self.K = grid.n
        self.n = pair.n
        self.Ev = pair.E.eval_on(grid)
        self.Ed = pair.E.derivative_on(grid)
        self.Av = pair.A.eval_on(grid)
        self.Qv = np.broadcast_to(np.eye(self.n), (self.K, self.n, self.n)).copy()
        self.Qd = np.zeros((self.K, self.n, self.n))
        self.scale = 1.0 + max(_maxnorm(self.Ev), _maxnorm(self.Av))
        self.stage_tol = stage_tol
        self.stage_residuals = []

    def apply(self, name, Qv, Qd=None):
        if Qd is None:
            Qd = np.zeros_like(Qv)
        if Qv.ndim == 2:
            Qv = np.broadcast_to(Qv, (self.K, self.n, self.n)).copy()
            Qd = np.broadcast_to(Qd, (self.K, self.n, self.n)).copy()
        self.Ev, self.Ed, self.Av = _congruence_arrays(self.Ev, self.Ed, self.Av, Qv, Qd)
        self.Qd = self.Qd @ Qv + self.Qv @ Qd
        self.Qv = self.Qv @ Qv
        res = _structure_residual_arrays(self.kind, self.Ev, self.Ed, self.Av) / self.scale
        self.stage_residuals.append((name, float(res)))
        if res > self.stage_tol:
            raise StageError(
                f"structure lost after stage '{name}' (residual {res:.3e})", stage=name
            )

    def require(self, name, defect):
        defect = float(defect) / self.scale
        self.stage_residuals.append((name, defect))
        if defect > self.stage_tol:
            raise StageError(f"check '{name}' failed (defect {defect:.3e})", stage=name)

    def transform(self):
        Q = mf.SampledMatrixFunction(self.grid, self.Qv, order=3, deriv_values=self.Qd)
        Qdot = mf.SampledMatrixFunction(self.grid, self.Qd, order=3)
        return st.CongruenceTransform(Q, Qdot)

    def block(self, rows, cols):
        vals = self.Ev[:, rows[0] : rows[1], cols[0] : cols[1]]
        ders = self.Ed[:, rows[0] : rows[1], cols[0] : cols[1]]
        return mf.SampledMatrixFunction(self.grid, vals.copy(), order=3,
                                        deriv_values=ders.copy())

    def a_block(self, rows, cols):
        vals = self.Av[:, rows[0] : rows[1], cols[0] : cols[1]]
        return mf.SampledMatrixFunction(self.grid, vals.copy(), order=3)

    def pair_mf(self, interval):
        E = mf.SampledMatrixFunction(self.grid, self.Ev.copy(), order=3,
                                     deriv_values=self.Ed.copy())
        A = mf.SampledMatrixFunction(self.grid, self.Av.copy(), order=3)
        return mf.MatrixPair(E, A, interval)


def _completion_arrays(basis, grid):
    """Pointwise orthonormal completion of range(Phi), with derivatives."""
    if basis.complement is not None:
        return basis.complement.eval_on(grid), basis.complement.derivative_on(grid)
    phi_t = mf.mf_transpose(basis.Phi)
    return smooth_kernel_frame(phi_t, grid)


def _basis_congruence(pipe, basis):
    grid = pipe.grid
    d = basis.d
    phiv = basis.Phi.eval_on(grid)
    phid = basis.Phidot.eval_on(grid)
    if d:
        sv = np.linalg.svd(phiv, compute_uv=False)
        if np.any(sv[:, -1] <= RANK_FLOOR * np.maximum(sv[:, 0], 1e-300)):
            raise BasisDeficiencyError("Phi loses rank on the grid")
    resid = _maxnorm(pipe.Ev @ phid - pipe.Av @ phiv)
    if resid > 1e-8 * pipe.scale:
        raise BasisDeficiencyError(
            f"Phi does not solve the homogeneous DAE (residual {resid:.3e})"
        )
    compv, compd = _completion_arrays(basis, grid)
    Qv = np.concatenate([phiv, compv], axis=2)
    Qd = np.concatenate([phid, compd], axis=2)
    pipe.apply("solution-basis congruence", Qv, Qd)
    # first block column of A must vanish since E Phidot = A Phi
    pipe.require("A first-block-column zero", _maxnorm(pipe.Av[:, :, :d]))
    E11 = pipe.Ev[:, :d, :d]
    pipe.require("E11 constant", _maxnorm(E11 - E11[0]))
    return E11[0].copy()


def _skew_pairing_transform(E11c, p, scale, rel_tol=1e-8):
    """Orthogonal U with U^T E11 U having a vanishing leading p x p block.

    Real Schur form of the constant skew-symmetric E11 pairs the nonzero
    eigenvalues into 2x2 blocks; sending each block's first vector to the
    leading half and its second to the trailing half produces the layout.
    """
    d = E11c.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    T, Z = sla.schur(E11c, output="real")
    tol = rel_tol * scale
    firsts, seconds, zeros = [], [], []
    i = 0
    while i < d:
        if i + 1 < d and abs(T[i + 1, i]) > tol:
            firsts.append(i)
            seconds.append(i + 1)
            i += 2
        else:
            zeros.append(i)
            i += 1
    half = (d - 2 * len(firsts)) // 2
    order = firsts + zeros[:half] + seconds + zeros[half:]
    return Z[:, order]


def _check_algebraic_block_static(Ev33, Av33, scale, where):
    """Uniquely solvable algebraic part must carry no finite dynamics.

    Checked via a pencil eigenvalue count when the blocks are constant in
    time (the only case where the count is cheaply available); a positive
    count means the supplied basis missed part of the solution space.
    """
    if Ev33.shape[1] == 0:
        return
    if (
        _maxnorm(Ev33 - Ev33[0]) > 1e-8 * scale
        or _maxnorm(Av33 - Av33[0]) > 1e-8 * scale
    ):
        return
    _, _, alpha, beta, *_ = sla.ordqz(Av33[0], Ev33[0], sort="lhp")
    finite = int(np.sum(np.abs(beta) > 1e-10 * (1.0 + np.abs(alpha).max(initial=0.0))))
    if finite > 0:
        raise BasisDeficiencyError(
            f"algebraic part of the {where} canonical form still carries "
            f"{finite} dynamic degrees of freedom; the basis does not span "
            "the full solution space"
        )


def global_canonical_self(pair, basis, grid, tol=1e-10, stage_tol=1e-8):
    """Constructive congruence to the self-adjoint global canonical layout

        E = [[0, I_p, 0], [-I_p, 0, 0], [0, 0, E33]],
        A = [[0, 0, 0], [0, A22, A23], [0, A32, A33]].
    """
    rep = st.self_adjoint_residual(pair, grid)
    scale = 1.0 + max(
        _maxnorm(pair.E.eval_on(grid)), _maxnorm(pair.A.eval_on(grid))
    )
    if rep.max_residual > tol * scale:
        raise StructureError(
            f"pair is not self-adjoint (residual {rep.max_residual:.3e})"
        )
    d, n = basis.d, pair.n
    if d % 2:
        raise ParityError(f"solution space dimension {d} is odd for a self-adjoint pair")
    p = d // 2
    a = n - d
    pipe = _Pipeline(pair, grid, st.SELF_ADJOINT, stage_tol)
    E11c = _basis_congruence(pipe, basis)

    if d:
        Ub = _skew_pairing_transform(E11c, p, pipe.scale)
        pipe.require(
            "leading block of paired E11 zero", _maxnorm((Ub.T @ E11c @ Ub)[None, :p, :p])
        )
        Q2 = sla.block_diag(Ub, np.eye(a))
        pipe.apply("skew pairing", Q2)

        # normalize [E12 E13] V = [I_p 0]
        Bv = pipe.Ev[:, :p, p:].copy()
        Bd = pipe.Ed[:, :p, p:].copy()
        sv = np.linalg.svd(Bv, compute_uv=False)
        if np.any(sv[:, -1] <= RANK_FLOOR * np.maximum(sv[:, 0], 1e-300)):
            raise StageError("[E12 E13] loses row rank on the grid", stage="row normalization")
        BBt = Bv @ _bT(Bv)
        Binv = np.linalg.solve(BBt, np.eye(p)[None].repeat(pipe.K, axis=0))
        V1 = _bT(Bv) @ Binv
        dBBt = Bd @ _bT(Bv) + Bv @ _bT(Bd)
        V1d = _bT(Bd) @ Binv - _bT(Bv) @ Binv @ dBBt @ Binv
        if a:
            Bmf = mf.SampledMatrixFunction(grid, Bv, order=3, deriv_values=Bd)
            Nv, Nd = smooth_kernel_frame(Bmf, grid)
            Vv = np.concatenate([V1, Nv], axis=2)
            Vd = np.concatenate([V1d, Nd], axis=2)
        else:
            Vv, Vd = V1, V1d
        Q3 = np.zeros((pipe.K, n, n))
        Q3d = np.zeros((pipe.K, n, n))
        Q3[:, :p, :p] = np.eye(p)
        Q3[:, p:, p:] = Vv
        Q3d[:, p:, p:] = Vd
        pipe.apply("row normalization", Q3, Q3d)
        pipe.require(
            "normalized leading row",
            _maxnorm(pipe.Ev[:, :p, p:d] - np.eye(p)) + _maxnorm(pipe.Ev[:, :p, d:]),
        )

        # decouple: congruence by [[I, E22/2, E23], [0, I, 0], [0, 0, I]]
        E22 = pipe.Ev[:, p:d, p:d]
        pipe.require("E22 constant", _maxnorm(E22 - E22[0]))
        Q4 = np.broadcast_to(np.eye(n), (pipe.K, n, n)).copy()
        Q4d = np.zeros((pipe.K, n, n))
        Q4[:, :p, p:d] = 0.5 * E22
        Q4[:, :p, d:] = pipe.Ev[:, p:d, d:]
        Q4d[:, :p, p:d] = 0.5 * pipe.Ed[:, p:d, p:d]
        Q4d[:, :p, d:] = pipe.Ed[:, p:d, d:]
        pipe.apply("decoupling", Q4, Q4d)

    Jp = np.zeros((d, d))
    Jp[:p, p:] = np.eye(p)
    Jp[p:, :p] = -np.eye(p)
    pipe.require("canonical leading E block", _maxnorm(pipe.Ev[:, :d, :d] - Jp))
    pipe.require(
        "canonical zero pattern",
        _maxnorm(pipe.Ev[:, :d, d:]) + _maxnorm(pipe.Ev[:, d:, :d])
        + _maxnorm(pipe.Av[:, :p, :]) + _maxnorm(pipe.Av[:, :, :p]),
    )
    _check_algebraic_block_static(
        pipe.Ev[:, d:, d:], pipe.Av[:, d:, d:], pipe.scale, "self-adjoint"
    )

    form = SelfAdjointGlobalForm(
        p=p,
        E33=pipe.block((d, n), (d, n)),
        A22=pipe.a_block((p, d), (p, d)),
        A23=pipe.a_block((p, d), (d, n)),
        A32=pipe.a_block((d, n), (p, d)),
        A33=pipe.a_block((d, n), (d, n)),
        Q=pipe.transform(),
        grid=grid,
        n=n,
        pair_transformed=pipe.pair_mf(pair.interval),
        stage_residuals=pipe.stage_residuals,
    )
    return form


def global_canonical_skew(pair, basis, grid, tol=1e-10, stage_tol=1e-8, rank_tol=1e-8):
    """Constructive congruence to the skew-adjoint global canonical layout

        E = diag(I_p, -I_q, E33),   A = diag(0, 0, A33).
    """
    rep = st.skew_adjoint_residual(pair, grid)
    scale = 1.0 + max(
        _maxnorm(pair.E.eval_on(grid)), _maxnorm(pair.A.eval_on(grid))
    )
    if rep.max_residual > tol * scale:
        raise StructureError(
            f"pair is not skew-adjoint (residual {rep.max_residual:.3e})"
        )
    d, n = basis.d, pair.n
    a = n - d
    pipe = _Pipeline(pair, grid, st.SKEW_ADJOINT, stage_tol)
    E11c = _basis_congruence(pipe, basis)

    p = q = 0
    if d:
        E11c = 0.5 * (E11c + E11c.T)
        lam, vec = np.linalg.eigh(E11c)
        near_zero = np.abs(lam) <= rank_tol * pipe.scale
        if np.any(near_zero):
            # the dimension argument of the global form forces a nonsingular
            # E11; a kernel here means Phi missed part of the solution space
            raise BasisDeficiencyError(
                f"E11 = Phi^T E Phi is singular ({int(near_zero.sum())} near-zero "
                "eigenvalues); the basis does not span the full solution space"
            )
        p = int(np.sum(lam > 0))
        q = d - p
        pos = vec[:, lam > 0] / np.sqrt(lam[lam > 0])
        neg = vec[:, lam < 0][:, ::-1] / np.sqrt(-lam[lam < 0][::-1])
        Usyl = np.hstack([pos, neg])
        Q2 = sla.block_diag(Usyl, np.eye(a))
        pipe.apply("inertia normalization", Q2)
        S = np.diag(np.concatenate([np.ones(p), -np.ones(q)]))
        pipe.require("leading signature block", _maxnorm(pipe.Ev[:, :d, :d] - S))

        if a:
            E13 = pipe.Ev[:, :d, d:]
            E13d = pipe.Ed[:, :d, d:]
            Q3 = np.broadcast_to(np.eye(n), (pipe.K, n, n)).copy()
            Q3d = np.zeros((pipe.K, n, n))
            Q3[:, :d, d:] = -S[None] @ E13
            Q3d[:, :d, d:] = -S[None] @ E13d
            pipe.apply("algebraic decoupling", Q3, Q3d)

    S = np.diag(np.concatenate([np.ones(p), -np.ones(q)]))
    pipe.require("canonical leading E block", _maxnorm(pipe.Ev[:, :d, :d] - S))
    pipe.require(
        "canonical zero pattern",
        _maxnorm(pipe.Ev[:, :d, d:]) + _maxnorm(pipe.Ev[:, d:, :d])
        + _maxnorm(pipe.Av[:, :d, :]) + _maxnorm(pipe.Av[:, :, :d]),
    )
    _check_algebraic_block_static(
        pipe.Ev[:, d:, d:], pipe.Av[:, d:, d:], pipe.scale, "skew-adjoint"
    )

    form = SkewAdjointGlobalForm(
        p=p,
        q=q,
        E33=pipe.block((d, n), (d, n)),
        A33=pipe.a_block((d, n), (d, n)),
        Q=pipe.transform(),
        grid=grid,
        n=n,
        pair_transformed=pipe.pair_mf(pair.interval),
        stage_residuals=pipe.stage_residuals,
    )
    return form


# ---------------------------------------------------------------------------
# verifiers
# ---------------------------------------------------------------------------

def _min_rel_sv(vals):
    if vals.shape[1] == 0 or vals.shape[2] == 0:
        return 1.0
    s = np.linalg.svd(vals, compute_uv=False)
    return float((s[:, -1] / np.maximum(s[:, 0], 1e-300)).min())


def verify_self_global_form(form, grid, tol=1e-8):
    """Residuals of the four block relations of the self-adjoint layout plus
    the zero-pattern defects of the assembled pair (reports, never raises)."""
    E33 = form.E33.eval_on(grid)
    E33d = form.E33.derivative_on(grid)
    A22 = form.A22.eval_on(grid)
    A23 = form.A23.eval_on(grid)
    A32 = form.A32.eval_on(grid)
    A33 = form.A33.eval_on(grid)
    entries = {
        "E33_skew": _maxnorm(E33 + _bT(E33)),
        "A22_symmetric": _maxnorm(A22 - _bT(A22)),
        "A32_transpose_A23": _maxnorm(_bT(A32) - A23),
        "A33_self_adjoint": _maxnorm(_bT(A33) - A33 - E33d),
    }
    entries.update(_pattern_defects_self(form, grid))
    return ResidualRecord(entries, tol=tol)


def _pattern_defects_self(form, grid):
    if form.pair_transformed is None:
        return {"E_pattern": 0.0, "A_pattern": 0.0}
    p, n = form.p, form.n
    d = 2 * p
    Ev = form.pair_transformed.E.eval_on(grid)
    Av = form.pair_transformed.A.eval_on(grid)
    Jp = np.zeros((d, d))
    Jp[:p, p:] = np.eye(p)
    Jp[p:, :p] = -np.eye(p)
    e_def = (
        _maxnorm(Ev[:, :d, :d] - Jp)
        + _maxnorm(Ev[:, :d, d:])
        + _maxnorm(Ev[:, d:, :d])
    )
    a_def = _maxnorm(Av[:, :p, :]) + _maxnorm(Av[:, :, :p])
    return {"E_pattern": e_def, "A_pattern": a_def}


def verify_skew_global_form(form, grid, tol=1e-8):
    """Residuals of the block relations of the skew-adjoint layout plus the
    zero-pattern defects (reports, never raises)."""
    E33 = form.E33.eval_on(grid)
    E33d = form.E33.derivative_on(grid)
    A33 = form.A33.eval_on(grid)
    entries = {
        "E33_symmetric": _maxnorm(E33 - _bT(E33)),
        "A33_skew_adjoint": _maxnorm(_bT(A33) + A33 + E33d),
    }
    if form.pair_transformed is not None:
        p, q, n = form.p, form.q, form.n
        d = p + q
        Ev = form.pair_transformed.E.eval_on(grid)
        Av = form.pair_transformed.A.eval_on(grid)
        S = np.diag(np.concatenate([np.ones(p), -np.ones(q)]))
        entries["E_pattern"] = (
            _maxnorm(Ev[:, :d, :d] - S)
            + _maxnorm(Ev[:, :d, d:])
            + _maxnorm(Ev[:, d:, :d])
        )
        entries["A_pattern"] = _maxnorm(Av[:, :d, :]) + _maxnorm(Av[:, :, :d])
    else:
        entries["E_pattern"] = 0.0
        entries["A_pattern"] = 0.0
    return ResidualRecord(entries, tol=tol)


# ---------------------------------------------------------------------------
# local canonical forms: verification only
# ---------------------------------------------------------------------------

SELF_ORTHOGONAL = "self_orthogonal"
SELF_REFINED = "self_refined"
SKEW_ORTHOGONAL = "skew_orthogonal"
SKEW_REFINED = "skew_refined"


@dataclass
class LocalFormBlocks:
    """Named blocks of a claimed local canonical form.

    ``core`` is the structured E-block of the dynamic part (Delta for the
    orthogonal variants, J for the refined self form, the signature S for
    the refined skew form); ``sigma11`` is the matching A-block (Sigma11,
    C, or J respectively).  Chain data (e14, a14, a41) are block grids
    partitioned by chain_row_sizes x chain_col_sizes, w blocks each.
    """

    variant: str
    core: mf.MatrixFunction | None = None
    sigma11: mf.MatrixFunction | None = None
    sigma12: mf.MatrixFunction | None = None
    sigma21: mf.MatrixFunction | None = None
    sigma22: mf.MatrixFunction | None = None
    e14: mf.MatrixFunction | None = None
    a14: mf.MatrixFunction | None = None
    a41: mf.MatrixFunction | None = None
    chain_row_sizes: tuple = ()
    chain_col_sizes: tuple = ()
    p: int = 0
    q: int = 0


def _block_slices(sizes):
    out = []
    start = 0
    for s in sizes:
        out.append((start, start + s))
        start += s
    return out


def verify_local_form(blocks, grid, tol=1e-8):
    """Check the property display of the claimed local form (reports only)."""
    v = blocks.variant
    if v not in (SELF_ORTHOGONAL, SELF_REFINED, SKEW_ORTHOGONAL, SKEW_REFINED):
        raise UnsupportedError(f"unknown local form variant {v!r}")
    sgn = 1.0 if v in (SELF_ORTHOGONAL, SELF_REFINED) else -1.0
    entries = {}
    cond = {}

    def ev(f):
        return f.eval_on(grid)

    core = blocks.core
    if core is not None:
        C = ev(core)
        if v == SELF_ORTHOGONAL:
            entries["delta_skew"] = _maxnorm(C + _bT(C))
            cond["delta"] = _min_rel_sv(C)
        elif v == SKEW_ORTHOGONAL:
            entries["delta_symmetric"] = _maxnorm(C - _bT(C))
            cond["delta"] = _min_rel_sv(C)
        elif v == SELF_REFINED:
            p = blocks.p
            Jp = np.zeros((2 * p, 2 * p))
            Jp[:p, p:] = np.eye(p)
            Jp[p:, :p] = -np.eye(p)
            entries["J_canonical"] = _maxnorm(C - Jp)
        else:
            S = np.diag(np.concatenate([np.ones(blocks.p), -np.ones(blocks.q)]))
            entries["S_signature"] = _maxnorm(C - S)

    if blocks.sigma11 is not None:
        S11 = ev(blocks.sigma11)
        if v == SELF_ORTHOGONAL:
            dD = blocks.core.derivative_on(grid)
            entries["sigma11_relation"] = _maxnorm(_bT(S11) - S11 - dD)
        elif v == SKEW_ORTHOGONAL:
            dD = blocks.core.derivative_on(grid)
            entries["sigma11_relation"] = _maxnorm(_bT(S11) + S11 + dD)
        elif v == SELF_REFINED:
            entries["C_symmetric"] = _maxnorm(S11 - _bT(S11))
        else:
            entries["J_skew"] = _maxnorm(S11 + _bT(S11))

    if blocks.sigma12 is not None and blocks.sigma21 is not None:
        S12, S21 = ev(blocks.sigma12), ev(blocks.sigma21)
        entries["sigma21_sigma12"] = _maxnorm(_bT(S21) - sgn * S12)

    if blocks.sigma22 is not None:
        S22 = ev(blocks.sigma22)
        key = "sigma22_symmetric" if sgn > 0 else "sigma22_skew"
        entries[key] = _maxnorm(S22 - sgn * _bT(S22))
        cond["sigma22"] = _min_rel_sv(S22)

    if blocks.a14 is not None and blocks.a41 is not None:
        A14 = ev(blocks.a14)
        A41 = ev(blocks.a41)
        E14d = (
            blocks.e14.derivative_on(grid)
            if blocks.e14 is not None
            else np.zeros_like(_bT(A41))
        )
        entries["a41_chain_relation"] = _maxnorm(_bT(A41) - sgn * (A14 + E14d))

    w = len(blocks.chain_row_sizes)
    if w:
        rows = _block_slices(blocks.chain_row_sizes)
        cols = _block_slices(blocks.chain_col_sizes)
        if blocks.e14 is not None:
            E14 = ev(blocks.e14)
            defect = 0.0
            for i in range(w):
                for j in range(w):
                    if i + j >= w - 1:  # on/below the anti-diagonal
                        defect += _maxnorm(
                            E14[:, rows[i][0] : rows[i][1], cols[j][0] : cols[j][1]]
                        )
            entries["e14_pattern"] = defect
        if blocks.a14 is not None:
            A14 = ev(blocks.a14)
            defect = 0.0
            for i in range(w):
                for j in range(w):
                    blk = A14[:, rows[i][0] : rows[i][1], cols[j][0] : cols[j][1]]
                    if i + j == w - 1:
                        label = f"gamma{w - i}"
                        cond[label] = _min_rel_sv(blk)
                        if v in (SELF_REFINED, SKEW_REFINED):
                            eye = np.eye(blk.shape[1])
                            entries[label + "_identity"] = _maxnorm(blk - eye)
                    elif i + j > w - 1:
                        defect += _maxnorm(blk)
            entries["a14_pattern"] = defect

    return ResidualRecord(entries, cond, tol=tol)
