import numpy as np
import pytest

import structdae as sd
from structdae.errors import (
    ConditioningError,
    IllPosedRankError,
    InertiaChangeError,
    RankDropError,
    StructureError,
)
from structdae.factor import max_jump, smooth_kernel_frame

from oracles import rotation

GRID = sd.TimeGrid.uniform(0.0, 1.0, 101)


def rotating_rank1(grid):
    return sd.from_callable(
        lambda t: rotation(t) @ np.diag([1.0, 0.0]) @ rotation(t).T, grid,
        dfn=lambda t: _rot_deriv(t),
    )


def _rot_deriv(t):
    R = rotation(t)
    dR = np.array([[-np.sin(t), -np.cos(t)], [np.cos(t), -np.sin(t)]])
    D = np.diag([1.0, 0.0])
    return dR @ D @ R.T + R @ D @ dR.T


def _orthogonality_defect(U):
    return float(np.linalg.norm(
        np.transpose(U, (0, 2, 1)) @ U - np.eye(U.shape[1]), axis=(1, 2)
    ).max())


def _reconstruction(split, F, grid):
    vals = F.eval_on(grid)
    U = split.U.eval_on(grid)
    V = split.V.eval_on(grid)
    S = split.Sigma.eval_on(grid)
    r = split.r
    full = np.zeros_like(vals)
    full[:, :r, :r] = S
    return float(np.linalg.norm(
        np.transpose(U, (0, 2, 1)) @ vals @ V - full, axis=(1, 2)
    ).max())


def test_rank_split_constant_diag():
    F = sd.constant(np.diag([1.0, 0.0]))
    split = sd.rank_split(F, GRID)
    assert split.r == 1
    assert _orthogonality_defect(split.U.eval_on(GRID)) <= 1e-12
    assert _reconstruction(split, F, GRID) <= 1e-12
    sig = split.Sigma.eval(0.5)
    assert abs(abs(sig[0, 0]) - 1.0) < 1e-12


def test_rank_split_rotating_rank1_continuity():
    F = rotating_rank1(GRID)
    split = sd.rank_split(F, GRID)
    assert split.r == 1
    dt = GRID.points[1] - GRID.points[0]
    assert max_jump(split.U.eval_on(GRID)) <= 2.0 * dt
    assert _reconstruction(split, F, GRID) <= 1e-10
    # refinement halves the jumps (within factor 1.5)
    fine = GRID.refine()
    split2 = sd.rank_split(rotating_rank1(fine), fine)
    assert max_jump(split2.U.eval_on(fine)) <= 1.5 * max_jump(split.U.eval_on(GRID)) / 2.0


def test_rank_split_full_rank_seeded():
    rng = np.random.default_rng(123)
    F = sd.constant(rng.standard_normal((5, 5)) + 3 * np.eye(5))
    split = sd.rank_split(F, GRID)
    assert split.r == 5
    assert _reconstruction(split, F, GRID) <= 1e-12
    # singular values agree with an independent eigensolve of F^T F
    s_mine = np.sort(np.linalg.svd(split.Sigma.eval(0.0), compute_uv=False))
    s_ref = np.sort(np.sqrt(np.linalg.eigvalsh(F.value.T @ F.value)))
    assert np.allclose(s_mine, s_ref, atol=1e-10)


def test_rank_split_rectangular():
    rng = np.random.default_rng(5)
    B = rng.standard_normal((5, 2))
    split = sd.rank_split(sd.constant(B), GRID)
    assert split.r == 2
    assert split.U.shape == (5, 5) and split.V.shape == (2, 2)
    assert _reconstruction(split, sd.constant(B), GRID) <= 1e-12


def test_rank_split_rank_drop_error():
    grid = sd.TimeGrid.uniform(-1.0, 1.0, 21)  # contains t = 0
    F = sd.PolynomialMatrixFunction.from_entries(
        [[[1.0], [0.0]], [[0.0], [0.0, 1.0]]]  # diag(1, t)
    )
    with pytest.raises(RankDropError):
        sd.rank_split(F, grid)


def test_rank_split_ill_posed_gap():
    F = sd.constant(np.diag([1.0, 1.2e-8, 0.9e-8]))
    with pytest.raises(IllPosedRankError):
        sd.rank_split(F, GRID, gap_tol=1e-8)


def test_sym_rank_split_diag_and_stokes_block():
    split = sd.sym_rank_split(sd.constant(np.diag([2.0, 0.0])), GRID)
    assert split.r == 1
    assert abs(abs(split.Sigma.eval(0.0)[0, 0]) - 2.0) < 1e-12

    E = np.zeros((4, 4))
    E[:3, :3] = np.eye(3)  # mass block with empty pressure block
    split2 = sd.sym_rank_split(sd.constant(E), GRID)
    assert split2.r == 3
    assert np.allclose(split2.Sigma.eval(0.5), np.eye(3), atol=1e-12)


def test_sym_rank_split_skew_time_varying():
    def E_of(t):
        a = 1.0 + t * t
        return np.array([[0.0, a, 0.0], [-a, 0.0, 0.0], [0.0, 0.0, 0.0]])

    E = sd.from_callable(E_of, GRID)
    split = sd.sym_rank_split(E, GRID)
    assert split.r == 2
    for t in (0.0, 0.5, 1.0):
        sig = split.Sigma.eval(t)
        a = 1.0 + t * t
        assert np.linalg.norm(sig + sig.T) < 1e-10
        assert abs(np.linalg.norm(sig) - np.sqrt(2) * a) < 1e-10
    Q = split.Q.eval_on(GRID)
    vals = E.eval_on(GRID)
    recon = np.transpose(Q, (0, 2, 1)) @ vals @ Q
    sig_full = np.zeros_like(vals)
    sig_full[:, :2, :2] = split.Sigma.eval_on(GRID)
    assert np.linalg.norm(recon - sig_full, axis=(1, 2)).max() <= 1e-10


def test_sym_rank_split_kernel_condition_violation():
    E = sd.constant(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(StructureError):
        sd.sym_rank_split(E, GRID)


def test_smooth_inertia_hand_values():
    split = sd.smooth_inertia(sd.constant(np.diag([3.0, -2.0])), GRID)
    assert (split.p, split.q) == (1, 1)
    W = split.W.eval(0.0)
    D = np.diag([3.0, -2.0])
    assert np.allclose(W.T @ D @ W, np.diag([1.0, -1.0]), atol=1e-12)
    assert np.allclose(np.abs(W), np.diag([3 ** -0.5, 2 ** -0.5]), atol=1e-12)

    eye = sd.smooth_inertia(sd.identity(4), GRID)
    assert (eye.p, eye.q) == (4, 0)
    assert np.allclose(eye.W.eval(0.3), np.eye(4), atol=1e-12)


def test_smooth_inertia_rotating():
    D = sd.from_callable(lambda t: rotation(t) @ np.diag([2.0, -1.0]) @ rotation(t).T, GRID)
    split = sd.smooth_inertia(D, GRID)
    assert (split.p, split.q) == (1, 1)
    W = split.W.eval_on(GRID)
    vals = D.eval_on(GRID)
    res = np.transpose(W, (0, 2, 1)) @ vals @ W - np.diag([1.0, -1.0])
    assert np.linalg.norm(res, axis=(1, 2)).max() <= 1e-9
    # brute-force signature agreement at every grid point
    for k, t in enumerate(GRID.points):
        lam = np.linalg.eigvalsh(vals[k])
        assert (int((lam > 0).sum()), int((lam < 0).sum())) == (1, 1)
    # continuity halves under refinement
    fine = GRID.refine()
    D2 = sd.from_callable(lambda t: rotation(t) @ np.diag([2.0, -1.0]) @ rotation(t).T, fine)
    j1 = max_jump(split.W.eval_on(GRID))
    j2 = max_jump(sd.smooth_inertia(D2, fine).W.eval_on(fine))
    assert j2 <= 1.5 * j1 / 2.0


def test_smooth_inertia_errors():
    with pytest.raises(StructureError):
        sd.smooth_inertia(sd.constant(np.array([[0.0, 1.0], [0.0, 0.0]])), GRID)
    grid = sd.TimeGrid.uniform(-1.0, 1.0, 20)  # avoids t = 0 but crosses it
    D = sd.PolynomialMatrixFunction.from_entries([[[1.0], [0.0]], [[0.0], [0.0, 1.0]]])
    with pytest.raises(InertiaChangeError):
        sd.smooth_inertia(D, grid)
    grid0 = sd.TimeGrid.uniform(-1.0, 1.0, 21)  # hits t = 0
    with pytest.raises(ConditioningError):
        sd.smooth_inertia(D, grid0)


def test_row_rank_normalize():
    norm = sd.row_rank_normalize(sd.constant(np.array([[1.0], [0.0], [0.0]])), GRID)
    assert abs(abs(norm.B1.eval(0.0)[0, 0]) - 1.0) < 1e-12

    norm2 = sd.row_rank_normalize(sd.constant(np.array([[1.0], [1.0], [0.0]])), GRID)
    assert abs(abs(norm2.B1.eval(0.0)[0, 0]) - np.sqrt(2)) < 1e-12

    rng = np.random.default_rng(99)
    B = rng.standard_normal((6, 2))
    norm3 = sd.row_rank_normalize(sd.constant(B), GRID)
    U = norm3.U.eval(0.0)
    stacked = np.zeros((6, 2))
    stacked[:2] = norm3.B1.eval(0.0)
    assert np.linalg.norm(U.T @ B - stacked) <= 1e-12
    s_ref = np.linalg.svd(B, compute_uv=False)
    s_b1 = np.linalg.svd(norm3.B1.eval(0.0), compute_uv=False)
    assert np.allclose(s_b1, s_ref, atol=1e-12)

    with pytest.raises(RankDropError):
        sd.row_rank_normalize(sd.constant(np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 1.0]])), GRID)


def test_smooth_kernel_frame_consistency():
    # B(t) = [cos t, sin t]: kernel rotates with t
    B = sd.from_callable(
        lambda t: [[np.cos(t), np.sin(t)]], GRID,
        dfn=lambda t: [[-np.sin(t), np.cos(t)]],
    )
    N, Nd = smooth_kernel_frame(B, GRID)
    for k, t in enumerate(GRID.points):
        assert abs(np.cos(t) * N[k, 0, 0] + np.sin(t) * N[k, 1, 0]) < 1e-12
        assert abs(N[k, :, 0] @ N[k, :, 0] - 1.0) < 1e-12
    # derivative samples match finite differences of the frame itself
    dt = GRID.points[1] - GRID.points[0]
    fd = (N[2:] - N[:-2]) / (2 * dt)
    assert np.abs(fd - Nd[1:-1]).max() < 1e-3


def test_orthogonality_of_all_factors():
    F = rotating_rank1(GRID)
    split = sd.rank_split(F, GRID)
    assert _orthogonality_defect(split.U.eval_on(GRID)) <= 1e-12
    assert _orthogonality_defect(split.V.eval_on(GRID)) <= 1e-12
    sym = sd.sym_rank_split(sd.constant(np.diag([2.0, 1.0, 0.0])), GRID)
    assert _orthogonality_defect(sym.Q.eval_on(GRID)) <= 1e-12
