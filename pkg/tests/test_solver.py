import numpy as np
import pytest
import scipy.sparse.linalg as spla

from pwmaxwell.assembly import HermitianBlockSystem
from pwmaxwell.solver import SolveOptions, SolveReport, residual_norm, solve

from helpers import build_problem, dipole_g


def _with_rhs(system, rhs):
    system.rhs = np.asarray(rhs, dtype=complex).ravel()
    return system


def test_recover_known_coefficients():
    """b := A X0 recovers X0 through the direct path."""
    prob = build_problem(n=2, q=3)  # 2p = 32, dim 256
    sys_ = prob.system
    rng = np.random.default_rng(50)
    X0 = rng.standard_normal(sys_.dim) + 1j * rng.standard_normal(sys_.dim)
    _with_rhs(sys_, sys_.matvec(X0))
    rep = solve(sys_, SolveOptions())
    assert np.linalg.norm(rep.X - X0) <= 1e-8 * np.linalg.norm(X0)
    assert rep.iterations == 0
    assert rep.relative_residual <= 1e-8


def test_direct_and_pcg_agree():
    g, _ = dipole_g()
    prob = build_problem(n=2, q=2, g=g)
    direct = solve(prob.system, SolveOptions(method="direct"))
    pcg = solve(prob.system, SolveOptions(method="pcg", pcg_tol=1e-12))
    assert np.linalg.norm(direct.X - pcg.X) <= 1e-8 * np.linalg.norm(direct.X)
    assert pcg.iterations > 0
    assert pcg.regularization_used == 0.0


@pytest.mark.parametrize("n,q", [(2, 2), (4, 4)])
def test_factorization_reconstructs_matrix(n, q):
    """L U factors reproduce the permuted matrix, up to dim 3200."""
    prob = build_problem(n=n, q=q)
    A = prob.system.to_sparse().tocsc()
    assert A.shape[0] == n**3 * 2 * (q + 1) ** 2
    lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                   options={"SymmetricMode": True})
    # Pr A Pc = L U; row gather by argsort(perm_r), columns likewise
    inv_r = np.argsort(lu.perm_r)
    inv_c = np.argsort(lu.perm_c)
    perm = A[inv_r][:, inv_c]
    gap = spla.norm((lu.L @ lu.U - perm).tocsr(), "fro")
    assert gap <= 1e-10 * spla.norm(A, "fro")


def test_solve_is_deterministic():
    g, _ = dipole_g()
    prob = build_problem(n=2, q=1, g=g)
    a = solve(prob.system, SolveOptions())
    b = solve(prob.system, SolveOptions())
    assert np.array_equal(a.X, b.X)
    p = solve(prob.system, SolveOptions(method="pcg"))
    q_ = solve(prob.system, SolveOptions(method="pcg"))
    assert np.array_equal(p.X, q_.X)


def test_galerkin_orthogonality_small():
    g, _ = dipole_g()
    prob = build_problem(n=2, q=2, g=g)
    rep = solve(prob.system, SolveOptions())
    rng = np.random.default_rng(51)
    b = prob.system.rhs
    r = prob.system.matvec(rep.X) - b
    nb = np.linalg.norm(b)
    for _ in range(20):
        y = rng.standard_normal(prob.system.dim) + 1j * rng.standard_normal(prob.system.dim)
        assert abs(np.vdot(y, r)) <= 1e-8 * np.linalg.norm(y) * nb


def test_zero_rhs_short_circuits():
    prob = build_problem(n=1, q=1)
    rep = solve(prob.system, SolveOptions())
    assert np.all(rep.X == 0.0)
    assert rep.relative_residual == 0.0
    assert rep.regularization_used == 0.0


def test_singular_system_reports_shift():
    """A matrix with an exactly empty row/column climbs the shift ladder.

    The zero pivot makes the unshifted factorization fail outright; the
    recovery must be visible via regularization_used, never silent.
    """
    bs = 6
    diag = np.eye(bs, dtype=complex)[None, :, :].copy()
    diag[0, bs - 1, bs - 1] = 0.0  # dof never touched by any residual
    rhs = np.zeros(bs, dtype=complex)
    rhs[0] = 1.0  # inside the range of the matrix
    sys_ = HermitianBlockSystem(
        n_elements=1, block_size=bs, diag=diag,
        face_pairs=np.empty((0, 2), dtype=np.int64),
        face_blocks=np.empty((0, bs, bs), dtype=complex), rhs=rhs)
    rep = solve(sys_, SolveOptions())
    assert rep.regularization_used > 0.0
    assert residual_norm(sys_, rep.X) <= 1e-6


def test_pcg_failure_is_loud():
    g, _ = dipole_g()
    prob = build_problem(n=2, q=1, g=g)
    with pytest.raises(RuntimeError, match="residual"):
        solve(prob.system, SolveOptions(method="pcg", pcg_tol=1e-14, pcg_max_iter=2))


def test_residual_norm_validates_length():
    prob = build_problem(n=1, q=1)
    with pytest.raises(ValueError):
        residual_norm(prob.system, np.zeros(3))


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(method="iterative")
    with pytest.raises(ValueError):
        SolveOptions(pcg_tol=0.0)
    with pytest.raises(ValueError):
        SolveOptions(reg_initial=1e-3, reg_max=1e-6)
    rep = SolveReport(X=np.zeros(1, dtype=complex), relative_residual=0.0,
                      iterations=0, regularization_used=0.0)
    assert rep.iterations == 0
