import numpy as np
import pytest
import scipy.sparse as sp
from scipy.linalg import subspace_angles

from gravbc.boundary import BoundaryConditionSpec, random_general_spec
from gravbc.errors import InvalidParameterError
from gravbc.geometry import make_flat_torus_product, make_warped_torus_product
from gravbc.spectral import (
    assemble_mode_operator,
    constrained_samples,
    kernel_report,
    mode_spectrum,
    shift_invert_eigs,
    symmetry_defect,
)
from gravbc.tensor_ops import make_grid, mode_index
from oracles import discrete_dirichlet_eigenvalues, shooting_kernel_dim, torus_zero_modes

GEOM = make_flat_torus_product(1.0)
ANDERSON = BoundaryConditionSpec.anderson()
DIRICHLET = BoundaryConditionSpec.dirichlet()


def operator(spec, n, M):
    return assemble_mode_operator(GEOM, spec, mode_index(GEOM, n), make_grid(1.0, M))


def test_shift_invert_on_diagonal_pencil():
    d = np.arange(1.0, 201.0)
    A = sp.diags(d).tocsr().astype(complex)
    B = sp.identity(200, format="csr", dtype=complex)
    lam, _ = shift_invert_eigs(A, B, 0.1 + 0.1j, 5)
    assert np.allclose(np.sort(lam.real), d[:5])


@pytest.mark.parametrize("n", [(0, 0, 0), (1, 0, 0), (1, 2, -1)])
def test_dirichlet_matches_discrete_laplacian(n):
    op = operator(DIRICHLET, n, 41)
    res = mode_spectrum(op, count=20, method="dense")
    want = discrete_dirichlet_eigenvalues(1.0, 41, op.mode.xi_sq, 2)
    got = np.sort(res.eigenvalues.real)
    assert np.allclose(got[:10], want[0]) and np.allclose(got[10:20], want[1])
    assert res.kernel_dim == 0


@pytest.mark.parametrize("spec", [ANDERSON, DIRICHLET])
@pytest.mark.parametrize("n", [(0, 0, 0), (1, -1, 0)])
def test_sparse_matches_dense(spec, n):
    op = operator(spec, n, 41)
    dense = mode_spectrum(op, count=6, method="dense")
    sparse = mode_spectrum(op, count=6, method="sparse")
    assert dense.kernel_dim == sparse.kernel_dim
    assert sparse.smallest_singular == pytest.approx(dense.smallest_singular, abs=1e-7)
    assert np.allclose(np.sort(np.abs(dense.eigenvalues[:6])), np.sort(np.abs(sparse.eigenvalues[:6])), atol=1e-6)


def test_anderson_zero_modes():
    M = 61
    res = mode_spectrum(operator(ANDERSON, (0, 0, 0), M), method="dense")
    assert res.kernel_dim == 5
    basis = np.array([b.flat() for b in res.kernel_basis]).T
    assert subspace_angles(torus_zero_modes(M), basis).max() < 1e-8


@pytest.mark.parametrize("n", [(1, 0, 0), (0, 1, 1), (2, -2, 1)])
def test_anderson_nonzero_modes_invertible(n):
    res = mode_spectrum(operator(ANDERSON, n, 81))
    assert res.kernel_dim == 0
    assert res.smallest_singular > 0.01


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("n", [(0, 0, 0), (1, 0, 0)])
def test_kernel_dimension_matches_shooting(seed, n):
    spec = random_general_spec(np.random.default_rng(seed)) if seed else ANDERSON
    res = mode_spectrum(operator(spec, n, 81))
    assert res.kernel_dim == shooting_kernel_dim(spec, GEOM, mode_index(GEOM, n).xi)


def test_kernel_report_parallel_matches_serial():
    grid = make_grid(1.0, 31)
    modes = [(0, 0, 0), (1, 0, 0), (0, 0, 1)]
    serial = kernel_report(GEOM, ANDERSON, modes, grid, jobs=1)
    parallel = kernel_report(GEOM, ANDERSON, modes, grid, jobs=2)
    assert serial.kernel_dim_total == parallel.kernel_dim_total == 5
    assert serial.kernel_modes == [(0, 0, 0)]
    assert serial.spectral_gap == pytest.approx(parallel.spectral_gap, abs=1e-10)


def test_dirichlet_rate():
    errs = []
    for M in (101, 201, 401):
        lam = mode_spectrum(operator(DIRICHLET, (0, 0, 0), M), count=1, method="sparse").eigenvalues[0]
        errs.append(abs(lam - (np.pi / 2) ** 2))
    assert np.all(np.abs(np.log2(np.array(errs[:-1]) / errs[1:]) - 2) < 0.2)


def test_constrained_samples_satisfy_rows():
    op = operator(ANDERSON, (1, 0, 1), 51)
    for u in constrained_samples(op, 3, np.random.default_rng(0)):
        assert np.abs(op.C @ u.flat()).max() < 1e-9


def test_symmetry_defect():
    rng = np.random.default_rng(0)
    defects = []
    for M in (101, 201, 401):
        op = operator(ANDERSON, (1, 0, 0), M)
        defects.append(symmetry_defect(op, constrained_samples(op, 3, np.random.default_rng(0)), "I"))
    ratios = np.array(defects[:-1]) / defects[1:]
    assert np.all(np.abs(ratios - 2) < 0.3)
    op = operator(DIRICHLET, (1, 0, 0), 101)
    assert symmetry_defect(op, constrained_samples(op, 3, rng), "plain") < 1e-9


def test_bad_arguments():
    op = operator(ANDERSON, (0, 0, 0), 11)
    with pytest.raises(InvalidParameterError):
        mode_spectrum(op, method="lanczos")
    with pytest.raises(InvalidParameterError):
        mode_spectrum(op, count=0)
    with pytest.raises(InvalidParameterError):
        symmetry_defect(op, [], pairing="other")
    with pytest.raises(InvalidParameterError):
        assemble_mode_operator(make_warped_torus_product(1.0), ANDERSON, mode_index(GEOM, (0, 0, 0)),
                               make_grid(1.0, 11))
