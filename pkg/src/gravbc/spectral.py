"""Per-mode spectra of ``D_2`` with boundary conditions imposed as constraint rows.

For one Fourier mode the unknowns are the ten component profiles on the
grid, flattened component-major (index ``c * M + j``). The operator matrix
``A`` holds the three-point stencil of ``-d_s^2 + |xi|^2`` on interior nodes
and the twenty boundary rows of the spec at the two end nodes; ``B`` selects
the interior rows. Eigenpairs of the constrained operator are the finite
eigenpairs of the pencil ``(A, B)``, since its constraint rows force
``C u = 0``.

Two solvers are provided.

``dense``
    Orthonormal null-space basis ``Z`` of the constraint rows from a complete
    QR factorisation, then the square pencil ``(A_int Z, S Z)`` with ``S`` the
    interior selector, and ``svd(A_int Z)`` for singular values.
``sparse``
    Block shift-invert subspace iteration with Rayleigh-Ritz on a sparse LU
    factorisation. Singular values of the constrained operator come from the
    Hermitian augmented pencil ``[[0, A_int, 0], [A_int^H, 0, C^H], [0, C, 0]]``
    whose finite eigenvalues are ``+-sigma``. A block method is used so that
    highly degenerate eigenvalues (ten copies per component family) are not
    missed.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .boundary import BoundaryConditionSpec, constraint_rows
from .errors import DegenerateSpecError, InvalidParameterError
from .geometry import GeometrySpec
from .tensor_ops import (
    Grid1D,
    ModeIndex,
    ModeTensor2,
    inner_product_V2,
    mode_index,
    trace_reverse,
)

DENSE_LIMIT = 500  # auto mode uses dense algebra up to this many unknowns
KERNEL_RTOL = 1e-8


@dataclass(eq=False)
class ModeOperator:
    """Discrete boundary-value operator for one mode.

    ``A`` and ``B`` are sparse; ``C`` holds the constraint rows, shape ``(20, 10 M)``.
    """

    mode: ModeIndex
    grid: Grid1D
    A: sp.csr_matrix
    B: sp.csr_matrix
    C: np.ndarray
    spec: BoundaryConditionSpec
    geom: GeometrySpec

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def interior(self) -> np.ndarray:
        """Row indices of the interior (differential) equations."""
        M = self.grid.M
        return (np.arange(10)[:, None] * M + np.arange(1, M - 1)[None, :]).ravel()

    @property
    def norm_estimate(self) -> float:
        """``||A||_inf`` of the interior stencil, ``4/h^2 + |xi|^2``."""
        return 4.0 / self.grid.h ** 2 + self.mode.xi_sq

    def apply(self, u: ModeTensor2) -> ModeTensor2:
        return ModeTensor2.from_flat(self.A @ u.flat(), self.grid)


@dataclass
class SpectralResult:
    mode: ModeIndex
    eigenvalues: np.ndarray
    smallest_singular: float
    kernel_dim: int
    kernel_basis: list
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    method: str = ""


def assemble_mode_operator(geom: GeometrySpec, spec: BoundaryConditionSpec, mode: ModeIndex,
                           grid: Grid1D) -> ModeOperator:
    """Assemble ``(A, B)`` for one mode on the flat product."""
    if not geom.is_flat:
        raise InvalidParameterError("the assembled operator is implemented for the flat product only")
    M, h = grid.M, grid.h
    n = 10 * M
    rows = constraint_rows(spec, geom, mode, grid)
    # interior stencil
    inner = np.arange(1, M - 1)
    r = (np.arange(10)[:, None] * M + inner[None, :]).ravel()
    diag = 2.0 / h ** 2 + mode.xi_sq
    ri = np.concatenate([r, r, r])
    ci = np.concatenate([r - 1, r, r + 1])
    vi = np.concatenate([np.full(r.size, -1.0 / h ** 2), np.full(r.size, diag),
                         np.full(r.size, -1.0 / h ** 2)]).astype(complex)
    # constraint rows go to the end nodes: row k of side -1 -> k*M, side +1 -> k*M + M - 1
    C = rows.reshape(20, n)
    bidx = np.concatenate([np.arange(10) * M, np.arange(10) * M + M - 1])
    cr, cc = np.nonzero(C)
    A = sp.coo_matrix((np.concatenate([vi, C[cr, cc]]),
                       (np.concatenate([ri, bidx[cr]]), np.concatenate([ci, cc]))),
                      shape=(n, n)).tocsr()
    sel = np.zeros(n)
    sel[r] = 1.0
    B = sp.diags(sel).tocsr().astype(complex)
    return ModeOperator(mode, grid, A, B, C, spec, geom)


# ---------------------------------------------------------------- block shift-invert

def _orth(X):
    return sla.qr(X, mode="economic", check_finite=False)[0]


def shift_invert_eigs(A, B, sigma: complex, want: int, block: int | None = None,
                      tol: float = 1e-10, maxiter: int = 500, seed: int = 0):
    """Eigenpairs of ``A x = lam B x`` closest to ``sigma``.

    Subspace iteration on ``(A - sigma B)^-1 B`` with Rayleigh-Ritz. Infinite
    eigenvalues of a singular ``B`` map to zero and never enter the result.

    Returns
    -------
    lam : ndarray, shape (want,)
        Sorted by ``|lam - sigma|``.
    X : ndarray, shape (n, want)
        Ritz vectors with unit norm.
    """
    n = A.shape[0]
    block = block or max(2 * want, want + 8)
    block = min(block, n)
    lu = splu(sp.csc_matrix(A - sigma * B))
    scale = max(sp.linalg.norm(A, np.inf), 1.0)
    rng = np.random.default_rng(seed)
    Q = _orth(lu.solve(B @ (rng.normal(size=(n, block)) + 1j * rng.normal(size=(n, block)))))
    prev = None
    for _ in range(maxiter):
        Z = lu.solve(B @ Q)
        theta, W = np.linalg.eig(Q.conj().T @ Z)
        order = np.argsort(-np.abs(theta))[:want]
        theta, W = theta[order], W[:, order]
        with np.errstate(divide="ignore"):
            lam = sigma + 1.0 / theta
        X = Q @ W
        X /= np.linalg.norm(X, axis=0)
        res = np.linalg.norm(A @ X - (B @ X) * lam, axis=0) / scale
        if np.all(res <= tol) or (prev is not None and np.allclose(lam, prev, rtol=0, atol=tol * scale * 1e-2)):
            break
        prev = lam
        Q = _orth(Z)
    return lam, X


# ---------------------------------------------------------------- spectra

def _tolerance(op: ModeOperator, tol):
    return KERNEL_RTOL * op.norm_estimate if tol is None else float(tol)


def _dense_spectrum(op: ModeOperator, count: int, tol: float) -> SpectralResult:
    n = op.size
    Q, R = np.linalg.qr(op.C.conj().T, mode="complete")
    d = np.abs(np.diag(R))
    if d.min() <= 1e-10 * d.max():
        raise DegenerateSpecError("constraint rows are rank deficient")
    Z = Q[:, 20:]
    interior = op.interior
    AZ = op.A[interior].toarray() @ Z
    SZ = Z[interior]
    lam = sla.eigvals(AZ, SZ)
    lam = lam[np.argsort(np.abs(lam))][:count]
    _, sv, vh = np.linalg.svd(AZ)
    sv = sv[::-1]
    null = np.flatnonzero(sv <= tol)
    vecs = Z @ vh[::-1][null].conj().T if null.size else np.zeros((n, 0))
    return SpectralResult(op.mode, lam, float(sv[0]), int(null.size),
                          [ModeTensor2.from_flat(v, op.grid) for v in vecs.T], sv, "dense")


def _augmented(op: ModeOperator):
    interior = op.interior
    A_int = op.A[interior]
    m, n = A_int.shape
    C = sp.csr_matrix(op.C)
    K = sp.bmat([[None, A_int, None],
                 [A_int.conj().T, None, C.conj().T],
                 [None, C, None]], format="csr")
    K = K.tolil()
    K.resize((m + n + 20, m + n + 20))
    Bd = np.concatenate([np.ones(m + n), np.zeros(20)])
    return K.tocsr(), sp.diags(Bd).tocsr(), m, n


def _sparse_singular(op: ModeOperator, tol: float, nsv: int = 8):
    K, Baug, m, n = _augmented(op)
    shift = 1e-3j
    while True:
        lam, X = shift_invert_eigs(K, Baug, shift, 2 * nsv, block=4 * nsv, tol=1e-9, seed=1)
        mags = np.sort(np.abs(lam.real))
        sv = mags[::2]
        zero = int(np.sum(np.abs(lam.real) <= tol))
        if zero < 2 * nsv - 2 or 2 * nsv >= m:
            break
        nsv *= 2
    kdim = zero // 2
    basis = []
    if kdim:
        xs = X[m:m + n, np.abs(lam.real) <= tol]
        U, s, _ = np.linalg.svd(xs, full_matrices=False)
        basis = [ModeTensor2.from_flat(U[:, i], op.grid) for i in range(kdim)]
    return sv, kdim, basis


def mode_spectrum(op: ModeOperator, count: int = 10, method: str = "auto",
                  tol: float | None = None) -> SpectralResult:
    """Smallest-modulus eigenvalues, smallest singular value and kernel of one mode.

    Parameters
    ----------
    count : int
        Number of eigenvalues to return.
    method : {"auto", "dense", "sparse"}
        ``auto`` picks dense algebra for at most ``DENSE_LIMIT`` unknowns.
    tol : float, optional
        Kernel threshold on singular values; default ``1e-8 * (4/h^2 + |xi|^2)``.
    """
    if method not in ("auto", "dense", "sparse"):
        raise InvalidParameterError(f"unknown method {method!r}")
    if count < 1:
        raise InvalidParameterError("count must be positive")
    tol = _tolerance(op, tol)
    if method == "dense" or (method == "auto" and op.size <= DENSE_LIMIT):
        return _dense_spectrum(op, count, tol)
    lam, _ = shift_invert_eigs(op.A, op.B, 1e-3 * (1 + 1j), count)
    lam = lam[np.argsort(np.abs(lam))]
    sv, kdim, basis = _sparse_singular(op, tol)
    return SpectralResult(op.mode, lam, float(sv[0]), kdim, basis, sv, "sparse")


# ---------------------------------------------------------------- kernel report

@dataclass
class KernelReport:
    results: dict  # mode triple -> SpectralResult
    kernel_dim_total: int
    kernel_modes: list
    spectral_gap: float
    tol: float | None = None


def _solve_one(args):
    geom, spec, n, grid, tol, count, method = args
    op = assemble_mode_operator(geom, spec, mode_index(geom, n), grid)
    return mode_spectrum(op, count, method, tol)


def kernel_report(geom: GeometrySpec, spec: BoundaryConditionSpec, modes, grid: Grid1D,
                  tol: float | None = None, count: int = 10, method: str = "auto",
                  jobs: int = 1) -> KernelReport:
    """Solve every mode in ``modes`` and aggregate kernel dimensions.

    ``spectral_gap`` is the smallest eigenvalue modulus over all modes, so it
    is zero (to tolerance) as soon as any mode has a kernel.
    """
    modes = [tuple(int(v) for v in n) for n in modes]
    tasks = [(geom, spec, n, grid, tol, count, method) for n in modes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(_solve_one, tasks))
    else:
        solved = [_solve_one(t) for t in tasks]
    results = dict(zip(modes, solved))
    total = sum(r.kernel_dim for r in solved)
    kernel_modes = [n for n, r in results.items() if r.kernel_dim]
    gap = min(float(np.abs(r.eigenvalues[0])) for r in solved)
    return KernelReport(results, total, kernel_modes, gap, tol)


# ---------------------------------------------------------------- symmetry defect

def constrained_samples(op: ModeOperator, count: int, rng: np.random.Generator,
                        harmonics: int = 4) -> list[ModeTensor2]:
    """Smooth random fields that satisfy the discrete constraint rows exactly.

    Each component is a short random Fourier series in ``s``; a correction in
    ``span{e_c (x) (1, s, s^2, s^3)}`` is then chosen by minimum-norm least
    squares so that ``C u = 0``.
    """
    grid = op.grid
    t = grid.s_values / grid.T
    basis = np.array([np.cos(np.pi * k * (t + 1) / 2) for k in range(harmonics)])
    poly = np.array([t ** p for p in range(4)])
    P = np.zeros((10 * grid.M, 40), dtype=complex)
    for c in range(10):
        P[c * grid.M:(c + 1) * grid.M, 4 * c:4 * c + 4] = poly.T
    CP = op.C @ P
    out = []
    for _ in range(count):
        coef = rng.normal(size=(10, harmonics)) + 1j * rng.normal(size=(10, harmonics))
        u = (coef @ basis).ravel()
        corr, *_ = np.linalg.lstsq(CP, -(op.C @ u), rcond=None)
        out.append(ModeTensor2.from_flat(u + P @ corr, grid))
    return out


def symmetry_defect(op: ModeOperator, samples, pairing: str = "I") -> float:
    """``max |(A u, P v) - (P u, A v)| / (||u|| ||v||)`` over sample pairs.

    ``P`` is trace reversal for ``pairing="I"`` and the identity for
    ``"plain"``; norms and pairings use the trapezoidal ``V_2`` inner product.
    """
    if pairing not in ("I", "plain"):
        raise InvalidParameterError("pairing must be 'I' or 'plain'")
    P = trace_reverse if pairing == "I" else (lambda w: w)
    geom = op.geom
    Au = [op.apply(u) for u in samples]
    norms = [np.sqrt(inner_product_V2(u, u, geom).real) for u in samples]
    worst = 0.0
    for i, u in enumerate(samples):
        for j, v in enumerate(samples):
            lhs = inner_product_V2(Au[i], P(v), geom)
            rhs = inner_product_V2(P(u), Au[j], geom)
            worst = max(worst, abs(lhs - rhs) / (norms[i] * norms[j]))
    return float(worst)
