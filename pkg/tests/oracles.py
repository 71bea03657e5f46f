"""Independent reference computations used by the tests."""

import numpy as np

from gravbc.boundary import SIDES, residual_operator


def shooting_matrix(spec, geom, xi):
    """20x20 boundary map on the exact solutions of ``-u'' + |xi|^2 u = 0``.

    Columns are ``e_c cosh(k s)`` and ``e_c sinh(k s)`` (``1`` and ``s`` when
    ``k = 0``); rows are the ten conditions at each end.
    """
    k = float(np.linalg.norm(xi))
    T = geom.T
    if k == 0:
        funcs = [(lambda s: 1.0, lambda s: 0.0), (lambda s: s, lambda s: 1.0)]
    else:
        funcs = [(lambda s: np.cosh(k * s), lambda s: k * np.sinh(k * s)),
                 (lambda s: np.sinh(k * s), lambda s: k * np.cosh(k * s))]
    rows = []
    for side in SIDES:
        R_val, R_der = residual_operator(spec, geom, side, xi)
        s = side * T
        rows.append(np.hstack([R_val * f(s) + R_der * df(s) for f, df in funcs]))
    return np.vstack(rows)


def shooting_kernel_dim(spec, geom, xi, rtol=1e-10):
    sv = np.linalg.svd(shooting_matrix(spec, geom, xi), compute_uv=False)
    return int(np.sum(sv <= rtol * sv[0]))


def dirichlet_eigenvalues(T, xi_sq, count):
    """``(m pi / 2T)^2 + |xi|^2``, each with multiplicity ten."""
    m = np.arange(1, count + 1)
    return (m * np.pi / (2 * T)) ** 2 + xi_sq


def discrete_dirichlet_eigenvalues(T, M, xi_sq, count):
    """Exact eigenvalues of the three-point Laplacian with zero end values."""
    h = 2 * T / (M - 1)
    m = np.arange(1, count + 1)
    return 4 / h ** 2 * np.sin(m * np.pi / (2 * (M - 1))) ** 2 + xi_sq


def half_space_degenerate_mode(xi, t=1.0):
    """Kernel vector ``(c_ss, c_sS, c_SS)`` of conditions (a)-(c) on the half space."""
    xi = np.asarray(xi, dtype=float)
    nx = xi / np.linalg.norm(xi)
    return np.array([-t / 3, *(1j * t / 3 * nx), t / 3, t / 3, t / 3, 0, 0, 0])


def torus_zero_modes(M):
    """Flattened constant ``u_ss``, ``u_sS = dx^i`` and ``u_SS = delta``."""
    out = []
    for c in range(4):
        e = np.zeros(10 * M)
        e[c * M:(c + 1) * M] = 1.0
        out.append(e)
    e = np.zeros(10 * M)
    for c in (4, 5, 6):
        e[c * M:(c + 1) * M] = 1.0
    out.append(e)
    return np.array(out).T
