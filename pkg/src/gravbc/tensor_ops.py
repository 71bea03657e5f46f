"""Per-Fourier-mode calculus for symmetric 2-tensors on ``[-T, T] x T^3``.

A field ``u(s) exp(i xi . x)`` is stored as ten complex profiles over a
uniform grid in ``s``, in the fixed component order

    ss, s1, s2, s3, 11, 22, 33, 12, 13, 23

so ``data[0]`` is ``u_ss``, ``data[1:4]`` is ``u_sSigma`` and ``data[4:]``
holds the independent entries of ``u_SigmaSigma``. One-forms use the order
``s, 1, 2, 3``. Tangential derivatives act exactly as multiplication by
``i xi``; ``d/ds`` is discretised with second-order central differences and
second-order one-sided stencils at ``s = +-T``.

All operators here assume the flat background ``g = ds^2 + delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, ShapeError
from .geometry import GeometrySpec, frequency

COMPONENTS = ("ss", "s1", "s2", "s3", "11", "22", "33", "12", "13", "23")
SS = 0
S_IDX = (1, 2, 3)
# (i, j) -> position in the 10-vector, for spatial i, j in 0..2
_SYM = {(0, 0): 4, (1, 1): 5, (2, 2): 6, (0, 1): 7, (0, 2): 8, (1, 2): 9}
SIGMA_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def sym_index(i: int, j: int) -> int:
    """Position of the spatial entry ``u_ij`` in the 10-component vector."""
    return _SYM[(i, j) if i <= j else (j, i)]


def pair_multiplicity(i: int, j: int) -> int:
    """How often a stored entry occurs in a full contraction over ``i, j``."""
    return 1 if i == j else 2


# full 4x4 index -> component position
_FULL = np.empty((4, 4), dtype=int)
_FULL[0, 0] = SS
for _i in range(3):
    _FULL[0, _i + 1] = _FULL[_i + 1, 0] = S_IDX[_i]
    for _j in range(3):
        _FULL[_i + 1, _j + 1] = sym_index(_i, _j)

# pointwise weights of the V_2 pairing: 1 for ss, 2 for s-Sigma, 1/2 by multiplicity for Sigma-Sigma
_V2_WEIGHTS = np.array([1.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
# tr_g with g = ds^2 + delta
_TRACE = np.array([1.0, 0, 0, 0, 1.0, 1.0, 1.0, 0, 0, 0])
_METRIC = _TRACE.copy()


@dataclass(frozen=True)
class ModeIndex:
    n: tuple[int, int, int]
    xi: np.ndarray

    @property
    def xi_norm(self) -> float:
        return float(np.linalg.norm(self.xi))

    @property
    def xi_sq(self) -> float:
        return float(self.xi @ self.xi)


def mode_index(geom: GeometrySpec, n) -> ModeIndex:
    n = tuple(int(v) for v in n)
    return ModeIndex(n, frequency(geom, n))


def raw_mode(xi) -> ModeIndex:
    """Mode with a prescribed frequency vector, not tied to a torus lattice."""
    return ModeIndex((0, 0, 0), np.asarray(xi, dtype=float))


@dataclass(frozen=True, eq=False)
class Grid1D:
    M: int
    s_values: np.ndarray
    h: float

    @property
    def T(self) -> float:
        return float(self.s_values[-1])

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.M, self.h)
        w[0] = w[-1] = self.h / 2
        return w

    def node(self, side: int) -> int:
        return 0 if side < 0 else self.M - 1


def make_grid(T: float, M: int) -> Grid1D:
    if M < 5:
        raise InvalidParameterError(f"need at least 5 grid points, got {M}")
    if not T > 0:
        raise InvalidParameterError(f"T must be positive, got {T}")
    s = np.linspace(-T, T, M)
    return Grid1D(int(M), s, float(s[1] - s[0]))


def _same_grid(a: Grid1D, b: Grid1D) -> bool:
    return a is b or (a.M == b.M and np.array_equal(a.s_values, b.s_values))


# ---------------------------------------------------------------- differencing

def first_derivative_stencil(side: int, h: float):
    """Offsets and weights of the one-sided first derivative at an end node."""
    if side < 0:
        return np.array([0, 1, 2]), np.array([-3.0, 4.0, -1.0]) / (2 * h)
    return np.array([0, -1, -2]), np.array([3.0, -4.0, 1.0]) / (2 * h)


def d_ds(f: np.ndarray, h: float) -> np.ndarray:
    """First derivative along the last axis."""
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2 * h)
    out[..., 0] = (-3 * f[..., 0] + 4 * f[..., 1] - f[..., 2]) / (2 * h)
    out[..., -1] = (3 * f[..., -1] - 4 * f[..., -2] + f[..., -3]) / (2 * h)
    return out


def d2_ds2(f: np.ndarray, h: float) -> np.ndarray:
    """Second derivative along the last axis; 4-point one-sided stencils at the ends."""
    out = np.empty_like(f)
    h2 = h * h
    out[..., 1:-1] = (f[..., 2:] - 2 * f[..., 1:-1] + f[..., :-2]) / h2
    out[..., 0] = (2 * f[..., 0] - 5 * f[..., 1] + 4 * f[..., 2] - f[..., 3]) / h2
    out[..., -1] = (2 * f[..., -1] - 5 * f[..., -2] + 4 * f[..., -3] - f[..., -4]) / h2
    return out


# ---------------------------------------------------------------- field types

@dataclass(eq=False)
class ModeTensor1:
    """One Fourier mode of a 1-form: ``data`` has shape ``(4, M)``.

    ``ds`` optionally carries the exact s-derivative of ``data``; first-order
    operators use it instead of differencing when present.
    """

    data: np.ndarray
    grid: Grid1D
    ds: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (4, self.grid.M):
            raise ShapeError(f"ModeTensor1 needs shape (4, {self.grid.M}), got {self.data.shape}")
        if self.ds is not None:
            self.ds = np.asarray(self.ds, dtype=complex)
            if self.ds.shape != self.data.shape:
                raise ShapeError("derivative profile shape mismatch")

    @property
    def omega_s(self):
        return self.data[0]

    @property
    def omega_Sigma(self):
        return self.data[1:4]

    def derivative(self) -> np.ndarray:
        return self.ds if self.ds is not None else d_ds(self.data, self.grid.h)

    @classmethod
    def zeros(cls, grid: Grid1D):
        return cls(np.zeros((4, grid.M), dtype=complex), grid)


@dataclass(eq=False)
class ModeTensor2:
    """One Fourier mode of a symmetric 2-tensor: ``data`` has shape ``(10, M)``."""

    data: np.ndarray
    grid: Grid1D
    ds: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (10, self.grid.M):
            raise ShapeError(f"ModeTensor2 needs shape (10, {self.grid.M}), got {self.data.shape}")
        if self.ds is not None:
            self.ds = np.asarray(self.ds, dtype=complex)
            if self.ds.shape != self.data.shape:
                raise ShapeError("derivative profile shape mismatch")

    @property
    def u_ss(self):
        return self.data[0]

    @property
    def u_sSigma(self):
        return self.data[1:4]

    @property
    def u_SigmaSigma(self):
        return self.data[4:10]

    def derivative(self) -> np.ndarray:
        return self.ds if self.ds is not None else d_ds(self.data, self.grid.h)

    def full(self, j: int) -> np.ndarray:
        """The 4x4 component matrix at grid node ``j``."""
        return self.data[:, j][_FULL]

    def flat(self) -> np.ndarray:
        """Component-major flattening, index ``c * M + j``."""
        return self.data.reshape(-1)

    @classmethod
    def from_flat(cls, vec, grid: Grid1D):
        return cls(np.asarray(vec).reshape(10, grid.M), grid)

    @classmethod
    def zeros(cls, grid: Grid1D):
        return cls(np.zeros((10, grid.M), dtype=complex), grid)

    @classmethod
    def metric(cls, grid: Grid1D):
        """The flat background metric ``g`` as a constant profile."""
        return cls(np.outer(_METRIC, np.ones(grid.M)), grid)


def trace_g(u: ModeTensor2) -> np.ndarray:
    return _TRACE @ u.data


# ---------------------------------------------------------------- operators

def trace_reverse(u: ModeTensor2) -> ModeTensor2:
    """``I u = u - 1/2 tr_g(u) g``, pointwise."""
    tr = trace_g(u)
    ds = None
    if u.ds is not None:
        ds = u.ds - 0.5 * np.outer(_METRIC, _TRACE @ u.ds)
    return ModeTensor2(u.data - 0.5 * np.outer(_METRIC, tr), u.grid, ds)


def divergence(u: ModeTensor2, mode: ModeIndex) -> ModeTensor1:
    """``(delta u)_mu = -2 nabla^lambda u_{lambda mu}``."""
    du = u.derivative()
    ixi = 1j * mode.xi
    out = np.empty((4, u.grid.M), dtype=complex)
    out[0] = -2 * (du[SS] + ixi @ u.data[1:4])
    for i in range(3):
        spatial = sum(ixi[j] * u.data[sym_index(j, i)] for j in range(3))
        out[1 + i] = -2 * (du[S_IDX[i]] + spatial)
    return ModeTensor1(out, u.grid)


def _sym_gradient_data(w: np.ndarray, dw: np.ndarray, xi: np.ndarray) -> np.ndarray:
    ixi = 1j * xi
    out = np.empty((10,) + w.shape[1:], dtype=complex)
    out[SS] = dw[0]
    for i in range(3):
        out[S_IDX[i]] = 0.5 * (dw[1 + i] + ixi[i] * w[0])
    for i, j in SIGMA_PAIRS:
        out[sym_index(i, j)] = 0.5 * (ixi[i] * w[1 + j] + ixi[j] * w[1 + i])
    return out


def sym_gradient(omega: ModeTensor1, mode: ModeIndex) -> ModeTensor2:
    """``(d omega)_{ab} = 1/2 (nabla_a omega_b + nabla_b omega_a)``."""
    return ModeTensor2(_sym_gradient_data(omega.data, omega.derivative(), mode.xi), omega.grid)


def gauge_potential(omega: ModeTensor1, mode: ModeIndex, second_derivative=None) -> ModeTensor2:
    """``K omega = I d omega``.

    If ``omega`` carries an exact derivative and ``second_derivative`` is
    given, the result carries its exact s-derivative ``K(d_s omega)`` as well.
    """
    u = trace_reverse(sym_gradient(omega, mode))
    if second_derivative is not None:
        if omega.ds is None:
            raise InvalidParameterError("an exact second derivative needs an exact first derivative")
        d_omega = ModeTensor1(omega.ds, omega.grid, second_derivative)
        u.ds = trace_reverse(sym_gradient(d_omega, mode)).data
    return u


def apply_D1(omega: ModeTensor1, mode: ModeIndex, Lambda: float = 0.0) -> ModeTensor1:
    """``D_1 = delta K = -Delta_1 - Lambda``; per mode ``-d_s^2 + |xi|^2 - Lambda``."""
    data = -d2_ds2(omega.data, omega.grid.h) + (mode.xi_sq - Lambda) * omega.data
    return ModeTensor1(data, omega.grid)


def riemann_term(u: ModeTensor2) -> np.ndarray:
    # 2 Riem_g(u); identically zero on the flat product
    return np.zeros_like(u.data)


def apply_D2(u: ModeTensor2, mode: ModeIndex) -> ModeTensor2:
    """``D_2 = -Delta_2 + 2 Riem_g``, componentwise ``-d_s^2 + |xi|^2`` when flat."""
    data = -d2_ds2(u.data, u.grid.h) + mode.xi_sq * u.data + riemann_term(u)
    return ModeTensor2(data, u.grid)


# ---------------------------------------------------------------- inner products

def pointwise_pairing(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``conj(u)_ss v_ss + 2 gamma^-1(conj(u)_sS, v_sS) + (gamma^-1)^2(conj(u)_SS, v_SS)`` per node."""
    return np.einsum("c,c...,c...->...", _V2_WEIGHTS, np.conj(u), v)


def inner_product_V2(u: ModeTensor2, v: ModeTensor2, geom: GeometrySpec) -> complex:
    """L^2 pairing ``2 int ds int_Sigma (...) vol`` of two modes with the same ``xi``.

    Mode functions are the unnormalised ``u(s) exp(i xi . x)``, so the torus
    integral contributes the volume ``L1 L2 L3``. The overall factor 2 is the
    ``k!`` normalisation for 2-tensors.
    """
    if not _same_grid(u.grid, v.grid):
        raise ShapeError("inner product of profiles on different grids")
    w = u.grid.trapezoid_weights()
    return complex(2.0 * geom.volume * np.sum(w * pointwise_pairing(u.data, v.data)))


def inner_product_I(u: ModeTensor2, v: ModeTensor2, geom: GeometrySpec) -> complex:
    """The indefinite pairing ``(u, I v)_{V2}``."""
    return inner_product_V2(u, trace_reverse(v), geom)


# ---------------------------------------------------------------- identities

def smooth_one_form(grid: Grid1D, rng: np.random.Generator, harmonics: int = 3) -> ModeTensor1:
    """Random smooth profile: a short trigonometric series per component."""
    t = grid.s_values / grid.T
    coef = rng.normal(size=(4, harmonics, 2)) + 1j * rng.normal(size=(4, harmonics, 2))
    k = np.arange(1, harmonics + 1)[:, None] * np.pi / 2
    basis = np.stack([np.cos(k * t), np.sin(k * t)], axis=-1)
    return ModeTensor1(np.einsum("ckp,kmp->cm", coef, basis), grid)


def intertwining_defects(omega: ModeTensor1, mode: ModeIndex, margin: int = 2):
    """Sup-norm defects of ``delta K = D_1`` and ``K D_1 = D_2 K`` on interior nodes.

    All derivatives are differenced; ``margin`` nodes at each end are skipped
    because composed one-sided stencils there are only first order. On the
    remaining nodes the central stencils commute, so the second defect is
    roundoff, growing like ``eps / h^3``, rather than a truncation error.
    """
    inner = slice(margin, omega.grid.M - margin)
    u = gauge_potential(omega, mode)
    e1 = divergence(u, mode).data - apply_D1(omega, mode).data
    e2 = gauge_potential(apply_D1(omega, mode), mode).data - apply_D2(u, mode).data
    return float(np.abs(e1[:, inner]).max()), float(np.abs(e2[:, inner]).max())
