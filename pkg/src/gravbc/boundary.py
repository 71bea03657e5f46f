"""Boundary conditions at ``s = +-T`` for the linearised Einstein operator.

Three families are supported:

* ``dirichlet`` -- all ten components vanish;
* ``anderson`` -- the linearised Anderson conditions (harmonic gauge on the
  boundary, fixed conformal class, fixed mean curvature);
* ``general`` -- conditions (a)-(c) of the Anderson set plus the most general
  gauge-invariant first-order scalar condition with coefficients
  ``C1, C2, V, S`` (constants per side).

Every condition is linear in the boundary jet ``(u, d_s u)``, so at one side
and one Fourier mode it is a pair of 10x10 matrices ``(R_val, R_der)`` with
``residual = R_val @ u + R_der @ d_s u``. Row order: (a), (b)_1..3, the five
independent entries (11, 22, 12, 13, 23) of the traceless part (c), (d).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpecError, InvalidParameterError, InvalidSpecError
from .geometry import GeometrySpec, SliceData, slice_data
from .tensor_ops import (
    S_IDX,
    SS,
    Grid1D,
    ModeIndex,
    ModeTensor2,
    first_derivative_stencil,
    pair_multiplicity,
    sym_index,
)

DIRICHLET = "dirichlet"
ANDERSON = "anderson"
GENERAL = "general"
SIDES = (-1, 1)

# traceless entries kept by condition (c)
C_PAIRS = ((0, 0), (1, 1), (0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class SideCoefficients:
    C1: float = 0.0
    C2: float = 0.0
    V: tuple = (0.0, 0.0, 0.0)
    S: tuple = ((0.0, 0.0, 0.0),) * 3

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        S = np.asarray(self.S, dtype=float)
        if V.shape != (3,):
            raise InvalidParameterError(f"V must be a 3-vector, got shape {V.shape}")
        if S.shape == (6,):
            S = symmetric_from_six(S)
        if S.shape != (3, 3) or not np.allclose(S, S.T):
            raise InvalidParameterError("S must be a symmetric 3x3 matrix")
        object.__setattr__(self, "V", tuple(V))
        object.__setattr__(self, "S", tuple(map(tuple, S)))

    @property
    def V_array(self):
        return np.array(self.V)

    @property
    def S_array(self):
        return np.array(self.S)


def symmetric_from_six(vals) -> np.ndarray:
    """Symmetric matrix from entries in the order (11, 22, 33, 12, 13, 23)."""
    a11, a22, a33, a12, a13, a23 = (float(v) for v in vals)
    return np.array([[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]])


@dataclass(frozen=True)
class BoundaryConditionSpec:
    kind: str
    coefficients: dict = field(default_factory=dict)  # side -> SideCoefficients

    def __post_init__(self):
        if self.kind not in (DIRICHLET, ANDERSON, GENERAL):
            raise InvalidParameterError(f"unknown boundary condition kind {self.kind!r}")
        if self.kind == GENERAL and set(self.coefficients) != set(SIDES):
            raise InvalidParameterError("general conditions need coefficients for both sides")

    @classmethod
    def dirichlet(cls):
        return cls(DIRICHLET)

    @classmethod
    def anderson(cls):
        return cls(ANDERSON)

    @classmethod
    def general(cls, C1=0.0, C2=0.0, V=(0.0, 0.0, 0.0), S=np.zeros((3, 3)), *, minus=None, plus=None):
        """General conformal conditions; ``minus``/``plus`` override one side."""
        shared = SideCoefficients(C1, C2, V, S)
        return cls(GENERAL, {-1: minus or shared, 1: plus or shared})

    def side(self, side: int, geom: GeometrySpec) -> SideCoefficients:
        """Coefficients at one side; Anderson expands to ``C1 = 3 tr k, C2 = 1``."""
        if self.kind == ANDERSON:
            sd = slice_data(geom, side * geom.T)
            return SideCoefficients(3.0 * sd.trace_k, 1.0)
        if self.kind == GENERAL:
            return self.coefficients[side]
        raise InvalidParameterError("Dirichlet conditions carry no coefficients")

    def expand(self, geom: GeometrySpec) -> "BoundaryConditionSpec":
        """Anderson as an explicit member of the general family."""
        if self.kind != ANDERSON:
            return self
        return BoundaryConditionSpec(GENERAL, {sd: self.side(sd, geom) for sd in SIDES})


@dataclass
class SpecDiagnostics:
    ok: bool
    deviation: dict  # side -> Frobenius distance of S from span(gamma)
    messages: list


def conformal_deviation(S: np.ndarray, gamma: np.ndarray) -> float:
    """``min_c ||S - c gamma||_F``."""
    c = np.sum(S * gamma) / np.sum(gamma * gamma)
    return float(np.linalg.norm(S - c * gamma))


def validate_spec(spec: BoundaryConditionSpec, geom: GeometrySpec) -> SpecDiagnostics:
    if spec.kind != GENERAL:
        return SpecDiagnostics(True, {}, [])
    deviation, messages = {}, []
    for sd in SIDES:
        co = spec.coefficients[sd]
        gamma = slice_data(geom, sd * geom.T).gamma
        deviation[sd] = conformal_deviation(co.S_array, gamma)
        if co.C2 == 0 and deviation[sd] <= 1e-12 * max(1.0, np.linalg.norm(co.S_array)):
            messages.append(f"side {sd:+d}: C2 = 0 and S is proportional to gamma")
    return SpecDiagnostics(not messages, deviation, messages)


def _require_valid(spec, geom):
    diag = validate_spec(spec, geom)
    if not diag.ok:
        raise InvalidSpecError("; ".join(diag.messages))


# ---------------------------------------------------------------- residual map

def residual_operator(spec: BoundaryConditionSpec, geom: GeometrySpec, side: int, xi,
                      sd: SliceData | None = None):
    """Return ``(R_val, R_der)`` with ``residual = R_val @ u + R_der @ d_s u``.

    No validation happens here; callers that need a valid spec check it first.
    """
    xi = np.asarray(xi, dtype=float)
    R_val = np.zeros((10, 10), dtype=complex)
    R_der = np.zeros((10, 10), dtype=complex)
    if spec.kind == DIRICHLET:
        R_val[:] = np.eye(10)
        return R_val, R_der

    if sd is None:
        sd = slice_data(geom, side * geom.T)
    co = spec.side(side, geom)
    gamma = sd.gamma
    ginv = np.linalg.inv(gamma)
    k = sd.k
    trk = sd.trace_k
    k_up = ginv @ k @ ginv
    # d_s gamma^-1 = -gamma^-1 (d_s gamma) gamma^-1 with d_s gamma = -2k
    dginv = 2.0 * k_up
    ixi_up = 1j * (ginv @ xi)

    def add_trace(row, mat, coeff, weight):
        # row += coeff * sum_kl weight_kl u_kl over the full symmetric contraction
        for i, j in ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)):
            mat[row, sym_index(i, j)] += coeff * pair_multiplicity(i, j) * weight[i, j]

    # (a) d_s u_ss - delta_Sigma u_sSigma - tr(k) u_ss + (gamma^-1)^2(k, u_SS)
    R_der[0, SS] = 1.0
    R_val[0, SS] = -trk
    for j in range(3):
        R_val[0, S_IDX[j]] += ixi_up[j]
    add_trace(0, R_val, 1.0, k_up)

    # (b) d_s u_sj - 1/2 (delta_Sigma u_SS)_j - tr(k) u_sj
    for j in range(3):
        row = 1 + j
        R_der[row, S_IDX[j]] = 1.0
        R_val[row, S_IDX[j]] = -trk
        for i in range(3):
            R_val[row, sym_index(i, j)] += ixi_up[i]

    # (c) traceless part of u_SS with respect to gamma
    for r, (i, j) in enumerate(C_PAIRS):
        row = 4 + r
        R_val[row, sym_index(i, j)] += 1.0
        add_trace(row, R_val, -gamma[i, j] / 3.0, ginv)

    # (d) the general scalar condition
    row = 9
    C1, C2, V, S = co.C1, co.C2, co.V_array, co.S_array
    S_up = ginv @ S @ ginv
    trS = float(np.sum(S_up * gamma))
    cV = complex(V @ ixi_up)
    # (C1 + V.d)(u_ss + tr/3)
    R_val[row, SS] += C1 + cV
    add_trace(row, R_val, (C1 + cV) / 3.0, ginv)
    # C2 (d_s tr - d_s u_ss - 4/3 tr tr(k))
    add_trace(row, R_der, C2, ginv)
    add_trace(row, R_val, C2, dginv)
    R_der[row, SS] -= C2
    add_trace(row, R_val, -C2 * 4.0 / 3.0 * trk, ginv)
    # (gamma^-1)^2 (S, d_s u_SS - 2 d_Sigma u_sSigma - gamma (d_s u_ss + 2/3 tr tr(k)))
    add_trace(row, R_der, 1.0, S_up)
    s_xi = S_up @ xi
    for j in range(3):
        R_val[row, S_IDX[j]] += -2j * s_xi[j]
    R_der[row, SS] -= trS
    add_trace(row, R_val, -trS * 2.0 / 3.0 * trk, ginv)
    return R_val, R_der


# ---------------------------------------------------------------- residuals

@dataclass
class BoundaryResidual:
    """Residual vector at one side.

    For Dirichlet conditions ``values`` are the ten boundary component values
    and the (a)-(d) accessors are not meaningful.
    """

    side: int
    kind: str
    values: np.ndarray

    @property
    def res_a(self):
        return self.values[0]

    @property
    def res_b(self):
        return self.values[1:4]

    @property
    def res_c(self):
        return self.values[4:9]

    @property
    def res_d(self):
        return self.values[9]

    def c_matrix(self, gamma=np.eye(3)) -> np.ndarray:
        """Rebuild the traceless symmetric matrix of condition (c).

        Assumes ``gamma`` proportional to the identity, as for every shipped geometry.
        """
        m11, m22, m12, m13, m23 = self.res_c
        m33 = -(m11 + m22)
        return np.array([[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]])

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def boundary_jet(u: ModeTensor2, side: int):
    """Values and s-derivatives of ``u`` at one end node."""
    j = u.grid.node(side)
    if u.ds is not None:
        return u.data[:, j], u.ds[:, j]
    offsets, weights = first_derivative_stencil(side, u.grid.h)
    return u.data[:, j], u.data[:, j + offsets] @ weights


def boundary_residual(u: ModeTensor2, spec: BoundaryConditionSpec, geom: GeometrySpec,
                      mode: ModeIndex, side: int) -> BoundaryResidual:
    _require_valid(spec, geom)
    R_val, R_der = residual_operator(spec, geom, side, mode.xi)
    val, der = boundary_jet(u, side)
    return BoundaryResidual(side, spec.kind, R_val @ val + R_der @ der)


def constraint_rows(spec: BoundaryConditionSpec, geom: GeometrySpec, mode: ModeIndex,
                    grid: Grid1D, check_rank: bool = True) -> np.ndarray:
    """Boundary rows over the ``10 M`` flattened unknowns, shape ``(2, 10, 10 M)``.

    Index 0 holds the rows at ``s = -T``, index 1 those at ``s = +T``.
    """
    _require_valid(spec, geom)
    M = grid.M
    rows = np.zeros((2, 10, 10 * M), dtype=complex)
    for n, side in enumerate(SIDES):
        R_val, R_der = residual_operator(spec, geom, side, mode.xi)
        j = grid.node(side)
        offsets, weights = first_derivative_stencil(side, grid.h)
        for c in range(10):
            rows[n, :, c * M + j] += R_val[:, c]
            for off, w in zip(offsets, weights):
                rows[n, :, c * M + j + off] += w * R_der[:, c]
        if check_rank:
            sv = np.linalg.svd(rows[n], compute_uv=False)
            if sv[-1] <= 1e-10 * sv[0]:
                raise DegenerateSpecError(
                    f"boundary rows at side {side:+d} have rank < 10", side=side)
    return rows


def random_side_coefficients(rng: np.random.Generator, scale: float = 1.0) -> SideCoefficients:
    """Normally distributed ``C1, C2, V, S``; ``S`` is redrawn until it is not a multiple of ``delta``."""
    C1, C2 = rng.normal(scale=scale, size=2)
    V = rng.normal(scale=scale, size=3)
    while True:
        S = rng.normal(scale=scale, size=(3, 3))
        S = 0.5 * (S + S.T)
        if conformal_deviation(S, np.eye(3)) > 1e-3 * scale:
            return SideCoefficients(C1, C2, V, S)


def random_general_spec(rng: np.random.Generator, scale: float = 1.0) -> BoundaryConditionSpec:
    """Valid general conformal spec with independent coefficients on each side."""
    return BoundaryConditionSpec(GENERAL, {sd: random_side_coefficients(rng, scale) for sd in SIDES})
