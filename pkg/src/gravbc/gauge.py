"""Gauge fields vanishing on the boundary and the gauge invariance of boundary conditions.

A gauge field is one Fourier mode ``omega(s) exp(i xi . x)`` of a 1-form.
Besides its samples it carries the exact first and second s-derivatives, so
that ``u = K omega`` comes with an exact normal derivative and boundary
residuals of ``u`` are free of differencing error. Passing
``derivative="fd"`` drops the exact derivative of ``u`` and falls back to the
one-sided stencil, which is how grid convergence is measured.

Admissible fields (``omega = 0`` on the boundary, ``D_1 omega = 0`` near it)
are built from exact solutions of ``-omega'' + |xi|^2 omega = 0`` in collars
of width ``w`` at both ends, glued to an interior profile by a quintic
smoothstep that is identically 1 within ``w`` of the boundary and 0 beyond
``2 w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .boundary import (
    SIDES,
    BoundaryConditionSpec,
    boundary_jet,
    boundary_residual,
)
from .errors import InvalidParameterError, ShapeError
from .geometry import GeometrySpec
from .tensor_ops import Grid1D, ModeIndex, ModeTensor1, ModeTensor2, gauge_potential

DERIVATIVE_ROUTES = ("exact", "fd")


@dataclass(eq=False)
class GaugeField:
    """One mode of a 1-form with its exact s-derivatives.

    Attributes
    ----------
    omega : ModeTensor1
        Samples, with ``omega.ds`` holding the exact first derivative.
    d2 : ndarray, shape (4, M)
        Exact second derivative.
    """

    mode: ModeIndex
    omega: ModeTensor1
    d2: np.ndarray
    construction: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.omega.ds is None:
            raise InvalidParameterError("a gauge field needs its exact first derivative")
        self.d2 = np.asarray(self.d2, dtype=complex)
        if self.d2.shape != self.omega.data.shape:
            raise ShapeError("second-derivative profile shape mismatch")

    @property
    def grid(self) -> Grid1D:
        return self.omega.grid

    def potential(self, derivative: str = "exact") -> ModeTensor2:
        """``u = K omega``, carrying its exact s-derivative on the exact route."""
        if derivative not in DERIVATIVE_ROUTES:
            raise InvalidParameterError(f"derivative must be one of {DERIVATIVE_ROUTES}")
        u = gauge_potential(self.omega, self.mode, self.d2)
        if derivative == "fd":
            u.ds = None
        return u

    def d1_exact(self) -> np.ndarray:
        """``D_1 omega = -omega'' + |xi|^2 omega`` from the exact jets (flat, no Lambda)."""
        return -self.d2 + self.mode.xi_sq * self.omega.data


@dataclass(eq=False)
class CollarGaugeField(GaugeField):
    collar_width: float = 0.0


def _smoothstep(t):
    """Quintic smoothstep and its first two derivatives, clamped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return (t ** 3 * (10 - 15 * t + 6 * t * t),
            30 * t * t * (1 - t) ** 2,
            60 * t * (1 - t) * (1 - 2 * t))


def _edge_profile(s, end, k):
    """``sinh(k (s - end))`` or ``s - end`` when ``k = 0``, with two derivatives."""
    x = s - end
    if k == 0:
        return x, np.ones_like(s), np.zeros_like(s)
    return np.sinh(k * x), k * np.cosh(k * x), k * k * np.sinh(k * x)


def make_collar_gauge_field(mode: ModeIndex, geom: GeometrySpec, grid: Grid1D, amplitudes,
                            collar_width: float | None = None,
                            interior_amplitudes=None) -> CollarGaugeField:
    """Admissible gauge field with exact collar solutions at both ends.

    Parameters
    ----------
    amplitudes : 4 complex
        Coefficient of the collar profile per component ``(s, 1, 2, 3)``.
    collar_width : float, optional
        Width ``w`` of each collar, default ``T/4``; must satisfy ``w < T/2``.
    interior_amplitudes : 4 complex, optional
        Coefficients of the interior profile ``cos(pi s / 2T)``; default
        ``amplitudes``.
    """
    T = geom.T
    if not np.isclose(grid.T, T):
        raise InvalidParameterError("grid and geometry disagree on T")
    w = T / 4 if collar_width is None else float(collar_width)
    if not 0 < w < T / 2:
        raise InvalidParameterError(f"collar width must lie in (0, T/2), got {w}")
    A = np.asarray(amplitudes, dtype=complex)
    B = A if interior_amplitudes is None else np.asarray(interior_amplitudes, dtype=complex)
    if A.shape != (4,) or B.shape != (4,):
        raise ShapeError("amplitudes must have four entries")

    s = grid.s_values
    k = mode.xi_norm
    # cutoffs: chi_plus == 1 on [T - w, T], == 0 below T - 2w; chi_minus mirrored
    cp, dcp, d2cp = _smoothstep((s - (T - 2 * w)) / w)
    cm, dcm, d2cm = _smoothstep(((-T + 2 * w) - s) / w)
    dcp, d2cp = dcp / w, d2cp / w ** 2
    dcm, d2cm = -dcm / w, d2cm / w ** 2
    ep = _edge_profile(s, T, k)
    em = _edge_profile(s, -T, k)
    q = np.pi / (2 * T)
    p = (np.cos(q * s), -q * np.sin(q * s), -q * q * np.cos(q * s))
    rest = (1 - cp - cm, -dcp - dcm, -d2cp - d2cm)

    def blend(f, chi):
        return (chi[0] * f[0],
                chi[1] * f[0] + chi[0] * f[1],
                chi[2] * f[0] + 2 * chi[1] * f[1] + chi[0] * f[2])

    parts = [blend(ep, (cp, dcp, d2cp)), blend(em, (cm, dcm, d2cm)), blend(p, rest)]
    jets = []
    for order in range(3):
        edge = parts[0][order] + parts[1][order]
        jets.append(np.outer(A, edge) + np.outer(B, parts[2][order]))
    omega = ModeTensor1(jets[0], grid, jets[1])
    construction = {"family": "collar-sinh" if k > 0 else "collar-linear",
                    "amplitudes": A.tolist(), "interior": "cos(pi s / 2T)",
                    "interior_amplitudes": B.tolist()}
    return CollarGaugeField(mode, omega, jets[2], construction, collar_width=w)


def make_polynomial_gauge_field(mode: ModeIndex, grid: Grid1D, coefficients) -> GaugeField:
    """Gauge field with polynomial components, coefficients in increasing degree.

    ``coefficients`` maps a component index (0 for ``s``, 1..3 spatial) to a
    coefficient list; missing components vanish. No admissibility is implied.
    """
    s = grid.s_values
    jets = np.zeros((3, 4, grid.M), dtype=complex)
    for c, coeffs in dict(coefficients).items():
        if c not in range(4):
            raise InvalidParameterError(f"component index must be 0..3, got {c}")
        poly = Polynomial(coeffs)
        for order in range(3):
            jets[order, c] = poly.deriv(order)(s) if order else poly(s)
    construction = {"family": "polynomial",
                    "coefficients": {int(c): list(map(complex, v)) for c, v in dict(coefficients).items()}}
    return GaugeField(mode, ModeTensor1(jets[0], grid, jets[1]), jets[2], construction)


def random_collar_fields(geom: GeometrySpec, grid: Grid1D, modes, count: int,
                         rng: np.random.Generator) -> list[CollarGaugeField]:
    """``count`` collar fields with random complex amplitudes, cycling through ``modes``."""
    fields = []
    for n in range(count):
        mode = modes[n % len(modes)]
        amp = rng.normal(size=4) + 1j * rng.normal(size=4)
        interior = rng.normal(size=4) + 1j * rng.normal(size=4)
        fields.append(make_collar_gauge_field(mode, geom, grid, amp, interior_amplitudes=interior))
    return fields


def is_admissible(gf: GaugeField, width: float | None = None, tol: float = 1e-10) -> bool:
    """Whether ``omega`` vanishes at both ends and ``D_1 omega = 0`` within ``width`` of them."""
    grid = gf.grid
    if width is None:
        width = getattr(gf, "collar_width", 0.0) or grid.T / 4
    scale = max(1.0, float(np.max(np.abs(gf.omega.data))))
    ends = np.abs(gf.omega.data[:, [0, -1]]).max()
    near = grid.T - np.abs(grid.s_values) <= width + 1e-12
    d1 = np.abs(gf.d1_exact()[:, near]).max()
    return bool(ends <= tol * scale and d1 <= tol * scale * max(1.0, gf.mode.xi_sq))


def _require_flat(geom: GeometrySpec):
    if not geom.is_flat:
        raise InvalidParameterError("gauge checks are implemented for the flat product only")


def gauge_invariance_residual(gf: GaugeField, spec: BoundaryConditionSpec, geom: GeometrySpec,
                              derivative: str = "exact") -> float:
    """Largest boundary residual of ``K omega`` over both sides.

    For Dirichlet conditions this is the largest boundary value of ``K omega``.
    """
    _require_flat(geom)
    u = gf.potential(derivative)
    return max(boundary_residual(u, spec, geom, gf.mode, sd).sup() for sd in SIDES)


# ---------------------------------------------------------------- relations

RELATION_NAMES = ("u_ss", "u_sS", "u_SS", "tr u_SS",
                  "d_s u_ss", "d_s u_sS", "d_s u_SS", "d_s tr u_SS")


@dataclass
class RelationEntry:
    name: str
    side: int
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def difference(self) -> float:
        return float(np.max(np.abs(np.asarray(self.lhs) - np.asarray(self.rhs))))


@dataclass
class RelationsReport:
    entries: list

    @property
    def max_difference(self) -> float:
        return max((e.difference for e in self.entries), default=0.0)


def _sym(m):
    return np.array([m[0, 0], m[1, 1], m[2, 2], m[0, 1], m[0, 2], m[1, 2]])


def relations_check(gf: GaugeField, geom: GeometrySpec, derivative: str = "exact") -> RelationsReport:
    """Boundary values and normal derivatives of ``u = K omega`` against ``omega``.

    The right-hand sides are the flat-space forms of the eight boundary
    relations, built from the exact jets of ``omega``; ``delta_Sigma`` acts
    on 1-forms as ``-i xi . eta`` and ``d_Sigma`` is the symmetrised gradient.
    The left-hand sides use ``derivative`` for ``d_s u``.
    """
    _require_flat(geom)
    u = gf.potential(derivative)
    ixi = 1j * gf.mode.xi
    entries = []
    for sd in SIDES:
        j = gf.grid.node(sd)
        val, der = boundary_jet(u, sd)
        w1 = gf.omega.ds[:, j]
        w2 = gf.d2[:, j]
        delta_w1 = -ixi @ w1[1:]
        grad_w1 = 0.5 * (np.outer(ixi, w1[1:]) + np.outer(w1[1:], ixi))
        full_val = val[4:]
        full_der = der[4:]
        tr_val = full_val[:3].sum()
        tr_der = full_der[:3].sum()
        eye6 = np.array([1, 1, 1, 0, 0, 0], dtype=float)
        rhs = [
            0.5 * w1[0],
            0.5 * w1[1:],
            -0.5 * w1[0] * eye6,
            -1.5 * w1[0],
            0.5 * (w2[0] + delta_w1),
            0.5 * (w2[1:] + ixi * w1[0]),
            _sym(grad_w1) - 0.5 * eye6 * (w2[0] - delta_w1),
            -1.5 * w2[0] + 0.5 * delta_w1,
        ]
        lhs = [val[0], val[1:4], full_val, tr_val, der[0], der[1:4], full_der, tr_der]
        entries.extend(RelationEntry(n, sd, l, r) for n, l, r in zip(RELATION_NAMES, lhs, rhs))
    return RelationsReport(entries)


@dataclass
class Eq2Report:
    """Conditions (a), (b) of ``K omega`` against ``-1/2`` times the normal-derivative form of ``D_1 omega``."""

    side: list
    residual_ab: list
    expected_ab: list

    @property
    def max_difference(self) -> float:
        return max(float(np.max(np.abs(r - e))) for r, e in zip(self.residual_ab, self.expected_ab))


def eq2_check(gf: GaugeField, geom: GeometrySpec, spec: BoundaryConditionSpec | None = None,
              derivative: str = "exact") -> Eq2Report:
    """Compare conditions (a), (b) of ``K omega`` with ``D_1 omega`` at the boundary.

    On the boundary ``omega = 0``, so ``D_1 omega`` reduces to ``-omega''``
    (flat background), and conditions (a), (b) equal ``-1/2`` of it, i.e.
    ``omega''/2``. Conditions (a)-(c) are shared by the whole general family,
    so the Anderson rows are used unless ``spec`` says otherwise.
    """
    _require_flat(geom)
    spec = spec or BoundaryConditionSpec.anderson()
    u = gf.potential(derivative)
    sides, got, want = [], [], []
    for sd in SIDES:
        j = gf.grid.node(sd)
        res = boundary_residual(u, spec, geom, gf.mode, sd)
        d1_normal = -gf.d2[:, j]
        sides.append(sd)
        got.append(res.values[:4])
        want.append(-0.5 * d1_normal)
    return Eq2Report(sides, got, want)
