"""First variation of the mean curvature of a slice ``{s = s0}``.

The background is ``g = ds^2 + a(s)^2 delta`` and ``g(lambda) = g + lambda h``.
:func:`mean_curvature_exact` evaluates the trace of the second fundamental
form of the perturbed metric directly from its Christoffel symbols, and
:func:`fd_linearisation_check` differentiates it in ``lambda`` numerically so
the closed-form first variation in :func:`linearised_mean_curvature` can be
tested against an independent computation.

Everything is pointwise: a :class:`Perturbation` carries the values of ``h``
and its first derivatives at a single point ``(s0, x0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMetricError, InvalidParameterError, ShapeError
from .geometry import GeometrySpec, slice_data


@dataclass(frozen=True, eq=False)
class Perturbation:
    """Values of a symmetric perturbation ``h`` at one point.

    Parameters
    ----------
    h : (4, 4) array
        Components ``h_{mu nu}`` with index 0 the normal direction ``s``.
    dh : (4, 4, 4) array
        ``dh[rho] = d_rho h``, with ``rho = 0`` the s-derivative and
        ``rho = 1, 2, 3`` the spatial ones.
    """

    h: np.ndarray
    dh: np.ndarray = field(default=None)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        dh = np.zeros((4, 4, 4)) if self.dh is None else np.asarray(self.dh, dtype=float)
        if h.shape != (4, 4) or dh.shape != (4, 4, 4):
            raise ShapeError("a perturbation needs h of shape (4, 4) and dh of shape (4, 4, 4)")
        if not (np.allclose(h, h.T) and np.allclose(dh, dh.transpose(0, 2, 1))):
            raise InvalidParameterError("perturbation components must be symmetric")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "dh", dh)

    @property
    def h00(self) -> float:
        return float(self.h[0, 0])

    @property
    def h0i(self) -> np.ndarray:
        return self.h[0, 1:]

    @property
    def hij(self) -> np.ndarray:
        return self.h[1:, 1:]

    @classmethod
    def ds_ds(cls, f: float = 1.0, df=(0.0, 0.0, 0.0, 0.0)):
        """``h = f ds (x) ds`` with derivatives ``d_rho f = df[rho]``."""
        h = np.zeros((4, 4))
        h[0, 0] = f
        dh = np.zeros((4, 4, 4))
        dh[:, 0, 0] = df
        return cls(h, dh)

    @classmethod
    def tangential_metric(cls, geom: GeometrySpec, s0: float, c: float = 1.0):
        """``h_ij = c gamma_ij`` following the background slice metric in ``s``."""
        sd = slice_data(geom, s0)
        h = np.zeros((4, 4))
        h[1:, 1:] = c * sd.gamma
        dh = np.zeros((4, 4, 4))
        dh[0, 1:, 1:] = -2.0 * c * sd.k
        return cls(h, dh)

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0):
        h = rng.normal(scale=scale, size=(4, 4))
        dh = rng.normal(scale=scale, size=(4, 4, 4))
        return cls(h + h.T, dh + dh.transpose(0, 2, 1))


@dataclass
class LinearisationReport:
    formula_value: float
    fd_values: list
    richardson_limit: float
    discrepancy: float
    dropped_term_value: float


def _background(geom: GeometrySpec, s0: float):
    """Metric and its coordinate derivatives ``dg[rho]`` at ``s0``."""
    sd = slice_data(geom, s0)
    g = np.zeros((4, 4))
    g[0, 0] = 1.0
    g[1:, 1:] = sd.gamma
    dg = np.zeros((4, 4, 4))
    dg[0, 1:, 1:] = -2.0 * sd.k
    return sd, g, dg


def mean_curvature_exact(geom: GeometrySpec, pert: Perturbation, lam: float, s0: float) -> float:
    """``tr k`` of the slice for the metric ``g + lam h``.

    Uses ``k_ij = Gamma^0_ij (g^00)^(-1/2)`` with the Christoffel symbols of
    the perturbed metric, contracted with the spatial block of its inverse.
    """
    _, g, dg = _background(geom, s0)
    G = g + lam * pert.h
    dG = dg + lam * pert.dh
    evals = np.linalg.eigvalsh(G)
    if evals[0] <= 0:
        raise DegenerateMetricError(f"g + lambda h is not positive definite at lambda={lam}", (lam,))
    Ginv = np.linalg.inv(G)
    # Gamma_{nu ij} = 1/2 (d_i G_{nu j} + d_j G_{nu i} - d_nu G_ij)
    lower = 0.5 * (np.einsum("inj->nij", dG) + np.einsum("jni->nij", dG) - dG)
    gamma0 = np.einsum("n,nij->ij", Ginv[0], lower)[1:, 1:]
    k = gamma0 / np.sqrt(Ginv[0, 0])
    return float(np.einsum("ij,ij->", Ginv[1:, 1:], k))


def linearised_mean_curvature(geom: GeometrySpec, pert: Perturbation, s0: float,
                              include_h00_term: bool = True) -> float:
    """First variation of ``tr k`` for a block-diagonal warped background.

    Evaluates
    ``nabla^i h_i0 - 1/2 d_s(gamma^ij h_ij) - h^ij k_ij + 1/2 tr(k) h_00``,
    the last term only when ``include_h00_term`` is set. Covariant
    derivatives use the background Christoffels ``Gamma^0_ij = k_ij`` and
    ``Gamma^i_0j = (a'/a) delta^i_j``.
    """
    sd = slice_data(geom, s0)
    ginv = np.linalg.inv(sd.gamma)
    hij = pert.hij
    dhij_s = pert.dh[0, 1:, 1:]
    # d_j h_i0 for spatial i, j
    dh_i0 = pert.dh[1:, 1:, 0].T
    hubble = sd.da / sd.a
    div = (np.einsum("ij,ij->", ginv, dh_i0) - sd.trace_k * pert.h00
           - hubble * np.einsum("ij,ij->", ginv, hij))
    dginv = 2.0 * ginv @ sd.k @ ginv
    d_trace = np.einsum("ij,ij->", dginv, hij) + np.einsum("ij,ij->", ginv, dhij_s)
    h_up = ginv @ hij @ ginv
    value = div - 0.5 * d_trace - np.einsum("ij,ij->", h_up, sd.k)
    if include_h00_term:
        value += 0.5 * sd.trace_k * pert.h00
    return float(value)


def richardson_limit(lambdas, values) -> float:
    """Polynomial extrapolation of ``values(lambda)`` to ``lambda = 0`` (Neville)."""
    x = np.asarray(lambdas, dtype=float)
    p = np.asarray(values, dtype=float).copy()
    n = len(x)
    for level in range(1, n):
        for i in range(n - level):
            p[i] = (x[i] * p[i + 1] - x[i + level] * p[i]) / (x[i] - x[i + level])
    return float(p[0])


def fd_linearisation_check(geom: GeometrySpec, pert: Perturbation, s0: float, lambdas,
                           include_h00_term: bool = True) -> LinearisationReport:
    """Compare the closed-form variation with difference quotients of the exact trace.

    Parameters
    ----------
    lambdas : sequence of float
        Positive, strictly decreasing step sizes.
    include_h00_term : bool
        Passed to :func:`linearised_mean_curvature`; switching it off shows
        the size of the ``h_00`` contribution in the discrepancy.
    """
    lambdas = [float(v) for v in lambdas]
    if not lambdas or any(v <= 0 for v in lambdas) or any(
            b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise InvalidParameterError("lambdas must be positive and strictly decreasing")
    base = mean_curvature_exact(geom, pert, 0.0, s0)
    bad, quotients = [], []
    for lam in lambdas:
        try:
            quotients.append((mean_curvature_exact(geom, pert, lam, s0) - base) / lam)
        except DegenerateMetricError:
            bad.append(lam)
    if bad:
        raise DegenerateMetricError(f"perturbed metric degenerate for lambda in {bad}", bad)
    limit = richardson_limit(lambdas, quotients)
    formula = linearised_mean_curvature(geom, pert, s0, include_h00_term)
    dropped = 0.5 * slice_data(geom, s0).trace_k * pert.h00
    return LinearisationReport(formula, list(zip(lambdas, quotients)), limit,
                               abs(formula - limit), float(dropped))


def linearised_conformal_class(hij, geom: GeometrySpec, s0: float) -> np.ndarray:
    """Trace-free part ``h_ij - 1/3 (gamma^kl h_kl) gamma_ij``."""
    hij = np.asarray(hij, dtype=float)
    if hij.shape != (3, 3):
        raise ShapeError(f"expected a 3x3 tensor, got shape {hij.shape}")
    gamma = slice_data(geom, s0).gamma
    tr = np.einsum("ij,ij->", np.linalg.inv(gamma), hij)
    return hij - tr / 3.0 * gamma
