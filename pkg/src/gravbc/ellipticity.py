"""Shapiro-Lopatinskij check for the general conformal boundary family.

On the Euclidean half space, conditions (a)-(c) force every bounded
exponential solution ``c exp(i xi.x - |xi| s)`` into a one-parameter family
labelled by ``tr(c_SS)``. The scalar condition then multiplies that trace by

    |xi| (2 C2 + tr S - S(xi_hat, xi_hat))

so ellipticity is the statement that this factor never vanishes on the unit
sphere, i.e. that 0 lies outside ``[2C2 + trS - s_max, 2C2 + trS - s_min]``.
:func:`half_space_kernel` solves the full 10x10 boundary system directly and
serves as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryConditionSpec, residual_operator
from .errors import DomainError
from .geometry import make_flat_torus_product

NULL_RTOL = 1e-10
_HALF_SPACE_GEOM = make_flat_torus_product(1.0)


@dataclass
class SLVerdict:
    elliptic: bool
    margin: float
    witness: np.ndarray | None
    C2: float = 0.0
    S: np.ndarray | None = None


def sl_reduced_coefficient(C2: float, S, xi) -> float:
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi)
    if norm == 0:
        raise DomainError("the reduced symbol is only defined for xi != 0")
    S = np.asarray(S, dtype=float)
    return float(2 * C2 * norm + np.trace(S) * norm - xi @ S @ xi / norm)


def sl_check(C2: float, S) -> SLVerdict:
    S = np.asarray(S, dtype=float)
    evals, evecs = np.linalg.eigh(S)
    target = 2 * C2 + np.trace(S)
    lo, hi = target - evals[-1], target - evals[0]
    if lo > 0 or hi < 0:
        return SLVerdict(True, float(min(abs(lo), abs(hi))), None, C2, S)

    scale = max(1.0, abs(target), float(np.max(np.abs(evals))))
    hits = np.flatnonzero(np.abs(evals - target) <= 1e-12 * scale)
    if hits.size:
        # canonical representative of a possibly degenerate eigenspace
        basis = evecs[:, hits]
        proj = basis @ basis.T
        norms = np.linalg.norm(proj, axis=0)
        col = int(np.argmax(norms >= norms.max() - 1e-12))
        witness = proj[:, col] / norms[col]
    else:
        # target lies strictly between s_min and s_max: rotate between their eigenvectors
        t = (target - evals[0]) / (evals[-1] - evals[0])
        witness = np.sqrt(1 - t) * evecs[:, 0] + np.sqrt(t) * evecs[:, -1]
    # fix the sign so that the first nonzero entry is positive
    lead = witness[np.flatnonzero(np.abs(witness) > 1e-12)[0]]
    witness = witness * np.sign(lead)
    return SLVerdict(False, 0.0, witness, C2, S)


def sl_scan(C2_values, S_family) -> list[SLVerdict]:
    """One verdict per ``(C2, S)`` pair, C2 varying slowest."""
    return [sl_check(c2, S) for c2 in C2_values for S in S_family]


# ---------------------------------------------------------------- oracle

@dataclass
class HalfSpaceKernel:
    dimension: int
    basis: list
    singular_values: np.ndarray


def half_space_matrix(spec: BoundaryConditionSpec, xi) -> np.ndarray:
    """10x10 map ``c -> boundary residual`` of ``c exp(i xi.x - |xi| s)`` at ``s = 0``."""
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi)
    if norm == 0:
        raise DomainError("the half-space reduction needs xi != 0")
    R_val, R_der = residual_operator(spec, _HALF_SPACE_GEOM, -1, xi)
    return R_val - norm * R_der


def half_space_kernel(spec: BoundaryConditionSpec, xi) -> HalfSpaceKernel:
    """Null space of the half-space boundary system (flat model, ``k = 0``)."""
    A = half_space_matrix(spec, xi)
    _, sv, vh = np.linalg.svd(A)
    null = sv <= NULL_RTOL * max(sv[0], 1e-300)
    basis = [vh[i].conj() for i in np.flatnonzero(null)]
    return HalfSpaceKernel(len(basis), basis, sv)


def half_space_kernel_dims(spec: BoundaryConditionSpec, xis) -> np.ndarray:
    """Kernel dimensions for a batch of frequencies, shape ``(n, 3)``.

    Uses that ``R_val`` is affine in ``xi`` and ``R_der`` does not depend on it.
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    norms = np.linalg.norm(xis, axis=1)
    if np.any(norms == 0):
        raise DomainError("the half-space reduction needs xi != 0")
    R0, R_der = residual_operator(spec, _HALF_SPACE_GEOM, -1, np.zeros(3))
    lin = [residual_operator(spec, _HALF_SPACE_GEOM, -1, e)[0] - R0 for e in np.eye(3)]
    mats = (R0[None] + np.einsum("ni,ijk->njk", xis, np.array(lin))
            - norms[:, None, None] * R_der[None])
    sv = np.linalg.svd(mats, compute_uv=False)
    return np.sum(sv <= NULL_RTOL * sv[:, :1], axis=1)
