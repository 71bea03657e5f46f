"""Background manifolds ``[-T, T] x T^3`` with metric ``ds^2 + a(s)^2 dx^2``.

Only two families are supported: the flat product (``a = 1``) used by the
spectral solver, and warped products used to test boundary residuals and the
linearised mean curvature against curved slices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, InvalidParameterError

FLAT = "FlatTorusProduct"
WARPED = "WarpedTorusProduct"


def _one(s):
    return 1.0


def _zero(s):
    return 0.0


def _exp_a(s):
    return math.exp(-s)


def _exp_da(s):
    return -math.exp(-s)


def _quad_a(s):
    return 1.0 + 0.1 * s * s


def _quad_da(s):
    return 0.2 * s


@dataclass(frozen=True)
class Warp:
    """Warp profile ``a(s)`` together with its exact derivative."""

    name: str
    a: Callable[[float], float]
    da: Callable[[float], float]


WARP_PRESETS = {
    "flat": Warp("flat", _one, _zero),
    "exp": Warp("exp", _exp_a, _exp_da),
    "quad01": Warp("quad01", _quad_a, _quad_da),
}


def get_warp(name: str) -> Warp:
    try:
        return WARP_PRESETS[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown warp preset {name!r}; expected one of {sorted(WARP_PRESETS)}"
        ) from None


@dataclass(frozen=True)
class GeometrySpec:
    kind: str
    T: float
    periods: tuple[float, float, float]
    warp: Warp = field(default_factory=lambda: WARP_PRESETS["flat"])
    Lambda: float = 0.0

    def __post_init__(self):
        if self.kind not in (FLAT, WARPED):
            raise InvalidParameterError(f"unknown geometry kind {self.kind!r}")
        if not self.T > 0:
            raise InvalidParameterError(f"half-width T must be positive, got {self.T}")
        if len(self.periods) != 3 or any(not p > 0 for p in self.periods):
            raise InvalidParameterError(f"torus periods must be three positive reals, got {self.periods}")
        if self.kind == FLAT and self.Lambda != 0:
            raise InvalidParameterError("the flat product solves Einstein's equations only for Lambda = 0")
        # a(s) > 0 checked on a dense sample; the presets are positive everywhere
        for s in np.linspace(-self.T, self.T, 65):
            if not self.warp.a(float(s)) > 0:
                raise InvalidParameterError(f"warp profile {self.warp.name!r} is not positive at s={s:g}")

    @property
    def is_flat(self) -> bool:
        return self.kind == FLAT

    @property
    def volume(self) -> float:
        """Coordinate volume of the torus, ``L1 * L2 * L3``."""
        return float(np.prod(self.periods))


def make_flat_torus_product(T: float, periods=(2 * math.pi,) * 3) -> GeometrySpec:
    return GeometrySpec(FLAT, float(T), tuple(float(p) for p in periods))


def make_warped_torus_product(T: float, periods=(2 * math.pi,) * 3, warp="quad01",
                              Lambda: float = 0.0) -> GeometrySpec:
    if isinstance(warp, str):
        warp = get_warp(warp)
    return GeometrySpec(WARPED, float(T), tuple(float(p) for p in periods), warp, Lambda)


@dataclass(frozen=True)
class SliceData:
    s: float
    gamma: np.ndarray
    k: np.ndarray
    trace_k: float
    a: float
    da: float


def slice_data(geom: GeometrySpec, s: float) -> SliceData:
    """Slice metric and second fundamental form ``k = -1/2 d_s gamma_s`` at ``s``."""
    s = float(s)
    # allow roundoff at the end points
    if abs(s) > geom.T * (1 + 1e-12):
        raise DomainError(f"s={s} lies outside [-{geom.T}, {geom.T}]")
    a = float(geom.warp.a(s))
    da = float(geom.warp.da(s))
    eye = np.eye(3)
    return SliceData(s, a * a * eye, -a * da * eye, -3.0 * da / a, a, da)


def frequency(geom: GeometrySpec, n) -> np.ndarray:
    """Fourier frequency ``xi_i = 2 pi n_i / L_i`` of the torus mode ``n``."""
    n = np.asarray(n, dtype=float)
    return 2 * math.pi * n / np.asarray(geom.periods)


def lowest_nonzero_frequency(geom: GeometrySpec) -> float:
    return 2 * math.pi / max(geom.periods)


def mode_range(N: int):
    """All integer triples with ``max |n_i| <= N`` in lexicographic order."""
    return list(itertools.product(range(-N, N + 1), repeat=3))
