import numpy as np
import pytest
from hypothesis import given, strategies as st

from gravbc.errors import DegenerateMetricError, InvalidParameterError, ShapeError
from gravbc.geometry import WARP_PRESETS, make_warped_torus_product, slice_data
from gravbc.linearise import (
    Perturbation,
    fd_linearisation_check,
    linearised_conformal_class,
    linearised_mean_curvature,
    mean_curvature_exact,
    richardson_limit,
)

GEOM = make_warped_torus_product(1.0, warp="quad01")
LAMBDAS = [1e-2, 1e-3, 1e-4]


def test_background_mean_curvature():
    assert mean_curvature_exact(GEOM, Perturbation.ds_ds(), 0.0, 1.0) == pytest.approx(-6 / 11)


def test_ds_ds_value():
    rep = fd_linearisation_check(GEOM, Perturbation.ds_ds(), 1.0, LAMBDAS)
    assert rep.formula_value == pytest.approx(3 / 11, abs=1e-12)
    assert rep.discrepancy < 1e-6


def test_dropping_h00_term_leaves_its_value():
    rep = fd_linearisation_check(GEOM, Perturbation.ds_ds(), 1.0, LAMBDAS, include_h00_term=False)
    assert rep.discrepancy == pytest.approx(3 / 11, abs=1e-4)
    assert rep.dropped_term_value == pytest.approx(-3 / 11)


@pytest.mark.parametrize("s0", [-1.0, -0.3, 0.0, 0.7])
def test_tangential_rescaling(s0):
    pert = Perturbation.tangential_metric(GEOM, s0)
    rep = fd_linearisation_check(GEOM, pert, s0, LAMBDAS)
    assert rep.discrepancy < 1e-6


@pytest.mark.parametrize("warp", sorted(WARP_PRESETS))
@given(seed=st.integers(0, 2 ** 32 - 1), s0=st.floats(-1, 1))
def test_random_perturbations(warp, seed, s0):
    geom = make_warped_torus_product(1.0, warp=warp)
    pert = Perturbation.random(np.random.default_rng(seed), 0.3)
    # large warps shrink the radius of convergence in lambda
    rep = fd_linearisation_check(geom, pert, s0, [1e-3, 1e-4, 1e-5])
    assert rep.discrepancy < 1e-6 * (1 + abs(rep.formula_value))


def test_h00_sensitivity_matches_half_trace():
    f = 0.7
    base = linearised_mean_curvature(GEOM, Perturbation.ds_ds(f), 1.0, include_h00_term=False)
    full = linearised_mean_curvature(GEOM, Perturbation.ds_ds(f), 1.0)
    assert full - base == pytest.approx(0.5 * slice_data(GEOM, 1.0).trace_k * f)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_richardson_exact_on_polynomials(order):
    lam = np.array([0.4, 0.2, 0.1, 0.05])[: order + 1]
    vals = 2.5 + sum((k + 1) * lam ** (k + 1) for k in range(order))
    assert richardson_limit(lam, vals) == pytest.approx(2.5, abs=1e-12)


@pytest.mark.parametrize("lambdas", [[], [1e-3, 1e-2], [1e-2, -1e-3], [1e-2, 1e-2]])
def test_bad_lambda_sequences(lambdas):
    with pytest.raises(InvalidParameterError):
        fd_linearisation_check(GEOM, Perturbation.ds_ds(), 1.0, lambdas)


def test_degenerate_metric_lists_lambdas():
    with pytest.raises(DegenerateMetricError) as info:
        fd_linearisation_check(GEOM, Perturbation.ds_ds(-200.0), 1.0, [1e-2, 1e-3])
    assert info.value.lambdas == (1e-2,)


def test_asymmetric_perturbation_rejected():
    h = np.zeros((4, 4))
    h[0, 1] = 1.0
    with pytest.raises(InvalidParameterError):
        Perturbation(h)
    with pytest.raises(ShapeError):
        Perturbation(np.zeros((3, 3)))


def test_conformal_class_is_trace_free():
    rng = np.random.default_rng(2)
    h = rng.normal(size=(3, 3))
    h = h + h.T
    tf = linearised_conformal_class(h, GEOM, 0.5)
    gamma = slice_data(GEOM, 0.5).gamma
    assert np.einsum("ij,ij->", np.linalg.inv(gamma), tf) == pytest.approx(0, abs=1e-12)
    assert np.allclose(linearised_conformal_class(gamma, GEOM, 0.5), 0)
