import numpy as np
import pytest
from hypothesis import given, strategies as st

from gravbc.boundary import BoundaryConditionSpec, boundary_residual, random_general_spec
from gravbc.errors import InvalidParameterError
from gravbc.gauge import (
    eq2_check,
    gauge_invariance_residual,
    is_admissible,
    make_collar_gauge_field,
    make_polynomial_gauge_field,
    random_collar_fields,
    relations_check,
)
from gravbc.geometry import make_flat_torus_product, make_warped_torus_product
from gravbc.tensor_ops import apply_D1, make_grid, mode_index

GEOM = make_flat_torus_product(1.0)
GRID = make_grid(1.0, 400)
XI1 = mode_index(GEOM, (1, 0, 0))
ZERO = mode_index(GEOM, (0, 0, 0))


def bump_field(mode=XI1, component=0, grid=GRID):
    amp = np.zeros(4, dtype=complex)
    amp[component] = 1.0
    return make_collar_gauge_field(mode, GEOM, grid, amp)


def non_admissible(grid=GRID):
    return make_polynomial_gauge_field(ZERO, grid, {0: [1, 0, -2, 0, 1]})


def test_zero_amplitudes_give_zero_field():
    gf = make_collar_gauge_field(XI1, GEOM, GRID, np.zeros(4))
    assert not gf.omega.data.any()
    assert gauge_invariance_residual(gf, BoundaryConditionSpec.anderson(), GEOM) == 0


@pytest.mark.parametrize("width", [0.0, 0.5, 0.7, -0.1])
def test_collar_too_wide(width):
    with pytest.raises(InvalidParameterError):
        make_collar_gauge_field(XI1, GEOM, GRID, np.ones(4), collar_width=width)


@pytest.mark.parametrize("n", [(0, 0, 0), (1, 0, 0), (1, -1, 2)])
def test_collar_invariants(n):
    gf = bump_field(mode_index(GEOM, n))
    assert np.abs(gf.omega.data[:, [0, -1]]).max() < 1e-14
    assert is_admissible(gf)


def test_linear_profile_for_zero_frequency():
    gf = bump_field(ZERO)
    near = GRID.s_values > 1 - gf.collar_width
    assert np.allclose(gf.omega.data[0, near], GRID.s_values[near] - 1)


def test_jets_match_differences():
    errs = []
    for M in (400, 800, 1600):
        grid = make_grid(1.0, M)
        gf = random_collar_fields(GEOM, grid, [XI1], 1, np.random.default_rng(0))[0]
        fd = np.gradient(gf.omega.data, grid.h, axis=1, edge_order=2)
        errs.append(np.abs(fd - gf.omega.ds).max())
    assert np.all(np.abs(np.log2(np.array(errs[:-1]) / errs[1:]) - 2) < 0.2)


def test_differenced_D1_small_inside_collar():
    """Differenced residual away from the smoothstep join is O(h^2)."""
    gf = bump_field()
    w = gf.collar_width
    inside = np.abs(GRID.s_values) >= 1 - w + GRID.h
    d1 = apply_D1(gf.omega, XI1).data[:, inside]
    assert np.abs(d1).max() < 1e-6


def test_anderson_residual_collar_fields():
    fields = random_collar_fields(GEOM, GRID, [mode_index(GEOM, n) for n in [(0, 0, 0), (1, 0, 0), (2, -1, 1)]],
                                  9, np.random.default_rng(1))
    for gf in fields:
        assert gauge_invariance_residual(gf, BoundaryConditionSpec.anderson(), GEOM) < 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_random_general_specs_are_gauge_invariant(seed):
    rng = np.random.default_rng(seed)
    gf = random_collar_fields(GEOM, GRID, [mode_index(GEOM, (1, 2, -1))], 1, rng)[0]
    assert gauge_invariance_residual(gf, random_general_spec(rng), GEOM) < 1e-10


def test_fd_route_converges_at_second_order():
    errs = []
    rng_seed = 5
    for M in (100, 200, 400, 800):
        grid = make_grid(1.0, M)
        gf = random_collar_fields(GEOM, grid, [XI1], 1, np.random.default_rng(rng_seed))[0]
        errs.append(gauge_invariance_residual(gf, BoundaryConditionSpec.anderson(), GEOM, "fd"))
    h = 2 / (np.array([100, 200, 400, 800]) - 1)
    rate = np.polyfit(np.log(h), np.log(errs), 1)[0]
    assert rate == pytest.approx(2, abs=0.2)


def test_dirichlet_not_gauge_invariant():
    assert gauge_invariance_residual(bump_field(), BoundaryConditionSpec.dirichlet(), GEOM) > 0.1


@pytest.mark.parametrize("M", [50, 400, 1000])
def test_non_admissible_field(M):
    grid = make_grid(1.0, M)
    gf = non_admissible(grid)
    assert not is_admissible(gf)
    spec = BoundaryConditionSpec.anderson()
    assert gauge_invariance_residual(gf, spec, GEOM) == pytest.approx(16, abs=1e-9)
    for side in (-1, 1):
        res = boundary_residual(gf.potential(), spec, GEOM, ZERO, side)
        assert res.res_a == pytest.approx(4, abs=1e-9)
        assert res.res_d == pytest.approx(-16, abs=1e-9)


def test_relations_zero_frequency_linear_profile():
    gf = bump_field(ZERO)
    rep = relations_check(gf, GEOM)
    u_ss = [e for e in rep.entries if e.name == "u_ss" and e.side == 1][0]
    assert u_ss.lhs == pytest.approx(0.5)
    assert rep.max_difference < 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_relations_random_fields(seed):
    gf = random_collar_fields(GEOM, GRID, [mode_index(GEOM, (1, -2, 1))], 1, np.random.default_rng(seed))[0]
    assert relations_check(gf, GEOM).max_difference < 1e-12
    assert relations_check(gf, GEOM, "fd").max_difference < 1e-2


def test_relations_hold_for_non_admissible_field():
    # the relations only use omega = 0 at the boundary
    assert relations_check(non_admissible(), GEOM).max_difference < 1e-12


def test_eq2():
    gf = non_admissible()
    rep = eq2_check(gf, GEOM)
    assert rep.max_difference < 1e-12
    assert rep.residual_ab[0][0] == pytest.approx(4)
    assert eq2_check(bump_field(), GEOM).max_difference < 1e-12


def test_warped_geometry_rejected():
    with pytest.raises(InvalidParameterError):
        gauge_invariance_residual(bump_field(), BoundaryConditionSpec.anderson(),
                                  make_warped_torus_product(1.0))
