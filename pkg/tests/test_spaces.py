from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from splinewidth.bspline import eval_bspline
from splinewidth.quadrature import default_grid
from splinewidth.spaces import (EVEN, ODD, ConstrainedSplineBasis, FunctionBasis, SpaceSpec,
                                build_basis, continuity_jump, perturbed_space, reflect,
                                shifted_space, trig_basis, verify_boundary_conditions)
from splinewidth.widths import l2_projector

ALL_SPECS = [(f, d, n) for f in (0, 1, 2) for d in range(6) for n in range(1, 9)]


def test_family2_piecewise_constants():
    basis = build_basis(SpaceSpec(2, 0, 4))
    x = np.linspace(0, 1, 901)
    # cells [0,1/9) [1/9,3/9) ... [7/9,1]; the first carries nothing since s(0) = 0
    cell = np.floor(np.round((9 * x + 1) / 2, 9)).astype(int)
    expected = np.vstack([np.zeros(4), np.eye(4), np.eye(4)[-1:]])[np.minimum(cell, 5)]
    np.testing.assert_array_equal(basis.evaluate(x), expected)


def test_family1_piecewise_constants():
    basis = build_basis(SpaceSpec(1, 0, 5))
    assert list(basis.breakpoints) == pytest.approx([0.2, 0.4, 0.6, 0.8])
    x = np.linspace(0, 1, 501)
    cell = np.minimum(np.floor(np.round(5 * x, 9)), 4).astype(int)
    expected = np.eye(5)[cell]
    np.testing.assert_array_equal(basis.evaluate(x), expected)


def test_family0_hats():
    basis = build_basis(SpaceSpec(0, 1, 4))
    x = np.linspace(0, 1, 1001)
    peaks = [0.2, 0.4, 0.6, 0.8]
    hats = np.column_stack([np.maximum(0, 1 - np.abs(x - p) / 0.2) for p in peaks])
    np.testing.assert_allclose(basis.evaluate(x), hats, atol=1e-14)


@pytest.mark.parametrize("family,d,n", ALL_SPECS)
def test_dimension_and_gram(family, d, n):
    basis = build_basis(SpaceSpec(family, d, n))
    assert basis.dim == n
    G = basis.gram(default_grid(basis.breakpoints, cells=32, q=d + 1))
    assert G.shape == (n, n)
    assert np.linalg.eigvalsh(G)[0] > 0


@pytest.mark.parametrize("family,d,n", ALL_SPECS)
def test_boundary_conditions(family, d, n):
    basis = build_basis(SpaceSpec(family, d, n))
    assert verify_boundary_conditions(basis).max_violation < 1e-9


@pytest.mark.parametrize("family,d,n", ALL_SPECS)
def test_smoothness(family, d, n):
    assert continuity_jump(build_basis(SpaceSpec(family, d, n))) < 1e-9


def test_named_constraint_sets():
    rep = verify_boundary_conditions(build_basis(SpaceSpec(1, 3, 4)))
    assert set(rep.violations) == {(0, 1), (0, 3), (1, 1), (1, 3)}
    assert rep.max_violation < 1e-9
    rep = verify_boundary_conditions(build_basis(SpaceSpec(2, 0, 4)))
    assert set(rep.violations) == {(0, 0)}
    assert rep.max_violation < 1e-12


def test_constant_in_family1_exact():
    one = FunctionBasis([lambda x, k, side: np.ones_like(x) if k == 0 else np.zeros_like(x)],
                        family=1, degree=5)
    assert verify_boundary_conditions(one).max_violation == 0.0


def test_boundary_check_detects_violation():
    # sin(pi x) breaks the family-1 condition s'(0) = 0
    s = FunctionBasis([lambda x, k, side: np.pi**k * np.sin(np.pi * x + k * np.pi / 2)],
                      family=1, degree=3)
    assert verify_boundary_conditions(s).max_violation > 0.5


@pytest.mark.parametrize("family,d,n", [(f, d, n) for f in (0, 1, 2) for d in range(6)
                                        for n in (1, 2, 3, 5, 8)])
def test_folded_span_matches_null_space(family, d, n):
    folded = build_basis(SpaceSpec(family, d, n))
    oracle = ConstrainedSplineBasis(family, d, folded.breakpoints)
    assert oracle.dim == n
    grid = default_grid(folded.breakpoints, cells=40, q=d + 1)
    s = np.sqrt(grid.weights)[:, None]
    angles = subspace_angles(s * folded.evaluate(grid.nodes), s * oracle.evaluate(grid.nodes))
    assert np.max(angles) < 1e-7


@pytest.mark.parametrize("family,d,n", [(0, 3, 4), (2, 2, 5), (1, 4, 6)])
def test_derivatives_agree_with_bspline_sums(family, d, n):
    basis = build_basis(SpaceSpec(family, d, n))
    x = np.linspace(0.003, 0.997, 257)
    splines = basis.bsplines()
    for k in range(d + 1):
        raw = np.column_stack([eval_bspline(b, x, k) for b in splines])
        np.testing.assert_allclose(basis.evaluate(x, k), raw @ basis.coeffs.T,
                                   atol=1e-8 * np.abs(raw).max())


@pytest.mark.parametrize("d", range(6))
@pytest.mark.parametrize("n", range(1, 9))
def test_constants_in_family1(d, n):
    basis = build_basis(SpaceSpec(1, d, n))
    grid = default_grid(basis.breakpoints, cells=16, q=d + 1)
    assert l2_projector(basis, grid).residual_norm(np.ones_like) < 1e-10


@pytest.mark.parametrize("d", range(6))
@pytest.mark.parametrize("n", (1, 3, 4, 7))
def test_reflected_family2(d, n):
    mirrored = reflect(build_basis(SpaceSpec(2, d, n)))
    assert mirrored.conditions == (ODD, EVEN)
    assert verify_boundary_conditions(mirrored).max_violation < 1e-9
    # and the unreflected conditions do fail when there is anything to fail
    assert verify_boundary_conditions(mirrored, conditions=(EVEN, ODD)).max_violation > 1e-3


@pytest.mark.parametrize("family,n,expected", [
    (0, 2, lambda x: [np.sin(np.pi * x), np.sin(2 * np.pi * x)]),
    (1, 1, lambda x: [np.ones_like(x)]),
    (1, 3, lambda x: [np.ones_like(x), np.cos(np.pi * x), np.cos(2 * np.pi * x)]),
    (2, 3, lambda x: [np.sin(np.pi * x / 2), np.sin(3 * np.pi * x / 2), np.sin(5 * np.pi * x / 2)]),
])
def test_trig_bases(family, n, expected):
    x = np.linspace(0, 1, 101)
    np.testing.assert_allclose(trig_basis(family, n).evaluate(x), np.column_stack(expected(x)),
                               atol=1e-14)


@pytest.mark.parametrize("family", [0, 1, 2])
def test_trig_boundary_conditions(family):
    rep = verify_boundary_conditions(trig_basis(family, 5), max_order=4)
    assert rep.max_violation < 1e-12


def test_perturbed_space_dimension():
    rng = np.random.default_rng(7)
    for family in (0, 1, 2):
        space = perturbed_space(family, 2, 4, rng)
        assert space.dim == 4
        assert verify_boundary_conditions(space).max_violation < 1e-8


def test_shifted_space_moves_knots():
    s = shifted_space(0, 1, 4)
    np.testing.assert_allclose(s.breakpoints, [0.24, 0.44, 0.64, 0.84])


@pytest.mark.parametrize("bad", [(3, 1, 4), (0, -1, 4), (0, 1, 0)])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        SpaceSpec(*bad)


def test_constrained_rejects_bad_knots():
    with pytest.raises(ValueError):
        ConstrainedSplineBasis(0, 1, [0.5, 0.3])


def test_continuity_check_detects_kink():
    # |x - 1/2| claims C^1 as a quadratic but its slope jumps at the knot
    def kink(x, k, side):
        if k == 0:
            return np.abs(x - 0.5)
        above = x > 0.5 if side == "left" else x >= 0.5
        slope = np.where(above, 1.0, -1.0)
        return slope if k == 1 else np.zeros_like(x)

    basis = FunctionBasis([kink], family=1, degree=2, breakpoints=[0.5])
    assert continuity_jump(basis) > 0.5
