"""End-to-end acceptance criteria, one test each, at their stated tolerances.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from splinewidth.cli import FIGURE_DIMS, main
from splinewidth.kernels import (compose, discretize, eigen_system, kernel_K, kernel_K1starK1,
                                 kernel_KKstar, kernel_Kstar, kernel_KstarK)
from splinewidth.quadrature import default_grid, inner_product
from splinewidth.spaces import (SpaceSpec, build_basis, continuity_jump, perturbed_space,
                                trig_basis, verify_boundary_conditions)
from splinewidth.widths import width_report

TOL = 5e-3


def test_trig_spaces_optimal(criterion):
    start = time.perf_counter()
    worst = 0.0
    for family in (0, 1, 2):
        for r in (1, 2, 3):
            for n in range(1, 7):
                rep = width_report(family, r, trig_basis(family, n), cells=256, extrapolate=True)
                worst = max(worst, abs(rep.ratio - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= TOL and elapsed < 60
    criterion(1, "trig spaces attain the n-width", ok,
              f"54 cases, max |ratio-1| = {worst:.2e}, {elapsed:.1f} s")
    assert worst <= TOL
    assert elapsed < 60


def test_spline_spaces_optimal(criterion):
    worst, count, parities = 0.0, 0, set()
    for family in (0, 1, 2):
        for r in (1, 2, 3):
            for d in range(r - 1, 6):
                for n in (3, 4, 5):
                    rep = width_report(family, r, SpaceSpec(family, d, n), cells=256)
                    worst = max(worst, abs(rep.ratio - 1))
                    count += 1
                    parities.add(d % 2)
    ok = worst <= TOL and parities == {0, 1}
    criterion(2, "spline spaces S_{d,i} attain the n-width", ok,
              f"{count} cases, max |ratio-1| = {worst:.2e}")
    assert worst <= TOL
    assert parities == {0, 1}


def test_lower_bound_perturbed_knots(criterion):
    rng = np.random.default_rng(2024)
    worst, count = np.inf, 0
    for family in (0, 1, 2):
        for _ in range(50):
            d = int(rng.integers(0, 4))
            n = int(rng.integers(3, 6))
            r = int(rng.integers(1, 4))
            space = perturbed_space(family, d, n, rng, fraction=0.2)
            rep = width_report(family, r, space, cells=256)
            worst = min(worst, rep.ratio)
            count += 1
    ok = worst >= 1 - TOL
    criterion(3, "perturbed knots never beat the n-width", ok,
              f"{count} spaces, min ratio = {worst:.6f}")
    assert worst >= 1 - TOL


def test_eigenpair_residuals(criterion):
    grid = default_grid(cells=512, q=4)
    worst = 0.0
    for kernel, group in ((kernel_KstarK(), "mixed"), (kernel_K1starK1(), "symmetric")):
        op = discretize(kernel, grid)
        es = eigen_system(group)
        for k in range(1, 6):
            phi = es.phi(k)(grid.nodes)
            res = op.apply(phi) - es.eigenvalue(k) * phi
            rel = np.sqrt(inner_product(res, res, grid) / inner_product(phi, phi, grid))
            worst = max(worst, rel / es.eigenvalue(k))
    criterion(4, "first five eigenpairs of K*K and K1*K1", worst < 1e-5,
              f"max relative residual = {worst:.2e} at M=512")
    assert worst < 1e-5


def test_kernel_algebra(criterion):
    M = 256
    grid = default_grid(cells=M, q=4)
    x = grid.nodes
    A = discretize(kernel_K(), grid)
    B = discretize(kernel_Kstar(), grid)
    min_err = np.abs(compose(A, B).matrix - kernel_KKstar()(x[:, None], x[None, :])).max()
    rng = np.random.default_rng(5)
    adj_err = 0.0
    for _ in range(100):
        f, g = rng.standard_normal((2, grid.size))
        f /= np.sqrt(inner_product(f, f, grid))
        g /= np.sqrt(inner_product(g, g, grid))
        adj_err = max(adj_err, abs(inner_product(A.apply(f), g, grid)
                                   - inner_product(f, B.apply(g), grid)))
    ok = min_err < 10 / M and adj_err < 1e-12
    criterion(5, "compose(K, K*) = min(x, y); (Kf, g) = (f, K*g)", ok,
              f"max node error {min_err:.2e} < {10 / M:.2e}, adjoint gap {adj_err:.1e}")
    assert min_err < 10 / M
    assert adj_err < 1e-12


def test_family1_constant_one_over_pi(criterion):
    target = 1 / np.pi
    worst = 0.0
    for d in (0, 2, 4):
        for n in range(4, 9):
            rep = width_report(1, 1, SpaceSpec(1, d, n), cells=256, extrapolate=True)
            worst = max(worst, abs(n * rep.computed_E - target))
    criterion(6, "n E(S_{d,1}) = 1/pi for even d", worst <= 1e-3,
              f"max |nE - 1/pi| = {worst:.2e}")
    assert worst <= 1e-3


def test_span_recursion(criterion):
    worst = 0.0
    for d in range(4):
        for n in range(1, 6):
            low = build_basis(SpaceSpec(2, d, n))
            high = build_basis(SpaceSpec(2, d + 2, n))
            grid = default_grid(high.breakpoints, cells=16, q=d + 3)
            s = np.sqrt(grid.weights)[:, None]
            v = s * discretize(kernel_KKstar(), grid).apply(low.evaluate(grid.nodes))
            Q, _ = np.linalg.qr(s * high.evaluate(grid.nodes))
            resid = np.linalg.norm(v - Q @ (Q.T @ v), axis=0) / np.linalg.norm(v, axis=0)
            worst = max(worst, resid.max())
    criterion(7, "KK* maps S_{d,2} into S_{d+2,2}", worst < 1e-8,
              f"max relative residual = {worst:.2e}")
    assert worst < 1e-8


def test_figure_bases(criterion, tmp_path):
    code = main(["basis", "--degrees", "0..3", "--samples", "512", "--out", str(tmp_path)])
    worst_bc = worst_jump = worst_csv = 0.0
    columns_ok = True
    for family, n in FIGURE_DIMS.items():
        for d in range(4):
            path = tmp_path / f"basis_family{family}_d{d}_n{n}.csv"
            header = path.read_text().splitlines()[0].split(",")
            table = np.loadtxt(path, delimiter=",", skiprows=1)
            columns_ok &= header == ["x"] + [f"b{i}" for i in range(1, n + 1)]
            columns_ok &= table.shape == (512, n + 1)
            basis = build_basis(SpaceSpec(family, d, n))
            values = basis.evaluate(table[:, 0])
            worst_csv = max(worst_csv, np.abs(table[:, 1:] - values).max())
            worst_bc = max(worst_bc, verify_boundary_conditions(basis).max_violation)
            worst_jump = max(worst_jump, continuity_jump(basis))
    ok = (code == 0 and columns_ok and worst_bc < 1e-9 and worst_jump < 1e-9
          and worst_csv == 0.0)
    criterion(8, "figure setups: boundary, dimension, continuity", ok,
              f"12 files, boundary {worst_bc:.1e}, jumps {worst_jump:.1e}")
    assert code == 0 and columns_ok
    assert worst_csv == 0.0
    assert worst_bc < 1e-9 and worst_jump < 1e-9


def test_boundary_condition_suite(criterion):
    worst, count = 0.0, 0
    for family in (0, 1, 2):
        for d in range(6):
            for n in range(1, 9):
                rep = verify_boundary_conditions(build_basis(SpaceSpec(family, d, n)))
                worst = max(worst, rep.max_violation)
                count += 1
    criterion(9, "boundary conditions for all family, d <= 5, n <= 8", worst < 1e-9,
              f"{count} spaces, max violation = {worst:.1e}")
    assert worst < 1e-9
