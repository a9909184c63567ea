"""Distances E(A, X_n) = ||(I - P_n) A||_2 and the exact n-widths they are compared to."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import pi
from typing import Sequence

import numpy as np
from scipy.linalg import qr

from ._linalg import largest_eigenvalue
from .kernels import GridMismatchError, OperatorChain, build_chain
from .quadrature import QuadratureGrid, default_grid, sample
from .spaces import SpaceSpec, build_basis

MAX_CONDITION = 1e12
DEFAULT_CELLS = 256
DEFAULT_TOL = 5e-3


class IllConditionedSpaceError(ValueError):
    pass


class Projector:
    """Discrete L2-orthogonal projection onto the span of sampled basis columns.

    ``Q`` holds an orthonormal basis of ``W^1/2 B``, so ``P = W^-1/2 Q Q^T W^1/2``.
    """

    def __init__(self, grid: QuadratureGrid, samples: np.ndarray, label: str = "space"):
        B = np.asarray(samples, dtype=float).reshape(grid.size, -1)
        self.grid = grid
        self.label = label
        self.dim = B.shape[1]
        self._sqrt_w = np.sqrt(grid.weights)
        if self.dim == 0:
            self.Q = np.zeros((grid.size, 0))
            return
        Q, R = qr(self._sqrt_w[:, None] * B, mode="economic")
        cond = np.linalg.cond(R) ** 2
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise IllConditionedSpaceError(
                f"Gram matrix of {label} has condition number {cond:.3g} > {MAX_CONDITION:g}")
        self.Q = Q

    def apply(self, f) -> np.ndarray:
        v = self._sqrt_w * sample(f, self.grid)
        return (self.Q @ (self.Q.T @ v)) / self._sqrt_w

    def residual(self, f) -> np.ndarray:
        return sample(f, self.grid) - self.apply(f)

    def residual_norm(self, f) -> float:
        r = self.residual(f)
        return float(np.sqrt(self.grid.weights @ r**2))


def l2_projector(basis, grid: QuadratureGrid) -> Projector:
    if basis is None:
        return Projector(grid, np.zeros((grid.size, 0)), "empty space")
    return Projector(grid, basis.evaluate(grid.nodes), basis.describe())


def approx_error(chain: OperatorChain, proj: Projector, tol: float = 1e-10) -> float:
    """Largest singular value of ``(I - P) A`` in the discrete L2 norm."""
    if chain.grid != proj.grid:
        raise GridMismatchError("chain and projector live on different grids")
    if chain.constants_separate:
        one = np.ones(proj.grid.size)
        if proj.residual_norm(one) > 1e-8:
            raise ValueError(
                f"{proj.label} does not contain the constants, which family 1 requires")
    A = chain.operator.symmetric_form
    Q = proj.Q

    # (I - QQ^T) A A^T (I - QQ^T) without forming A A^T
    def matvec(v):
        v = A.T @ (v - Q @ (Q.T @ v))
        v = A @ v
        return v - Q @ (Q.T @ v)

    lam = largest_eigenvalue(matvec, proj.grid.size, tol=tol)
    return float(np.sqrt(max(lam, 0.0)))


def theoretical_width(family: int, r: int, n: int) -> float:
    """Exact n-width of A^r_i; the r-th power of the r = 1 value."""
    if family == 0:
        base = 1.0 / ((n + 1) * pi)
    elif family == 1:
        if n < 1:
            raise ValueError("family 1 needs n >= 1: constants are not approximable")
        base = 1.0 / (n * pi)
    elif family == 2:
        base = 1.0 / ((n + 0.5) * pi)
    else:
        raise ValueError(f"family must be 0, 1 or 2, got {family!r}")
    return base**r


@dataclass(frozen=True)
class WidthReport:
    family: int
    r: int
    candidate: str
    degree: int | None
    n: int
    computed_E: float
    theoretical_dn: float
    ratio: float
    cells: int
    quad_order: int
    extrapolated: bool

    @property
    def exploratory(self) -> bool:
        """Spline degree below r - 1, where optimality is not claimed."""
        return self.degree is not None and self.degree < self.r - 1

    def to_dict(self) -> dict:
        return asdict(self)


def richardson(coarse: float, fine: float, order: float = 1.0) -> float:
    """Extrapolate two values at grid sizes h and h/2 assuming error ~ h^order."""
    return fine + (fine - coarse) / (2.0**order - 1.0)


def _as_basis(candidate):
    return build_basis(candidate) if isinstance(candidate, SpaceSpec) else candidate


def _candidate_grid(basis, cells: int, q: int | None) -> QuadratureGrid:
    if q is None:
        q = max((basis.degree or 0) + 1, 4)
    return default_grid(basis.breakpoints, cells, q)


def computed_error(family: int, r: int, basis, cells: int = DEFAULT_CELLS,
                   q: int | None = None, rule: str = "product") -> tuple[float, QuadratureGrid]:
    grid = _candidate_grid(basis, cells, q)
    chain = build_chain(family, r, grid, rule)
    return approx_error(chain, l2_projector(basis, grid)), grid


def width_report(family: int, r: int, candidate, cells: int = DEFAULT_CELLS,
                 q: int | None = None, extrapolate: bool = False,
                 order: float = 1.0, rule: str = "product") -> WidthReport:
    """Compare a candidate space (SpaceSpec or basis object) with the exact n-width.

    With ``extrapolate`` the error is also computed on ``2 * cells`` cells and
    the two values are Richardson-extrapolated.
    """
    basis = _as_basis(candidate)
    E, grid = computed_error(family, r, basis, cells, q, rule)
    if extrapolate:
        E_fine, _ = computed_error(family, r, basis, 2 * cells, grid.q, rule)
        E = richardson(E, E_fine, order)
    dn = theoretical_width(family, r, basis.dim)
    return WidthReport(family, r, basis.describe(), basis.degree, basis.dim, E, dn, E / dn,
                       cells, grid.q, extrapolate)


def convergence_study(family: int, r: int, candidate,
                      levels: Sequence[int] = (64, 128, 256, 512),
                      q: int | None = None, rule: str = "product") -> list[WidthReport]:
    """Width reports at successively finer grids (no extrapolation)."""
    basis = _as_basis(candidate)
    return [width_report(family, r, basis, cells=m, q=q, rule=rule) for m in levels]


def observed_order(reports: Sequence[WidthReport]) -> float:
    """Convergence order estimated from the last three levels of a study."""
    e1, e2, e3 = (rep.computed_E for rep in reports[-3:])
    return float(np.log2(abs(e1 - e2) / abs(e2 - e3)))
