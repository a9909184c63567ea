"""Integration kernels, their discretization on quadrature grids and the r-fold chains.

Kernels are functions on [0, 1]^2 that are smooth except across the diagonal
and a few fixed lines. A :class:`DiscreteOperator` holds a matrix on the
nodes of a :class:`~splinewidth.quadrature.QuadratureGrid`; applying it means
``(G f)_i = sum_j G[i, j] w_j f_j``. The default product rule treats the
diagonal cell exactly for node-interpolated ``f``; plain Nystrom sampling
is kept for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import pi
from typing import Callable

import numpy as np

from ._linalg import largest_eigenvalue
from .quadrature import QuadratureGrid, gauss_legendre, sample


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Kernel:
    """Evaluator ``(x, y) -> value`` broadcasting over arrays.

    ``x_breaks``/``y_breaks`` list fixed lines off the diagonal where the
    kernel is not smooth; ``diagonal`` says whether ``x == y`` is one.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str
    diagonal: bool = True
    x_breaks: tuple[float, ...] = ()
    y_breaks: tuple[float, ...] = ()
    source: "Kernel | None" = field(default=None, repr=False)

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        out = np.asarray(self.func(x, y), dtype=float)
        return float(out) if out.ndim == 0 else out

    def apply(self, f, x, grid: QuadratureGrid) -> np.ndarray:
        """``int_0^1 k(x_i, y) f(y) dy`` for callable ``f``, splitting at y = x_i.

        The cell of ``grid`` containing each target is cut at the target, so
        the result is exact whenever ``f`` times each kernel piece is a
        polynomial the Gauss rule integrates exactly on every cell.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.y_breaks:
            grid = QuadratureGrid(np.union1d(grid.breakpoints, self.y_breaks), grid.q)
        fy = np.asarray(f(grid.nodes), dtype=float)
        vector = fy.ndim == 1
        fy = fy.reshape(grid.size, -1)
        weighted = self(x[:, None], grid.nodes[None, :]) * grid.weights
        if not self.diagonal:
            out = weighted @ fy
            return out[:, 0] if vector else out

        b, q = grid.breakpoints, grid.q
        cell = np.clip(np.searchsorted(b, x, side="right") - 1, 0, grid.cells - 1)
        cols = cell[:, None] * q + np.arange(q)
        np.put_along_axis(weighted, cols, 0.0, axis=1)
        out = weighted @ fy

        t, w = gauss_legendre(q)
        for lo, hi in ((b[cell], x), (x, b[cell + 1])):
            half = (hi - lo)[:, None] / 2
            y = (lo + hi)[:, None] / 2 + half * t
            vals = np.asarray(f(y.ravel()), dtype=float).reshape(x.size, q, -1)
            kw = self(x[:, None], y) * half * w
            out += np.einsum("ij,ijk->ik", kw, vals)
        return out[:, 0] if vector else out


def kernel_K() -> Kernel:
    """Integration from the left: 1 when x >= y."""
    return Kernel(lambda x, y: np.where(x >= y, 1.0, 0.0), "K")


def kernel_Kstar() -> Kernel:
    return adjoint(kernel_K())


def kernel_KKstar() -> Kernel:
    """min(x, y): Green's function of -u'' = f, u(0) = u'(1) = 0."""
    return Kernel(lambda x, y: np.minimum(x, y), "KK*")


def kernel_KstarK() -> Kernel:
    """1 - max(x, y): Green's function of -u'' = f, u'(0) = u(1) = 0."""
    return Kernel(lambda x, y: 1.0 - np.maximum(x, y), "K*K")


def kernel_K1() -> Kernel:
    """Mean-free integration (I - Q)K: K(x, y) minus its x-average 1 - y."""
    return Kernel(lambda x, y: np.where(x >= y, 1.0, 0.0) - (1.0 - y), "K1")


def kernel_K1star() -> Kernel:
    return adjoint(kernel_K1())


def kernel_K1K1star() -> Kernel:
    """Green's function of -u'' = f, u'(0) = u'(1) = 0 on mean-free functions."""
    return Kernel(lambda x, y: (x * x + y * y) / 2 - np.maximum(x, y) + 1.0 / 3.0, "K1K1*")


def kernel_K1starK1() -> Kernel:
    """min(x, y) - xy: Green's function of -u'' = f, u(0) = u(1) = 0."""
    return Kernel(lambda x, y: np.minimum(x, y) - x * y, "K1*K1")


def kernel_K1bar_star(n: int) -> Kernel:
    """Adjoint of (I - J)K, J interpolating constants at eta_1 = 1/(2(n+1)).

    Equals K(y, x) - K(eta_1, x) everywhere; for y > eta_1 this is the
    indicator of eta_1 < x < y.
    """
    eta = 1.0 / (2 * (n + 1))

    def f(x, y):
        return np.where(y >= x, 1.0, 0.0) - np.where(eta >= x, 1.0, 0.0)

    return Kernel(f, f"K1bar*(n={n})", x_breaks=(eta,))


def adjoint(k: Kernel) -> Kernel:
    if k.source is not None:
        return k.source
    label = k.label[:-1] if k.label.endswith("*") else k.label + "*"
    return Kernel(lambda x, y: k.func(y, x), label, k.diagonal,
                  x_breaks=k.y_breaks, y_breaks=k.x_breaks, source=k)


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    grid: QuadratureGrid
    matrix: np.ndarray
    label: str = ""

    @cached_property
    def symmetric_form(self) -> np.ndarray:
        """``W^1/2 G W^1/2``: its matrix 2-norm is the discrete L2 operator norm."""
        s = np.sqrt(self.grid.weights)
        return s[:, None] * self.matrix * s[None, :]

    @cached_property
    def normal_form(self) -> np.ndarray:
        """``A A^T`` for ``A`` the symmetric form."""
        a = self.symmetric_form
        return a @ a.T

    def apply(self, f) -> np.ndarray:
        """Apply to node values (or a callable); 2-D input is applied column-wise."""
        v = sample(f, self.grid)
        w = self.grid.weights if v.ndim == 1 else self.grid.weights[:, None]
        return self.matrix @ (w * v)

    def adjoint(self) -> "DiscreteOperator":
        label = self.label[:-1] if self.label.endswith("*") else self.label + "*"
        return DiscreteOperator(self.grid, self.matrix.T, label)

    def norm(self) -> float:
        return float(np.sqrt(max(largest_eigenvalue(self.normal_form, self.grid.size), 0.0)))


@lru_cache(maxsize=None)
def _split_cell_rule(q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reference-cell rule integrating against Lagrange polynomials, split at each node.

    Returns points ``y[i, p, m]`` and weights ``om[i, p, m]`` on [-1, 1] for the
    piece ``p`` (left/right of node ``i``), and ``lag[i, p, m, j] = l_j(y[i, p, m])``.
    """
    t, w = gauss_legendre(q)
    lo = np.stack([-np.ones(q), t], axis=1)
    hi = np.stack([t, np.ones(q)], axis=1)
    half = (hi - lo) / 2
    y = ((lo + hi) / 2)[..., None] + half[..., None] * t
    om = half[..., None] * w
    lag = np.ones(y.shape + (q,))
    for j in range(q):
        for m in range(q):
            if m != j:
                lag[..., j] *= (y - t[m]) / (t[j] - t[m])
    return y, om, lag


RULES = ("product", "nystrom")


def discretize(k: Kernel, grid: QuadratureGrid, rule: str = "product") -> DiscreteOperator:
    """Sample ``k`` at node pairs.

    ``rule="nystrom"`` keeps the raw samples. ``rule="product"`` replaces the
    diagonal cell blocks by product-integration weights: within the cell
    holding ``x_i`` the integrand ``f`` is replaced by its interpolant on the
    cell nodes and ``k(x_i, .)`` is integrated piecewise on either side of
    ``x_i``. The result is exact on cell-wise polynomials of degree < q when
    the kernel pieces are polynomial.
    """
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}, got {rule!r}")
    x = grid.nodes
    G = k(x[:, None], x[None, :])
    if rule == "nystrom" or not k.diagonal:
        return DiscreteOperator(grid, G, k.label)
    q, cells = grid.q, grid.cells
    y, om, lag = _split_cell_rule(q)
    a = np.repeat(grid.breakpoints[:-1], q)
    h = np.repeat(np.diff(grid.breakpoints), q)
    local = np.tile(np.arange(q), cells)
    ys = a[:, None, None] + (y[local] + 1) / 2 * h[:, None, None]
    vals = k(x[:, None, None], ys) * om[local] * (h / 2)[:, None, None]
    block = np.einsum("ipm,ipmj->ij", vals, lag[local])
    rows = np.arange(grid.size)
    cols = (rows // q * q)[:, None] + np.arange(q)
    G[rows[:, None], cols] = block / grid.weights[cols]
    return DiscreteOperator(grid, G, k.label)


def compose(a: DiscreteOperator, b: DiscreteOperator) -> DiscreteOperator:
    """Kernel of ``a`` after ``b``: ``(a(x, .), b(., y))`` by the grid's rule."""
    if a.grid != b.grid:
        raise GridMismatchError(f"cannot compose operators on {a.grid} and {b.grid}")
    return DiscreteOperator(a.grid, a.matrix @ (a.grid.weights[:, None] * b.matrix),
                            f"{a.label}{b.label}")


@dataclass(frozen=True, eq=False)
class OperatorChain:
    """Discretized r-fold operator whose image of the unit ball is the class A^r_i.

    For family 1 the constants are not part of the chain; a candidate space
    must contain them instead.
    """

    family: int
    r: int
    operator: DiscreteOperator

    @property
    def constants_separate(self) -> bool:
        return self.family == 1

    @property
    def grid(self) -> QuadratureGrid:
        return self.operator.grid


def chain_factors(family: int) -> tuple[Kernel, Kernel]:
    """(leftmost, partner) kernels alternated to build the family's chain."""
    if family == 2:
        return kernel_K(), kernel_Kstar()
    if family == 1:
        return kernel_K1(), kernel_K1star()
    if family == 0:
        return kernel_K1star(), kernel_K1()
    raise ValueError(f"family must be 0, 1 or 2, got {family!r}")


@lru_cache(maxsize=12)
def build_chain(family: int, r: int, grid: QuadratureGrid, rule: str = "product") -> OperatorChain:
    """Alternate leftmost and partner operators r times, leftmost first.

    The partner is the discrete adjoint of the leftmost operator, so every
    chain is an exact product of one matrix and its transpose.
    """
    if r < 1:
        raise ValueError(f"order r must be >= 1, got {r}")
    first = discretize(chain_factors(family)[0], grid, rule)
    second = first.adjoint()
    op = first
    for step in range(1, r):
        op = compose(op, second if step % 2 else first)
    return OperatorChain(family, r, op)


@dataclass(frozen=True)
class EigenSystem:
    """Closed-form singular system of the family's base operator.

    ``phi`` are eigenfunctions of the adjoint-first product (K*K or K1*K1),
    ``psi`` of the other order. ``mixed`` is family 2, ``symmetric`` families 0, 1.
    """

    group: str

    def __post_init__(self):
        if self.group not in ("mixed", "symmetric"):
            raise ValueError(f"group must be 'mixed' or 'symmetric', got {self.group!r}")

    def frequency(self, k: int) -> float:
        return (k - 0.5) * pi if self.group == "mixed" else k * pi

    def eigenvalue(self, k: int) -> float:
        return 1.0 / self.frequency(k) ** 2

    def phi(self, k: int) -> Callable:
        w = self.frequency(k)
        if self.group == "mixed":
            return lambda x: np.cos(w * np.asarray(x))
        return lambda x: np.sin(w * np.asarray(x))

    def psi(self, k: int) -> Callable:
        w = self.frequency(k)
        if self.group == "mixed":
            return lambda x: np.sin(w * np.asarray(x))
        return lambda x: np.cos(w * np.asarray(x))

    def phi_zeros(self, k: int) -> tuple[Fraction, ...]:
        if self.group == "mixed":
            return tuple(Fraction(2 * j - 1, 2 * k - 1) for j in range(1, k))
        return tuple(Fraction(j, k) for j in range(1, k))

    def psi_zeros(self, k: int) -> tuple[Fraction, ...]:
        if self.group == "mixed":
            return tuple(Fraction(2 * j, 2 * k - 1) for j in range(1, k))
        return tuple(Fraction(2 * j - 1, 2 * k) for j in range(1, k + 1))


def eigen_system(group: str) -> EigenSystem:
    return EigenSystem(group)


def family_group(family: int) -> str:
    return "mixed" if family == 2 else "symmetric"
