"""Composite Gauss-Legendre rules on [0, 1] and the discrete L2 inner product."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

MAX_ORDER = 30


@lru_cache(maxsize=None)
def gauss_legendre(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the q-point Gauss-Legendre rule on [-1, 1]."""
    if not 1 <= q <= MAX_ORDER:
        raise ValueError(f"Gauss order must lie in [1, {MAX_ORDER}], got {q}")
    t, w = np.polynomial.legendre.leggauss(q)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


class QuadratureGrid:
    """Composite Gauss rule: ``q`` nodes in every cell between consecutive breakpoints.

    Grids compare equal (and hash) by breakpoints and order, so discretized
    operators can be cached per grid.
    """

    def __init__(self, breakpoints, q: int):
        b = np.asarray(breakpoints, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("need at least two breakpoints")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        t, w = gauss_legendre(q)
        lo, hi = b[:-1, None], b[1:, None]
        self.breakpoints = b
        self.q = q
        self.nodes = ((lo + hi) / 2 + (hi - lo) / 2 * t).ravel()
        self.weights = ((hi - lo) / 2 * w).ravel()
        for arr in (self.breakpoints, self.nodes, self.weights):
            arr.setflags(write=False)
        self._key = (b.tobytes(), q)

    @property
    def cells(self) -> int:
        return self.breakpoints.size - 1

    @property
    def size(self) -> int:
        return self.nodes.size

    def __len__(self) -> int:
        return self.nodes.size

    def __eq__(self, other):
        if not isinstance(other, QuadratureGrid):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"QuadratureGrid(cells={self.cells}, q={self.q})"

    def integrate(self, f) -> float:
        return float(self.weights @ sample(f, self))

    def refined(self, factor: int = 2) -> "QuadratureGrid":
        """Split every cell into ``factor`` equal pieces."""
        b = self.breakpoints
        s = np.linspace(0.0, 1.0, factor + 1)[:-1]
        fine = (b[:-1, None] + np.diff(b)[:, None] * s).ravel()
        return QuadratureGrid(np.append(fine, 1.0), self.q)


def gauss_grid(breakpoints, q: int) -> QuadratureGrid:
    return QuadratureGrid(breakpoints, q)


def default_grid(knots=(), cells: int = 256, q: int = 4) -> QuadratureGrid:
    """Grid whose breakpoints contain 0, 1 and ``knots``, with at least ``cells`` cells.

    Each knot interval is cut into equal pieces of length at most ``1/cells``,
    so spline products are integrated exactly once ``q`` is large enough.
    """
    base = np.unique(np.concatenate([[0.0, 1.0], np.asarray(knots, dtype=float)]))
    pieces = [np.linspace(a, b, max(1, math.ceil(cells * (b - a) - 1e-9)) + 1)[:-1]
              for a, b in zip(base[:-1], base[1:])]
    return QuadratureGrid(np.append(np.concatenate(pieces), 1.0), q)


def sample(f, grid: QuadratureGrid) -> np.ndarray:
    """Node values of ``f``; arrays already sampled on the grid pass through."""
    if callable(f):
        return np.broadcast_to(np.asarray(f(grid.nodes), dtype=float), grid.nodes.shape)
    v = np.asarray(f, dtype=float)
    if v.shape[0] != grid.size:
        raise ValueError(f"expected {grid.size} node values, got {v.shape[0]}")
    return v


def inner_product(f, g, grid: QuadratureGrid) -> float:
    """Discrete L2 inner product ``sum_j w_j f(x_j) g(x_j)``."""
    return float(np.sum(grid.weights * sample(f, grid) * sample(g, grid)))


def norm(f, grid: QuadratureGrid) -> float:
    return math.sqrt(max(inner_product(f, f, grid), 0.0))
