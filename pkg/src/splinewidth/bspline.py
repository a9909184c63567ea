"""Uniform B-splines on infinite knot grids and the boundary-adapted knot vectors.

Every spline space in this package lives on a uniform grid
``offset + j * spacing`` (``j`` ranging over all integers). A B-spline on that
grid is identified by its degree and the index of its leftmost knot, so no
piecewise-polynomial coefficients are ever stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

FAMILIES = (0, 1, 2)

# integer t within this distance of a knot is snapped onto it
_SNAP = 1e-10


@dataclass(frozen=True)
class KnotVector:
    """Interior knots of the space S_{d,i}, with the grid they extend to.

    The grid is ``offset + j * spacing``. ``offset`` is either 0 (0 is a knot)
    or ``spacing / 2`` (0 sits in the middle of a knot interval).
    """

    family: int
    degree: int
    n: int
    spacing: Fraction
    offset: Fraction
    interior: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.interior)

    def as_array(self) -> np.ndarray:
        return np.array([float(t) for t in self.interior])

    def grid_point(self, j: int) -> Fraction:
        return self.offset + j * self.spacing

    @property
    def left_is_knot(self) -> bool:
        return self.offset == 0

    @property
    def right_is_knot(self) -> bool:
        return ((1 - self.offset) / self.spacing).denominator == 1


def interior_knots(family: int, d: int, n: int) -> KnotVector:
    """Uniform interior knots for family ``family``, degree ``d``, dimension ``n``.

    >>> [str(t) for t in interior_knots(2, 0, 4).interior]
    ['1/9', '1/3', '5/9', '7/9']
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be 0, 1 or 2, got {family!r}")
    if n < 1:
        raise ValueError(f"dimension n must be >= 1, got {n}")
    if d < 0:
        raise ValueError(f"degree must be >= 0, got {d}")

    odd = d % 2 == 1
    if family == 0:
        h = Fraction(1, n + 1)
        offset = Fraction(0) if odd else h / 2
    elif family == 1:
        h = Fraction(1, n)
        offset = h / 2 if odd else Fraction(0)
    else:
        h = Fraction(2, 2 * n + 1)
        offset = Fraction(0) if odd else h / 2

    knots = []
    t = offset if offset > 0 else offset + h
    while t < 1:
        knots.append(t)
        t += h
    return KnotVector(family, d, n, h, offset, tuple(knots))


def _snap(t: np.ndarray) -> np.ndarray:
    r = np.round(t)
    return np.where(np.abs(t - r) < _SNAP, r, t)


def _cardinal_table(u: np.ndarray, p: int) -> list[np.ndarray]:
    """Values of N_q(u + j), j = 0..q, for every q <= p (Cox-de Boor on unit knots)."""
    table = [[np.ones_like(u)]]
    for q in range(1, p + 1):
        prev = table[-1]
        row = []
        for j in range(q + 1):
            val = np.zeros_like(u)
            if j <= q - 1:
                val = val + (u + j) * prev[j]
            if j >= 1:
                val = val + (q + 1 - u - j) * prev[j - 1]
            row.append(val / q)
        table.append(row)
    return [np.array(row) for row in table]


def cardinal_bspline(t, d: int, k: int = 0, side: str = "right") -> np.ndarray:
    """k-th derivative of the cardinal B-spline of degree d supported on [0, d+1].

    ``side`` picks the one-sided limit used at integer arguments where the
    derivative jumps.
    """
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k > d:
        return np.zeros_like(np.asarray(t, dtype=float))
    t = _snap(np.asarray(t, dtype=float))
    if side == "right":
        s = np.floor(t)
    elif side == "left":
        s = np.ceil(t) - 1.0
    else:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    u = t - s
    p = d - k
    table = _cardinal_table(u, p)[p]
    out = np.zeros_like(t)
    for i in range(k + 1):
        piece = s - i
        inside = (piece >= 0) & (piece <= p)
        idx = np.clip(piece, 0, p).astype(int)
        vals = np.take_along_axis(table, idx[None, ...], axis=0)[0]
        out = out + np.where(inside, (-1) ** i * comb(k, i) * vals, 0.0)
    return out


@dataclass(frozen=True)
class UniformBSpline:
    """B-spline of degree ``degree`` whose support is ``[start, start + (degree+1)*spacing]``."""

    degree: int
    start: Fraction
    spacing: Fraction

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        return self.start, self.start + (self.degree + 1) * self.spacing

    def __call__(self, x, k: int = 0, side: str = "right"):
        h = float(self.spacing)
        t = (np.asarray(x, dtype=float) - float(self.start)) / h
        return cardinal_bspline(t, self.degree, k, side) / h**k


def eval_bspline(b: UniformBSpline, x, k: int = 0):
    """Evaluate ``b`` (or its k-th derivative) at ``x`` on [0, 1].

    Right limits are used at knots, except at ``x == 1`` where the left limit
    is taken so that the value belongs to the last interval of [0, 1].
    """
    if not 0 <= k <= b.degree:
        raise ValueError(f"derivative order {k} outside [0, {b.degree}]")
    x = np.asarray(x, dtype=float)
    right = b(x, k, "right")
    left = b(x, k, "left")
    out = np.where(x == 1.0, left, right)
    return float(out) if out.ndim == 0 else out
