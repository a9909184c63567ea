"""Bases for the boundary-constrained spline spaces and their trigonometric rivals.

The spline spaces S_{d,i} are built by folding uniform B-splines across the
endpoints of [0, 1]. Reflection about 0 carries sign ``+1`` when odd
derivatives must vanish there and ``-1`` when even ones must; likewise about
1. A B-spline is summed with its signed images under the group generated by
the two reflections, and the sum restricted to [0, 1] satisfies the boundary
conditions by symmetry. Images that cancel are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, floor, gcd, pi
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import null_space

from .bspline import FAMILIES, KnotVector, UniformBSpline, cardinal_bspline, interior_knots
from .quadrature import QuadratureGrid

EVEN, ODD = 0, 1

# parity of the derivative orders that vanish at (0, 1)
CONDITIONS = {0: (EVEN, EVEN), 1: (ODD, ODD), 2: (EVEN, ODD)}


def _check_family(family: int) -> None:
    if family not in FAMILIES:
        raise ValueError(f"family must be 0, 1 or 2, got {family!r}")


def constrained_orders(parity: int, d: int) -> list[int]:
    return list(range(parity, d + 1, 2))


@dataclass(frozen=True)
class SpaceSpec:
    family: int
    degree: int
    n: int

    def __post_init__(self):
        _check_family(self.family)
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")

    @property
    def knots(self) -> KnotVector:
        return interior_knots(self.family, self.degree, self.n)

    def __str__(self):
        return f"S_{{{self.degree},{self.family}}}(n={self.n})"


class _Basis:
    """Shared behaviour: evaluation at x with the endpoint convention, Gram matrix."""

    family: int
    degree: int | None
    dim: int

    @property
    def conditions(self) -> tuple[int, int]:
        return CONDITIONS[self.family]

    @property
    def breakpoints(self) -> np.ndarray:
        return np.empty(0)

    def _evaluate(self, x: np.ndarray, k: int, side: str) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x, k: int = 0, side: str | None = None) -> np.ndarray:
        """Matrix of k-th derivatives, one row per point, one column per function.

        With ``side=None`` knots take right limits and ``x == 1`` its left limit.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if side is not None:
            return self._evaluate(x, k, side)
        out = self._evaluate(x, k, "right")
        at_end = x == 1.0
        if at_end.any():
            out[at_end] = self._evaluate(x[at_end], k, "left")
        return out

    @property
    def functions(self) -> list[Callable]:
        return [_Column(self, i) for i in range(self.dim)]

    def gram(self, grid: QuadratureGrid) -> np.ndarray:
        B = self.evaluate(grid.nodes)
        return B.T @ (grid.weights[:, None] * B)

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class _Column:
    basis: _Basis
    index: int

    def __call__(self, x, k: int = 0):
        return self.basis.evaluate(x, k)[:, self.index]


class SplineBasis(_Basis):
    """Folded B-spline basis of S_{d,i}: ``coeffs[r, c]`` weights B-spline ``first + c``."""

    def __init__(self, spec: SpaceSpec, knots: KnotVector, first: int, coeffs: np.ndarray):
        self.spec = spec
        self.knots = knots
        self.first = first
        self.coeffs = coeffs
        self.family = spec.family
        self.degree = spec.degree
        self.dim = coeffs.shape[0]

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knots.as_array()

    def bsplines(self) -> list[UniformBSpline]:
        h = self.knots.spacing
        return [UniformBSpline(self.degree, self.knots.grid_point(self.first + c), h)
                for c in range(self.coeffs.shape[1])]

    def _evaluate(self, x, k, side):
        d = self.degree
        if k > d:
            return np.zeros((x.size, self.dim))
        h = float(self.knots.spacing)
        t = (x - float(self.knots.offset)) / h - self.first
        # s^(k) = h^-k sum_j (diff^k c)_j B_{j,d-k}; exact zeros for constants
        c = self.coeffs
        for _ in range(k):
            c = np.diff(np.pad(c, ((0, 0), (1, 1))), axis=1)
        cols = [cardinal_bspline(t - j, d - k, 0, side) for j in range(c.shape[1])]
        return (np.stack(cols, axis=1) / h**k) @ c.T

    def describe(self) -> str:
        return f"spline(family={self.family},d={self.degree},n={self.dim})"


def _fold(spec: SpaceSpec, kv: KnotVector) -> tuple[int, np.ndarray]:
    d = spec.degree
    h, o = kv.spacing, kv.offset
    period = 2 / h  # index shift of a translation by 2
    mirror = 2 * o / h  # 0 or 1
    assert period.denominator == 1 and mirror.denominator == 1
    period, mirror = int(period), int(mirror)

    # B-spline j covers (o + j h, o + (j + d + 1) h); keep those meeting (0, 1)
    first = floor(-(d + 1) - o / h) + 1
    last = ceil((1 - o) / h) - 1
    nb = last - first + 1

    s0 = 1 if CONDITIONS[spec.family][0] == ODD else -1
    s1 = 1 if CONDITIONS[spec.family][1] == ODD else -1
    reach = ceil((d + 1) * h) + 2

    rows: dict[tuple[int, ...], None] = {}
    for j in range(first, last + 1):
        c = np.zeros(nb, dtype=np.int64)
        for m in range(-reach, reach + 1):
            shifted = j + m * period
            if first <= shifted <= last:
                c[shifted - first] += (s0 * s1) ** abs(m)
            # reflection about the integer m
            mirrored = m * period - mirror - j - (d + 1)
            if first <= mirrored <= last:
                c[mirrored - first] += s0 * (s0 * s1) ** abs(m)
        nz = np.flatnonzero(c)
        if nz.size == 0:
            continue
        g = 0
        for v in c[nz]:
            g = gcd(g, int(v))
        c //= g
        if c[nz[0]] < 0:
            c = -c
        rows.setdefault(tuple(int(v) for v in c))
    coeffs = np.array(sorted(rows, key=lambda r: [i for i, v in enumerate(r) if v][0]),
                      dtype=float).reshape(-1, nb)
    return first, coeffs


def build_basis(spec: SpaceSpec) -> SplineBasis:
    """Folded uniform B-spline basis of S_{d,i} with ``spec.n`` functions."""
    kv = spec.knots
    first, coeffs = _fold(spec, kv)
    if coeffs.shape[0] != spec.n:
        raise RuntimeError(
            f"folding {spec} produced {coeffs.shape[0]} functions instead of {spec.n}")
    return SplineBasis(spec, kv, first, coeffs)


class TrigBasis(_Basis):
    """Eigenfunction spaces: sines, cosines (with the constant) or quarter-wave sines."""

    def __init__(self, family: int, n: int):
        _check_family(family)
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        self.family = family
        self.dim = n
        self.degree = None
        k = np.arange(1, n + 1, dtype=float)
        if family == 0:
            self.frequencies, self.phase = k * pi, 0.0
        elif family == 1:
            self.frequencies, self.phase = (k - 1) * pi, pi / 2
        else:
            self.frequencies, self.phase = (k - 0.5) * pi, 0.0

    def _evaluate(self, x, k, side):
        w = self.frequencies
        return w**k * np.sin(np.outer(x, w) + self.phase + k * pi / 2)

    def describe(self) -> str:
        return f"trig(family={self.family},n={self.dim})"


def trig_basis(family: int, n: int) -> TrigBasis:
    return TrigBasis(family, n)


class ConstrainedSplineBasis(_Basis):
    """Spline space on arbitrary interior knots with the family's boundary conditions.

    Built as the null space of the endpoint constraints inside the clamped
    B-spline basis, so it also serves as an independent route to S_{d,i}.
    """

    def __init__(self, family: int, degree: int, knots: Sequence[float]):
        _check_family(family)
        knots = np.asarray(knots, dtype=float)
        if knots.size and (knots[0] <= 0 or knots[-1] >= 1 or np.any(np.diff(knots) <= 0)):
            raise ValueError("interior knots must be strictly increasing inside (0, 1)")
        self.family = family
        self.degree = degree
        self.knots = knots
        t = np.concatenate([np.zeros(degree + 1), knots, np.ones(degree + 1)])
        size = knots.size + degree + 1
        self._spline = BSpline(t, np.eye(size), degree)
        left, right = self.conditions
        rows = [self._raw(np.array([0.0]), k)[0] for k in constrained_orders(left, degree)]
        rows += [self._raw(np.array([1.0]), k)[0] for k in constrained_orders(right, degree)]
        if rows:
            C = np.array(rows)
            C /= np.abs(C).max(axis=1, keepdims=True)
            self.coeffs = null_space(C, rcond=1e-10)
        else:
            self.coeffs = np.eye(size)
        self.dim = self.coeffs.shape[1]

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knots

    def _raw(self, x, k):
        spl = self._spline.derivative(k) if k else self._spline
        return spl(x) if k <= self.degree else np.zeros((x.size, self._spline.c.shape[1]))

    def _evaluate(self, x, k, side):
        if side == "left":
            x = np.where(x > 0, np.nextafter(x, -np.inf), x)
        return self._raw(x, k) @ self.coeffs

    def describe(self) -> str:
        return f"knots(family={self.family},d={self.degree},n={self.dim})"


def perturbed_space(family: int, d: int, n: int, rng: np.random.Generator,
                    fraction: float = 0.2) -> ConstrainedSplineBasis:
    """S_{d,i}'s knot count with every knot moved by up to ``fraction`` of the spacing."""
    kv = interior_knots(family, d, n)
    h = float(kv.spacing)
    knots = kv.as_array() + rng.uniform(-fraction * h, fraction * h, size=len(kv))
    return ConstrainedSplineBasis(family, d, knots)


def shifted_space(family: int, d: int, n: int, fraction: float = 0.2) -> ConstrainedSplineBasis:
    """All knots of S_{d,i} moved right by ``fraction`` of the spacing."""
    kv = interior_knots(family, d, n)
    return ConstrainedSplineBasis(family, d, kv.as_array() + fraction * float(kv.spacing))


class FunctionBasis(_Basis):
    """Ad hoc basis from callables ``f(x, k, side)``; ``conditions`` may be overridden."""

    def __init__(self, functions: Sequence[Callable], family: int, degree: int | None,
                 breakpoints=(), conditions: tuple[int, int] | None = None):
        self._functions = list(functions)
        self.family = family
        self.degree = degree
        self.dim = len(self._functions)
        self._breakpoints = np.asarray(breakpoints, dtype=float)
        self._conditions = conditions

    @property
    def conditions(self):
        return self._conditions or CONDITIONS[self.family]

    @property
    def breakpoints(self):
        return self._breakpoints

    def _evaluate(self, x, k, side):
        return np.stack([np.broadcast_to(f(x, k, side), x.shape) for f in self._functions], axis=1)


def reflect(basis: _Basis) -> FunctionBasis:
    """Basis of x -> s(1 - x); the boundary conditions swap ends."""
    flip = {"left": "right", "right": "left"}

    def mirrored(i):
        def f(x, k, side):
            return (-1) ** k * basis.evaluate(1.0 - x, k, flip[side])[:, i]
        return f

    left, right = basis.conditions
    return FunctionBasis([mirrored(i) for i in range(basis.dim)], basis.family, basis.degree,
                         1.0 - basis.breakpoints[::-1], conditions=(right, left))


@dataclass(frozen=True)
class BoundaryReport:
    """Worst normalized violation ``|s^(k)(end)| / max|s^(k)|`` per (end, k)."""

    violations: dict

    @property
    def max_violation(self) -> float:
        return max(self.violations.values(), default=0.0)

    def __str__(self):
        return ", ".join(f"s^({k})({end}): {v:.2e}" for (end, k), v in self.violations.items())


def _probe_points(basis: _Basis, samples: int) -> np.ndarray:
    return np.unique(np.concatenate([np.linspace(0.0, 1.0, samples), basis.breakpoints]))


def _derivative_scale(basis: _Basis, x: np.ndarray, k: int) -> np.ndarray:
    vals = np.vstack([basis.evaluate(x, k, "right"), basis.evaluate(x, k, "left")])
    return np.abs(vals).max(axis=0)


def verify_boundary_conditions(basis: _Basis, conditions: tuple[int, int] | None = None,
                               max_order: int | None = None,
                               samples: int = 2001) -> BoundaryReport:
    left, right = conditions or basis.conditions
    top = basis.degree if max_order is None else max_order
    if top is None:
        raise ValueError("max_order is required for bases without a degree")
    x = _probe_points(basis, samples)
    out = {}
    for end, parity in ((0, left), (1, right)):
        for k in constrained_orders(parity, top):
            at_end = np.abs(basis.evaluate(np.array([float(end)]), k)[0])
            scale = _derivative_scale(basis, x, k)
            ratio = np.where(scale > 0, at_end / np.where(scale > 0, scale, 1.0), at_end)
            out[(end, k)] = float(ratio.max())
    return BoundaryReport(out)


def continuity_jump(basis: _Basis, samples: int = 2001) -> float:
    """Largest relative jump of the (d-1)-th derivative across interior knots."""
    d = basis.degree
    knots = basis.breakpoints
    if not d or knots.size == 0:
        return 0.0
    k = d - 1
    x = _probe_points(basis, samples)
    scale = _derivative_scale(basis, x, k)
    scale = np.where(scale > 0, scale, 1.0)
    jump = np.abs(basis.evaluate(knots, k, "right") - basis.evaluate(knots, k, "left"))
    return float((jump / scale).max())
