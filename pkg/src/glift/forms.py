"""Sampled differential forms on rectangular grids.

A :class:`FormField` of degree p stores one coefficient array per ascending
axis tuple (i_1 < ... < i_p); each array has the grid shape followed by a
fiber shape (``(n, n)`` for matrix Lie algebras, ``(n,)`` for module
values, ``()`` for scalars).  Derivatives are central differences of
order 4 (order 2 on request), one-sided at non-periodic edges.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import SchemaError

Index = tuple[int, ...]


@dataclass(frozen=True)
class Grid:
    spacing: tuple[float, ...]
    periodic: tuple[bool, ...]
    shape: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.shape)

    def block(self, region: Sequence[slice]) -> "Grid":
        """Sub-grid; an axis stays periodic only when the block spans it fully."""
        shape = tuple(len(range(*s.indices(n))) for s, n in zip(region, self.shape))
        periodic = tuple(p and m == n for p, m, n in zip(self.periodic, shape, self.shape))
        return Grid(self.spacing, periodic, shape)


_CENTRAL = {
    2: ((-1, 1), (-0.5, 0.5)),
    4: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
}
_EDGE = {
    2: [np.array([-1.5, 2.0, -0.5])],
    4: [np.array([-25, 48, -36, 16, -3]) / 12, np.array([-3, -10, 18, -6, 1]) / 12],
}


def partial(arr: np.ndarray, axis: int, h: float, periodic: bool, order: int = 4) -> np.ndarray:
    """d/du_axis of samples along ``axis`` (leading grid axes, any trailing fiber)."""
    n = arr.shape[axis]
    if not periodic and n < order + 1:
        order = 2
    if not periodic and n < 3:
        raise SchemaError(f"need at least 3 samples to differentiate along axis {axis}, got {n}")
    offsets, weights = _CENTRAL[order]
    a = np.moveaxis(arr, axis, 0)
    if periodic:
        out = sum(w * np.roll(a, -o, axis=0) for o, w in zip(offsets, weights))
        return np.moveaxis(out / h, 0, axis)
    out = np.zeros_like(a, dtype=np.result_type(a, float))
    r = max(offsets)
    out[r:n - r] = sum(w * a[r + o:n - r + o] for o, w in zip(offsets, weights))
    # the k-th edge stencil evaluates the derivative k samples in from the edge
    for k, stencil in enumerate(_EDGE[order]):
        m = len(stencil)
        out[k] = np.tensordot(stencil, a[:m], axes=(0, 0))
        out[n - 1 - k] = -np.tensordot(stencil, a[::-1][:m], axes=(0, 0))
    return np.moveaxis(out / h, 0, axis)


def _sort_sign(seq: Sequence[int]) -> int:
    sign = 1
    for a, b in itertools.combinations(range(len(seq)), 2):
        if seq[a] > seq[b]:
            sign = -sign
    return sign


@dataclass
class FormField:
    """Degree-p form sampled on a grid."""

    grid: Grid
    degree: int
    components: dict[Index, np.ndarray]
    fiber: tuple[int, ...] = ()
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        expected = set(self.indices(self.grid.dim, self.degree))
        if set(self.components) != expected:
            raise SchemaError(f"degree-{self.degree} form needs components {sorted(expected)}")
        for I, arr in self.components.items():
            if arr.shape != self.grid.shape + self.fiber:
                raise SchemaError(f"component {I} has shape {arr.shape}, expected {self.grid.shape + self.fiber}")

    @staticmethod
    def indices(dim: int, p: int) -> list[Index]:
        return list(itertools.combinations(range(dim), p))

    @classmethod
    def zeros(cls, grid: Grid, degree: int, fiber=(), dtype=complex) -> "FormField":
        return cls(grid, degree, {I: np.zeros(grid.shape + tuple(fiber), dtype=dtype)
                                  for I in cls.indices(grid.dim, degree)}, tuple(fiber))

    @classmethod
    def from_components(cls, grid: Grid, degree: int, comps: dict, fiber=()) -> "FormField":
        """Fill missing components with zeros."""
        fiber = tuple(fiber)
        out = {}
        for I in cls.indices(grid.dim, degree):
            arr = comps.get(I)
            out[I] = np.zeros(grid.shape + fiber, dtype=complex) if arr is None else np.broadcast_to(
                np.asarray(arr), grid.shape + fiber).copy()
        return cls(grid, degree, out, fiber)

    def get(self, I: Sequence[int]) -> np.ndarray:
        """Component on any (possibly unsorted) index tuple, with the antisymmetry sign."""
        I = tuple(I)
        if len(set(I)) != len(I):
            return np.zeros(self.grid.shape + self.fiber)
        key = tuple(sorted(I))
        return _sort_sign(I) * self.components[key]

    def _combine(self, other: "FormField", fn) -> "FormField":
        if other.degree != self.degree or other.grid.shape != self.grid.shape:
            raise SchemaError("forms of different degree or grid")
        return FormField(self.grid, self.degree, {I: fn(a, other.components[I]) for I, a in self.components.items()},
                         self.fiber)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def scale(self, c) -> "FormField":
        return FormField(self.grid, self.degree, {I: c * a for I, a in self.components.items()}, self.fiber)

    def apply(self, fn: Callable[[np.ndarray], np.ndarray], fiber=None) -> "FormField":
        """Apply a (linear) fiber map to every component."""
        comps = {I: fn(a) for I, a in self.components.items()}
        if fiber is None:
            fiber = next(iter(comps.values())).shape[self.grid.dim:] if comps else self.fiber
        return FormField(self.grid, self.degree, comps, tuple(fiber))

    def restrict(self, region: Sequence[slice]) -> "FormField":
        region = tuple(region)
        return FormField(self.grid.block(region), self.degree,
                         {I: a[region] for I, a in self.components.items()}, self.fiber)

    def max_norm(self) -> float:
        """Max over samples and components of the largest absolute fiber entry."""
        vals = [np.nanmax(np.abs(a)) for a in self.components.values() if a.size]
        return float(max(vals)) if vals else 0.0

    def norm_field(self) -> np.ndarray:
        """Per-sample max over components and fiber entries."""
        out = np.zeros(self.grid.shape)
        axes = tuple(range(self.grid.dim, self.grid.dim + len(self.fiber)))
        for a in self.components.values():
            out = np.maximum(out, np.abs(a).max(axis=axes) if axes else np.abs(a))
        return out


def exterior_derivative(f: FormField, order: int = 4) -> FormField:
    """(df)_J = Σ_k (-1)^k ∂_{j_k} f_{J without j_k}.

    Forms whose degree already equals the grid dimension map to the empty
    (zero) form of degree p+1, flagged ``vanishes-by-dimension``.
    """
    g = f.grid
    p = f.degree
    if p >= g.dim:
        out = FormField(g, p + 1, {}, f.fiber)
        out.flags.append("vanishes-by-dimension")
        return out
    cache: dict[tuple[int, Index], np.ndarray] = {}
    comps = {}
    for J in FormField.indices(g.dim, p + 1):
        acc = 0
        for k, axis in enumerate(J):
            rest = J[:k] + J[k + 1:]
            key = (axis, rest)
            if key not in cache:
                cache[key] = partial(f.components[rest], axis, g.spacing[axis], g.periodic[axis], order)
            acc = acc + (-1) ** k * cache[key]
        comps[J] = np.asarray(acc)
    return FormField(g, p + 1, comps, f.fiber)


def wedge(a: FormField, b: FormField, product: Callable = np.matmul, fiber=None) -> FormField:
    """(a ∧ b)_K = Σ_{I ⊔ J = K} sign(I J) product(a_I, b_J)."""
    g = a.grid
    p, q = a.degree, b.degree
    if p + q > g.dim:
        out = FormField(g, p + q, {}, a.fiber if fiber is None else tuple(fiber))
        out.flags.append("vanishes-by-dimension")
        return out
    comps = {}
    for K in FormField.indices(g.dim, p + q):
        acc = None
        for I in itertools.combinations(K, p):
            J = tuple(x for x in K if x not in I)
            term = _sort_sign(I + J) * product(a.components[I], b.components[J])
            acc = term if acc is None else acc + term
        comps[K] = acc
    if fiber is None:
        fiber = next(iter(comps.values())).shape[g.dim:]
    return FormField(g, p + q, comps, tuple(fiber))


def bracket(a: FormField, b: FormField) -> FormField:
    """Graded commutator [a ∧ b] = a∧b - (-1)^{pq} b∧a of matrix-valued forms."""
    sign = (-1) ** (a.degree * b.degree)
    return wedge(a, b) - wedge(b, a).scale(sign) if a.degree + b.degree <= a.grid.dim else wedge(a, b)


def pull_back_affine(f: FormField, signs: Sequence[int]) -> FormField:
    """Pull a form back along u_target = offset + sign * u_source (diagonal Jacobian)."""
    comps = {I: np.prod([signs[i] for i in I]) * a for I, a in f.components.items()}
    return FormField(f.grid, f.degree, comps, f.fiber)
