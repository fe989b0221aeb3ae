"""Base spaces: nerves of good covers and sampled charted surfaces.

Two flavours live here.  A :class:`Nerve` is the intersection pattern of a
good cover, stored as an abstract simplicial complex on ascending vertex
tuples; every combinatorial cochain in :mod:`glift.cech` lives on one.  A
:class:`ChartedGeometry` is a finite atlas of rectangular parameter grids
with affine transition maps, used by the numeric layer in
:mod:`glift.connections` and :mod:`glift.holonomy`.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import SchemaError

Simplex = tuple[int, ...]


# ---------------------------------------------------------------------------
# Nerves
# ---------------------------------------------------------------------------


def _faces(simplex: Simplex) -> Iterable[Simplex]:
    for k in range(1, len(simplex) + 1):
        yield from itertools.combinations(simplex, k)


@dataclass(frozen=True)
class Nerve:
    """Finite abstract simplicial complex on vertices ``0..vertex_count-1``.

    Simplices are strictly ascending tuples.  The constructor closes the given
    simplices downward and adds every vertex, so any generating family works.
    """

    vertex_count: int
    simplices: frozenset[Simplex]
    name: str = ""

    def __init__(self, vertex_count: int, simplices: Iterable[Sequence[int]], name: str = ""):
        if vertex_count <= 0:
            raise SchemaError(f"vertex_count must be positive, got {vertex_count}")
        closed: set[Simplex] = {(v,) for v in range(vertex_count)}
        for raw in simplices:
            s = tuple(int(v) for v in raw)
            if not s:
                continue
            if any(b <= a for a, b in zip(s, s[1:])):
                raise SchemaError(f"simplex {list(s)} is not strictly ascending")
            if s[0] < 0 or s[-1] >= vertex_count:
                raise SchemaError(f"simplex {list(s)} has a vertex outside 0..{vertex_count - 1}")
            closed.update(_faces(s))
        object.__setattr__(self, "vertex_count", int(vertex_count))
        object.__setattr__(self, "simplices", frozenset(closed))
        object.__setattr__(self, "name", name)

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    @cached_property
    def _by_degree(self) -> dict[int, tuple[Simplex, ...]]:
        out: dict[int, list[Simplex]] = {}
        for s in self.simplices:
            out.setdefault(len(s) - 1, []).append(s)
        return {n: tuple(sorted(v)) for n, v in out.items()}

    @cached_property
    def _index(self) -> dict[Simplex, int]:
        return {s: i for ss in self._by_degree.values() for i, s in enumerate(ss)}

    def simplices_of_dim(self, n: int) -> tuple[Simplex, ...]:
        """The n-simplices in lexicographic order (the canonical cochain basis)."""
        return self._by_degree.get(n, ())

    def count(self, n: int) -> int:
        return len(self.simplices_of_dim(n))

    def index(self, simplex: Simplex) -> int:
        return self._index[simplex]

    def __contains__(self, simplex) -> bool:
        return tuple(simplex) in self.simplices

    @property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(self.count(n) for n in range(self.dimension + 1))

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** n * c for n, c in enumerate(self.f_vector))

    def maximal_simplices(self) -> list[Simplex]:
        maximal = []
        for s in sorted(self.simplices, key=lambda t: (-len(t), t)):
            if not any(set(s) < set(m) for m in maximal):
                maximal.append(s)
        return sorted(maximal)

    def boundary_matrix(self, n: int) -> np.ndarray:
        """Integer coboundary matrix C^n -> C^{n+1}: rows (n+1)-simplices, columns n-simplices.

        Entry (σ, τ) is (-1)^k when τ is σ with its k-th vertex deleted.
        """
        rows = self.simplices_of_dim(n + 1)
        cols = self.simplices_of_dim(n)
        D = np.zeros((len(rows), len(cols)), dtype=np.int64)
        if n < 0:
            return D
        for r, s in enumerate(rows):
            for k in range(len(s)):
                D[r, self._index[s[:k] + s[k + 1:]]] = -1 if k % 2 else 1
        return D

    def to_json(self) -> dict:
        return {"vertices": self.vertex_count, "simplices": [list(s) for s in self.maximal_simplices()]}

    @classmethod
    def from_json(cls, doc: dict | str, name: str = "") -> "Nerve":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            return cls(int(doc["vertices"]), doc["simplices"], name=name)
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad nerve document: {exc}") from None


def _circle3() -> Nerve:
    return Nerve(3, [(0, 1), (1, 2), (0, 2)], name="circle3")


def _sphere4() -> Nerve:
    return Nerve(4, itertools.combinations(range(4), 3), name="sphere4")


# Antipodal quotient of the icosahedron.
_RP2_6 = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
    (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5),
]

# Found by bistellar-flip reduction of the antipodal quotient of the
# barycentric subdivision of the 16-cell boundary; f-vector (11, 51, 80, 40).
_RP3_11 = [
    (0, 1, 2, 3), (0, 1, 2, 5), (0, 1, 3, 6), (0, 1, 5, 7), (0, 1, 6, 7),
    (0, 2, 3, 8), (0, 2, 4, 5), (0, 2, 4, 8), (0, 3, 6, 8), (0, 4, 5, 7),
    (0, 4, 7, 9), (0, 4, 8, 9), (0, 6, 7, 9), (0, 6, 8, 9), (1, 2, 3, 9),
    (1, 2, 5, 9), (1, 3, 4, 6), (1, 3, 4, 9), (1, 4, 6, 10), (1, 4, 8, 9),
    (1, 4, 8, 10), (1, 5, 7, 8), (1, 5, 8, 9), (1, 6, 7, 10), (1, 7, 8, 10),
    (2, 3, 7, 8), (2, 3, 7, 9), (2, 4, 5, 6), (2, 4, 6, 10), (2, 4, 8, 10),
    (2, 5, 6, 9), (2, 6, 7, 9), (2, 6, 7, 10), (2, 7, 8, 10), (3, 4, 5, 6),
    (3, 4, 5, 7), (3, 4, 7, 9), (3, 5, 6, 8), (3, 5, 7, 8), (5, 6, 8, 9),
]

_NERVES: dict[str, Callable[[], Nerve]] = {
    "circle3": _circle3,
    "sphere4": _sphere4,
    "rp2_6": lambda: Nerve(6, _RP2_6, name="rp2_6"),
    "rp3_11": lambda: Nerve(11, _RP3_11, name="rp3_11"),
}

NERVE_NAMES = tuple(_NERVES)


def builtin_nerve(name: str) -> Nerve:
    try:
        return _NERVES[name]()
    except KeyError:
        raise SchemaError(f"unknown nerve {name!r}; known: {', '.join(NERVE_NAMES)}") from None


# ---------------------------------------------------------------------------
# Charted geometries
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Chart:
    """Rectangular parameter domain sampled on a uniform grid.

    Periodic axes sample ``[lower, upper)`` with ``n`` points; the others
    sample the closed interval.  ``weights`` is this chart's share of the
    partition of unity at every sample, and ``orientation`` is +1 or -1
    relative to the manifold orientation.
    """

    name: str
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    shape: tuple[int, ...]
    periodic: tuple[bool, ...]
    orientation: int = 1
    weights: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / (n if per else n - 1)
            for lo, hi, n, per in zip(self.lower, self.upper, self.shape, self.periodic)
        )

    def axes(self) -> list[np.ndarray]:
        return [lo + h * np.arange(n) for lo, h, n in zip(self.lower, self.spacing, self.shape)]

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def weight_array(self) -> np.ndarray:
        return np.ones(self.shape) if self.weights is None else self.weights

    def contains(self, point: Sequence[float], tol: float = 1e-12) -> bool:
        for x, lo, hi, per in zip(point, self.lower, self.upper, self.periodic):
            if not per and not (lo - tol <= x <= hi + tol):
                return False
        return True


@dataclass(frozen=True, eq=False)
class Overlap:
    """Affine transition between two grid-aligned charts.

    Parameters map as ``u_j[a] = offset[a] + sign[a] * u_i[a]`` (periodic axes
    are reduced into range).  ``region`` is the rectangular block of chart
    ``i`` samples lying in chart ``j``; ``target`` holds, per axis, the chart
    ``j`` grid index of each sample along that block.
    """

    i: int
    j: int
    sign: tuple[int, ...]
    offset: tuple[float, ...]
    region: tuple[slice, ...]
    target: tuple[np.ndarray, ...]

    @property
    def jacobian(self) -> np.ndarray:
        """d u_j / d u_i, constant for affine transitions."""
        return np.diag(np.asarray(self.sign, dtype=float))

    def forward(self, points: np.ndarray, chart_j: Chart) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        out = np.asarray(self.offset) + np.asarray(self.sign) * pts
        for a, per in enumerate(chart_j.periodic):
            if per:
                lo, hi = chart_j.lower[a], chart_j.upper[a]
                out[..., a] = lo + np.mod(out[..., a] - lo, hi - lo)
        return out

    def take_target(self, arr: np.ndarray) -> np.ndarray:
        """Restrict a chart-j sampled array to this overlap, laid out on chart-i's block."""
        return arr[np.ix_(*self.target)]

    @property
    def block_shape(self) -> tuple[int, ...]:
        return tuple(len(t) for t in self.target)


def _affine_overlap(charts: Sequence[Chart], i: int, j: int, sign, offset) -> Overlap | None:
    ci, cj = charts[i], charts[j]
    region, target = [], []
    for a in range(ci.dim):
        xi = ci.axes()[a]
        y = offset[a] + sign[a] * xi
        hj = cj.spacing[a]
        if cj.periodic[a]:
            y = cj.lower[a] + np.mod(y - cj.lower[a], cj.upper[a] - cj.lower[a])
        k = (y - cj.lower[a]) / hj
        kr = np.rint(k)
        inside = (kr >= 0) & (kr < cj.shape[a])
        if cj.periodic[a]:
            kr = np.mod(kr, cj.shape[a])
            inside[:] = True
        if not inside.any():
            return None
        if np.max(np.abs(k - kr)[inside]) > 1e-6:
            raise SchemaError(f"charts {ci.name!r} and {cj.name!r} are not grid-aligned on axis {a}")
        idx = np.flatnonzero(inside)
        if np.any(np.diff(idx) != 1):
            raise SchemaError("overlap region must be a contiguous block")
        region.append(slice(int(idx[0]), int(idx[-1]) + 1))
        target.append(kr[idx].astype(np.intp))
    return Overlap(i, j, tuple(int(s) for s in sign), tuple(float(o) for o in offset),
                   tuple(region), tuple(target))


@dataclass(frozen=True, eq=False)
class ChartedGeometry:
    """A sampled atlas: charts plus the overlaps between them (both directions)."""

    name: str
    charts: tuple[Chart, ...]
    overlaps: tuple[Overlap, ...] = ()
    conventions: str = ""
    _transitions: tuple = field(default=(), repr=False)

    @classmethod
    def build(cls, name: str, charts: Sequence[Chart],
              transitions: Sequence[tuple[int, int, Sequence[int], Sequence[float]]] = (),
              conventions: str = "") -> "ChartedGeometry":
        """Assemble a geometry from affine transitions ``(i, j, sign, offset)``.

        The reverse direction of each transition is derived automatically.
        """
        overlaps = []
        for i, j, sign, offset in transitions:
            fwd = _affine_overlap(charts, i, j, sign, offset)
            inv_offset = [-s * o for s, o in zip(sign, offset)]
            bwd = _affine_overlap(charts, j, i, sign, inv_offset)
            if fwd is None or bwd is None:
                raise SchemaError(f"charts {i} and {j} do not overlap")
            overlaps += [fwd, bwd]
        return cls(name, tuple(charts), tuple(overlaps), conventions, tuple(transitions))

    def chart_index(self, chart: int | str) -> int:
        if isinstance(chart, (int, np.integer)):
            if not 0 <= chart < len(self.charts):
                raise SchemaError(f"chart index {chart} out of range")
            return int(chart)
        for k, c in enumerate(self.charts):
            if c.name == chart:
                return k
        raise SchemaError(f"unknown chart {chart!r} in geometry {self.name!r}")

    def overlap(self, i: int, j: int) -> Overlap | None:
        for ov in self.overlaps:
            if ov.i == i and ov.j == j:
                return ov
        return None

    def pairs(self) -> list[tuple[int, int]]:
        """Ordered overlap pairs with i < j."""
        return sorted((ov.i, ov.j) for ov in self.overlaps if ov.i < ov.j)

    def triples(self) -> list[tuple[int, int, int]]:
        """Index triples i < j < k whose three charts share samples."""
        out = []
        for i, j, k in itertools.combinations(range(len(self.charts)), 3):
            a, b = self.overlap(i, j), self.overlap(i, k)
            if a is None or b is None or self.overlap(j, k) is None:
                continue
            if triple_region(a, b) is not None:
                out.append((i, j, k))
        return out

    def transition_roundtrip_error(self) -> float:
        """Max |u - back(forth(u))| over all overlap samples (grid-level check)."""
        worst = 0.0
        for ov in self.overlaps:
            back = self.overlap(ov.j, ov.i)
            ci, cj = self.charts[ov.i], self.charts[ov.j]
            pts = np.stack([m[ov.region] for m in ci.mesh()], axis=-1)
            there = ov.forward(pts, cj)
            again = back.forward(there, ci)
            diff = np.abs(again - pts)
            for a, per in enumerate(ci.periodic):
                if per:
                    period = ci.upper[a] - ci.lower[a]
                    diff[..., a] = np.minimum(diff[..., a], period - diff[..., a])
            worst = max(worst, float(diff.max()))
        return worst

    def partition_defect(self) -> float:
        """Max |Σ weights - 1| over samples covered by several charts."""
        worst = 0.0
        for ov in self.overlaps:
            wi = self.charts[ov.i].weight_array()[ov.region]
            wj = ov.take_target(self.charts[ov.j].weight_array())
            worst = max(worst, float(np.max(np.abs(wi + wj - 1.0))))
        return worst


def triple_region(a: Overlap, b: Overlap) -> tuple[slice, ...] | None:
    """Intersection of two overlap blocks living in the same chart."""
    out = []
    for sa, sb in zip(a.region, b.region):
        lo, hi = max(sa.start, sb.start), min(sa.stop, sb.stop)
        if lo >= hi:
            return None
        out.append(slice(lo, hi))
    return tuple(out)


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        g = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return f / (f + g)


DEFAULT_GRID = (256, 512)

SPHERE2_CONVENTIONS = (
    "sphere2: charts N (colatitude theta, azimuth phi) and S (theta', phi) with "
    "theta = pi - theta', azimuth preserved; N positively oriented, S negatively; "
    "overlap is an equatorial band; monopole transition k_NS = exp(-i q phi)."
)


def _sphere2(grid: tuple[int, int]) -> ChartedGeometry:
    n_theta, n_phi = grid
    if n_theta < 16:
        raise SchemaError("sphere2 needs at least 16 colatitude samples")
    band = n_theta // 8
    equator = n_theta - 1 - band
    h = math.pi / (2 * equator)
    top = (n_theta - 1) * h
    theta = h * np.arange(n_theta)
    lo, hi = math.pi / 2 - band * h, math.pi / 2 + band * h
    rho_n = 1.0 - smooth_step((theta - lo) / (hi - lo))
    rho_s = np.ones(n_theta)
    mirror = 2 * equator - np.arange(n_theta)
    in_band = mirror < n_theta
    rho_s[in_band] = 1.0 - rho_n[mirror[in_band]]
    charts = [
        Chart("N", (0.0, 0.0), (top, 2 * math.pi), grid, (False, True), +1,
              np.repeat(rho_n[:, None], n_phi, axis=1)),
        Chart("S", (0.0, 0.0), (top, 2 * math.pi), grid, (False, True), -1,
              np.repeat(rho_s[:, None], n_phi, axis=1)),
    ]
    return ChartedGeometry.build("sphere2", charts, [(0, 1, (-1, 1), (math.pi, 0.0))],
                                 conventions=SPHERE2_CONVENTIONS)


def builtin_geometry(name: str, grid: Sequence[int] | None = None) -> ChartedGeometry:
    """Catalog geometries ``sphere2``, ``torus1`` and ``plane1``."""
    grid = tuple(int(g) for g in (grid or DEFAULT_GRID))
    if len(grid) != 2 or min(grid) <= 0:
        raise SchemaError(f"grid must be two positive integers, got {list(grid)}")
    if name == "sphere2":
        return _sphere2(grid)
    if name == "torus1":
        chart = Chart("T", (0.0, 0.0), (2 * math.pi, 2 * math.pi), grid, (True, True))
        return ChartedGeometry("torus1", (chart,), conventions="torus1: single chart [0,2pi)^2, both axes periodic.")
    if name == "plane1":
        chart = Chart("P", (-1.0, -1.0), (1.0, 1.0), grid, (False, False))
        return ChartedGeometry("plane1", (chart,), conventions="plane1: single chart [-1,1]^2 with coordinates (x, y).")
    raise SchemaError(f"unknown geometry {name!r}; known: sphere2, torus1, plane1")
