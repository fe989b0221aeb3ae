"""Connections in local trivializations, curvature, lifted connective structures.

A connection on a K-bundle over a :class:`~glift.geometry.ChartedGeometry`
is a family of matrix-valued 1-forms A_i (one per chart) together with
transition functions k_ij sampled on the chart-i block of each overlap.
Gauge compatibility reads

    A_j = Ad(k_ij^-1) A_i + k_ij^-1 dk_ij,   Ad(g) X = g X g^-1,

with A_j pulled back to chart-i coordinates.  Curvature is
F = dA + A∧A, i.e. F(∂x, ∂y) = ∂x A_y - ∂y A_x + [A_x, A_y].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
from scipy.interpolate import RegularGridInterpolator

from .errors import BranchCutError, InconsistencyError, SchemaError, ToleranceError
from .forms import FormField, Grid, exterior_derivative, pull_back_affine, wedge
from .geometry import Chart, ChartedGeometry, Overlap, triple_region
from .groups import MatrixGroup

U1 = MatrixGroup("u", 1)
CHERN_DEFECT_LIMIT = 0.05


def chart_grid(chart: Chart) -> Grid:
    return Grid(chart.spacing, chart.periodic, chart.shape)


def block_points(chart: Chart, region: Sequence[slice]) -> np.ndarray:
    """Parameter coordinates of the samples in ``region``, shape block + (dim,)."""
    return np.stack([m[tuple(region)] for m in chart.mesh()], axis=-1)


def relocate(values: np.ndarray, ov_ij: Overlap, ov_ji: Overlap) -> np.ndarray:
    """Re-lay values sampled on chart i's overlap block onto chart j's block."""
    idx = [t - r.start for t, r in zip(ov_ji.target, ov_ij.region)]
    return values[np.ix_(*idx)]


def _embed(block: np.ndarray, shape: tuple[int, ...], region: Sequence[slice]) -> np.ndarray:
    full = np.full(shape + block.shape[len(shape):], np.nan, dtype=block.dtype)
    full[tuple(region)] = block
    return full


def _ad_inv(g: np.ndarray, x: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """Ad(g^-1) x = g^-1 x g, batched."""
    return ginv @ x @ g


def maurer_cartan(group: MatrixGroup, g: np.ndarray, grid: Grid, order: int = 4) -> FormField:
    """g^-1 dg by finite differences of the sampled group-valued function."""
    zero_form = FormField(grid, 0, {(): np.asarray(g, dtype=complex)}, g.shape[grid.dim:])
    dg = exterior_derivative(zero_form, order)
    ginv = group.inv(g)
    return dg.apply(lambda a: ginv @ a)


def _pulled(form: FormField, ov: Overlap, grid: Grid) -> FormField:
    """Chart-j form restricted to the overlap, expressed on chart i's block ``grid`` and coordinates."""
    comps = {I: ov.take_target(a) for I, a in form.components.items()}
    return pull_back_affine(FormField(grid, form.degree, comps, form.fiber), ov.sign)


def _interpolator(chart: Chart, arr: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Bilinear (multilinear) interpolation of a sampled array, wrapping periodic axes."""
    axes = chart.axes()
    data = arr
    for a, per in enumerate(chart.periodic):
        if per:
            axes[a] = np.append(axes[a], chart.upper[a])
            data = np.concatenate([data, np.take(data, [0], axis=a)], axis=a)
    fiber = arr.shape[chart.dim:]
    flat = data.reshape(data.shape[:chart.dim] + (-1,))
    re = RegularGridInterpolator(axes, np.real(flat), method="linear")
    im = RegularGridInterpolator(axes, np.imag(flat), method="linear")

    def evaluate(points):
        pts = np.array(points, dtype=float)
        for a, per in enumerate(chart.periodic):
            if per:
                lo, hi = chart.lower[a], chart.upper[a]
                pts[..., a] = lo + np.mod(pts[..., a] - lo, hi - lo)
        flat_pts = pts.reshape(-1, chart.dim)
        out = re(flat_pts) + 1j * im(flat_pts)
        return out.reshape(pts.shape[:-1] + fiber)

    return evaluate


@dataclass(eq=False)
class LocalConnection:
    """Per-chart matrix 1-forms plus sampled transition functions.

    ``transitions[(i, j)]`` has shape ``overlap(i, j).block_shape + (n, n)``.
    ``evaluators[i]`` (optional) returns the exact coefficients at arbitrary
    parameter points, shape ``points.shape[:-1] + (dim, n, n)``; without it
    off-grid evaluation interpolates the samples.
    """

    geometry: ChartedGeometry
    group: MatrixGroup
    forms: list[FormField]
    transitions: dict[tuple[int, int], np.ndarray]
    name: str = ""
    evaluators: list[Callable | None] | None = None
    transition_evaluators: dict[tuple[int, int], Callable] | None = None
    _interp: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.forms) != len(self.geometry.charts):
            raise SchemaError(f"need one 1-form per chart ({len(self.geometry.charts)}), got {len(self.forms)}")
        n = self.group.n
        for c, (chart, f) in enumerate(zip(self.geometry.charts, self.forms)):
            if f.degree != 1 or f.grid.shape != chart.shape or f.fiber != (n, n):
                raise SchemaError(f"chart {chart.name!r}: expected a 1-form with {n}x{n} coefficients")
            for I, a in f.components.items():
                if not np.all(np.isfinite(a)):
                    bad = np.argwhere(~np.isfinite(a))[0][:chart.dim]
                    raise SchemaError(f"chart {chart.name!r}: non-finite coefficient at sample {tuple(int(x) for x in bad)}")
        for ov in self.geometry.overlaps:
            k = self.transitions.get((ov.i, ov.j))
            if k is None:
                raise SchemaError(f"missing transition on overlap ({ov.i}, {ov.j})")
            if k.shape != ov.block_shape + (n, n):
                raise SchemaError(f"transition ({ov.i}, {ov.j}) has shape {k.shape}, expected {ov.block_shape + (n, n)}")

    @property
    def dim(self) -> int:
        return self.geometry.charts[0].dim

    @classmethod
    def from_functions(cls, geometry: ChartedGeometry, group: MatrixGroup,
                       coefficients: Sequence[Callable[[np.ndarray], np.ndarray]],
                       transitions: dict[tuple[int, int], Callable[[np.ndarray], np.ndarray]] | None = None,
                       name: str = "") -> "LocalConnection":
        """Sample analytic data.

        ``coefficients[i](points)`` returns shape ``points.shape[:-1] + (dim, n, n)``
        in chart-i parameters; ``transitions[(i, j)](points)`` returns k_ij at
        chart-i parameters.  One direction per overlap suffices; the other is
        the pointwise inverse.
        """
        transitions = dict(transitions or {})
        forms = []
        for chart, fn in zip(geometry.charts, coefficients):
            pts = np.stack(chart.mesh(), axis=-1)
            vals = np.asarray(fn(pts), dtype=complex)
            comps = {(a,): vals[..., a, :, :] for a in range(chart.dim)}
            forms.append(FormField(chart_grid(chart), 1, comps, (group.n, group.n)))
        evals: dict[tuple[int, int], Callable] = {}
        for ov in geometry.overlaps:
            if (ov.i, ov.j) in transitions:
                evals[(ov.i, ov.j)] = transitions[(ov.i, ov.j)]
            elif (ov.j, ov.i) in transitions:
                back = transitions[(ov.j, ov.i)]
                cj = geometry.charts[ov.j]
                evals[(ov.i, ov.j)] = (lambda b, o, c: lambda p: group.inv(np.asarray(b(o.forward(p, c)))))(back, ov, cj)
            else:
                raise SchemaError(f"no transition function for overlap ({ov.i}, {ov.j})")
        sampled = {}
        for ov in geometry.overlaps:
            pts = block_points(geometry.charts[ov.i], ov.region)
            sampled[(ov.i, ov.j)] = np.asarray(evals[(ov.i, ov.j)](pts), dtype=complex)
        return cls(geometry, group, forms, sampled, name, list(coefficients), evals)

    def replace_form(self, chart: int, form: FormField) -> "LocalConnection":
        """Copy with one chart's form swapped (evaluators dropped for that chart)."""
        forms = list(self.forms)
        forms[chart] = form
        evals = list(self.evaluators) if self.evaluators else [None] * len(forms)
        evals[chart] = None
        return LocalConnection(self.geometry, self.group, forms, self.transitions, self.name, evals,
                               self.transition_evaluators)

    def evaluate(self, chart: int, points: np.ndarray) -> np.ndarray:
        """Coefficients (dim, n, n) at parameter points of a chart."""
        if self.evaluators and self.evaluators[chart] is not None:
            return np.asarray(self.evaluators[chart](np.asarray(points, dtype=float)), dtype=complex)
        key = ("form", chart)
        if key not in self._interp:
            f = self.forms[chart]
            stacked = np.stack([f.components[(a,)] for a in range(self.dim)], axis=self.dim)
            self._interp[key] = _interpolator(self.geometry.charts[chart], stacked)
        return self._interp[key](points)

    def transition(self, i: int, j: int, points: np.ndarray) -> np.ndarray:
        """k_ij at chart-i parameter points."""
        if self.transition_evaluators and (i, j) in self.transition_evaluators:
            return np.asarray(self.transition_evaluators[(i, j)](np.asarray(points, dtype=float)), dtype=complex)
        key = ("transition", i, j)
        if key not in self._interp:
            ov = self.geometry.overlap(i, j)
            chart = self.geometry.charts[i]
            lower = tuple(ax[r.start] for ax, r in zip(chart.axes(), ov.region))
            upper = tuple(ax[r.stop - 1] for ax, r in zip(chart.axes(), ov.region))
            grid = chart_grid(chart).block(ov.region)
            sub = Chart(f"{chart.name}|{i}{j}", lower, tuple(u + (h if p else 0.0) for u, h, p in
                                                              zip(upper, chart.spacing, grid.periodic)),
                        ov.block_shape, grid.periodic)
            self._interp[key] = _interpolator(sub, self.transitions[(i, j)])
        return self._interp[key](points)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def monopole(geometry: ChartedGeometry, charge: int) -> LocalConnection:
    """Charge-q U(1) monopole on ``sphere2``.

    A_N = i q (1 - cos θ)/2 dφ,  A_S = -i q (1 - cos θ')/2 dφ,
    k_NS = exp(-i q φ).
    """
    if geometry.name != "sphere2":
        raise SchemaError("the monopole preset lives on sphere2")
    q = float(charge)

    def north(p):
        out = np.zeros(p.shape[:-1] + (2, 1, 1), complex)
        out[..., 1, 0, 0] = 0.5j * q * (1 - np.cos(p[..., 0]))
        return out

    def south(p):
        return -north(p)

    def k_ns(p):
        return np.exp(-1j * q * p[..., 1])[..., None, None]

    return LocalConnection.from_functions(geometry, U1, [north, south], {(0, 1): k_ns}, f"monopole(q={charge:g})")


def constant_connection(geometry: ChartedGeometry, group: MatrixGroup, matrices: Sequence) -> LocalConnection:
    """A = Σ_a M_a du_a with constant algebra elements on a single-chart geometry."""
    if len(geometry.charts) != 1:
        raise SchemaError("constant connections are defined on single-chart geometries")
    mats = np.asarray(matrices, dtype=complex)
    chart = geometry.charts[0]
    if mats.shape != (chart.dim, group.n, group.n):
        raise SchemaError(f"need {chart.dim} matrices of size {group.n}x{group.n}")
    res = group.algebra_residual(mats)
    if res > 1e-9:
        raise SchemaError(f"matrices are not in the Lie algebra of {group} (residual {res:.2e})")
    return LocalConnection.from_functions(geometry, group, [lambda p: np.broadcast_to(mats, p.shape[:-1] + mats.shape)],
                                          name="constant")


def zero_connection(geometry: ChartedGeometry, group: MatrixGroup) -> LocalConnection:
    n = group.n
    dim = geometry.charts[0].dim
    coeff = [lambda p: np.zeros(p.shape[:-1] + (dim, n, n), complex)] * len(geometry.charts)
    trans = {(ov.i, ov.j): (lambda p: np.broadcast_to(np.eye(n, dtype=complex), p.shape[:-1] + (n, n)))
             for ov in geometry.overlaps}
    return LocalConnection.from_functions(geometry, group, coeff, trans, "zero")


# ---------------------------------------------------------------------------
# Curvature and gauge compatibility
# ---------------------------------------------------------------------------


def curvature_form(A: FormField, order: int = 4) -> FormField:
    """dA + A∧A for one matrix-valued 1-form."""
    return exterior_derivative(A, order) + wedge(A, A)


def curvature(A: LocalConnection, order: int = 4) -> list[FormField]:
    return [curvature_form(f, order) for f in A.forms]


@dataclass
class OverlapResidual:
    i: int
    j: int
    connection: float
    curvature: float
    worst_sample: tuple[int, ...]

    def to_json(self) -> dict:
        return {"overlap": [self.i, self.j], "connection_residual": self.connection,
                "curvature_residual": self.curvature, "worst_sample": list(self.worst_sample)}


def gauge_compat_residual(A: LocalConnection, order: int = 4) -> list[OverlapResidual]:
    """Per overlap: max ‖A_j - Ad(k^-1)A_i - k^-1 dk‖ and ‖F_j - Ad(k^-1)F_i‖.

    ``worst_sample`` is the chart-i grid index of the largest connection residual.
    """
    F = curvature(A, order)
    out = []
    for ov in A.geometry.overlaps:
        k = A.transitions[(ov.i, ov.j)]
        kinv = A.group.inv(k)
        grid = A.forms[ov.i].grid.block(ov.region)
        Ai = A.forms[ov.i].restrict(ov.region)
        Aj = _pulled(A.forms[ov.j], ov, grid)
        mc = maurer_cartan(A.group, k, grid, order)
        diff = Aj - Ai.apply(lambda x: _ad_inv(k, x, kinv)) - mc
        Fi = F[ov.i].restrict(ov.region)
        Fj = _pulled(F[ov.j], ov, grid)
        fdiff = Fj - Fi.apply(lambda x: _ad_inv(k, x, kinv))
        field_ = diff.norm_field()
        worst = np.unravel_index(int(np.argmax(field_)), field_.shape)
        sample = tuple(int(w + r.start) for w, r in zip(worst, ov.region))
        out.append(OverlapResidual(ov.i, ov.j, float(field_.max()), fdiff.max_norm(), sample))
    return out


def _interior(grid: Grid, margin: int) -> tuple[slice, ...]:
    return tuple(slice(None) if p else slice(margin, n - margin) for p, n in zip(grid.periodic, grid.shape))


def bianchi_residual(A: LocalConnection, margin: int = 2, order: int = 4) -> float:
    """max ‖dF + A∧F - F∧A‖ over interior samples (0 on surfaces, where 3-forms vanish)."""
    worst = 0.0
    for f in A.forms:
        F = curvature_form(f, order)
        dF = exterior_derivative(F, order)
        if not dF.components:
            continue
        res = dF + wedge(f, F) - wedge(F, f)
        worst = max(worst, res.restrict(_interior(f.grid, margin)).max_norm())
    return worst


# ---------------------------------------------------------------------------
# Chern number
# ---------------------------------------------------------------------------


def quadrature_weights(chart: Chart) -> np.ndarray:
    """Tensor-product weights: uniform on periodic axes, composite Simpson otherwise."""
    w = np.ones(())
    for n, h, per in zip(chart.shape, chart.spacing, chart.periodic):
        if per:
            axis_w = np.full(n, h)
        else:
            axis_w = scipy.integrate.simpson(np.eye(n), dx=h, axis=1)
        w = np.multiply.outer(w, axis_w)
    return w


@dataclass
class ChernResult:
    value: int
    raw: float
    defect: float
    per_chart: list[float]

    def to_json(self) -> dict:
        return {"chern_number": self.value, "raw": self.raw, "defect": self.defect, "per_chart": self.per_chart}


def chern_number(F: Sequence[FormField], geometry: ChartedGeometry, limit: float = CHERN_DEFECT_LIMIT) -> ChernResult:
    """(1/2πi) Σ_charts orientation ∫ ρ F, rounded to the nearest integer.

    Sums use :func:`math.fsum` so the raw value is independent of summation order.
    """
    if len(F) != len(geometry.charts):
        raise SchemaError("need one curvature form per chart")
    parts = []
    for f, chart in zip(F, geometry.charts):
        if chart.dim != 2 or f.degree != 2:
            raise SchemaError("chern_number integrates 2-forms over surfaces")
        if f.fiber not in ((), (1, 1)):
            raise SchemaError("chern_number needs abelian (1x1) curvature")
        density = f.components[(0, 1)].reshape(chart.shape)
        weighted = chart.orientation * chart.weight_array() * quadrature_weights(chart) * density / (2j * math.pi)
        if np.max(np.abs(np.imag(weighted))) * weighted.size > 1e-6:
            raise InconsistencyError(f"chart {chart.name!r}: curvature is not imaginary-valued")
        parts.append(math.fsum(np.real(weighted).ravel().tolist()))
    raw = math.fsum(parts)
    value = int(round(raw))
    defect = abs(raw - value)
    if defect > limit:
        raise ToleranceError(f"Chern integral {raw:.6f} is not near an integer", defect, limit)
    return ChernResult(value, raw, defect, parts)


# ---------------------------------------------------------------------------
# Lifted connective structures
# ---------------------------------------------------------------------------


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, m = a.shape[-1], b.shape[-1]
    lead = np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    out = np.zeros(lead + (n + m, n + m), dtype=np.result_type(a, b, complex))
    out[..., :n, :n] = a
    out[..., n:, n:] = b
    return out


@dataclass(frozen=True, eq=False)
class AlgebraSplitting:
    """Numeric data of a central extension H -> G -> K of matrix groups.

    ``lift_alg`` is a linear right inverse of ``project_alg``; ``include_h``
    and ``h_part`` embed and extract the H-algebra (both ``None`` for discrete H).
    """

    name: str
    G: MatrixGroup
    K: MatrixGroup
    H: MatrixGroup | None
    project_group: Callable
    section_group: Callable
    project_alg: Callable
    lift_alg: Callable
    include_h: Callable | None = None
    h_part: Callable | None = None

    @property
    def discrete_h(self) -> bool:
        return self.H is None


def circle_squaring_splitting() -> AlgebraSplitting:
    """U(1) -> U(1), z -> z^2 with kernel ±1; algebra lift is the half angle."""
    return AlgebraSplitting(
        "circle-squaring", U1, U1, None,
        project_group=lambda g: g @ g,
        section_group=lambda k: np.sqrt(np.asarray(k, dtype=complex)),
        project_alg=lambda x: 2 * x,
        lift_alg=lambda a: a / 2,
    )


def product_splitting(K: MatrixGroup, H: MatrixGroup) -> AlgebraSplitting:
    """G = K × H as block-diagonal matrices; project is the K block."""
    n, m = K.n, H.n
    G = MatrixGroup("u", n + m)

    def zeros_like_h(a):
        return np.zeros(np.shape(a)[:-2] + (m, m), complex)

    def zeros_like_k(h):
        return np.zeros(np.shape(h)[:-2] + (n, n), complex)

    return AlgebraSplitting(
        f"product({K.kind}{n} x {H.kind}{m})", G, K, H,
        project_group=lambda g: g[..., :n, :n],
        section_group=lambda k: _block_diag(k, np.broadcast_to(np.eye(m), np.shape(k)[:-2] + (m, m))),
        project_alg=lambda x: x[..., :n, :n],
        lift_alg=lambda a: _block_diag(a, zeros_like_h(a)),
        include_h=lambda h: _block_diag(zeros_like_k(h), h),
        h_part=lambda x: x[..., n:, n:],
    )


def _check_block_continuity(where, k: np.ndarray, g: np.ndarray, K: MatrixGroup, G: MatrixGroup, periodic) -> None:
    for axis in range(k.ndim - 2):
        if periodic[axis]:
            k0, k1, g0, g1 = k, np.roll(k, -1, axis), g, np.roll(g, -1, axis)
        else:
            m = k.shape[axis]
            k0, k1 = np.take(k, range(m - 1), axis), np.take(k, range(1, m), axis)
            g0, g1 = np.take(g, range(m - 1), axis), np.take(g, range(1, m), axis)
        dk, dg = K.distance(k1, k0), G.distance(g1, g0)
        jumps = np.argwhere(dg > np.maximum(0.1, 10.0 * dk + 1e-6))
        if jumps.size:
            raise BranchCutError(f"lifted transition on overlap {where} jumps along axis {axis}: the section "
                                 f"crosses its branch cut; supply continuous lifted transitions",
                                 location=f"block sample {tuple(int(x) for x in jumps[0])}")


@dataclass(eq=False)
class LiftedConnection:
    """Family w_i of G-algebra valued 1-forms over a base K-connection."""

    base: LocalConnection
    splitting: AlgebraSplitting
    forms: list[FormField]
    transitions: dict[tuple[int, int], np.ndarray]
    h_forms: list[FormField | None]
    projection_residual: float

    @property
    def geometry(self) -> ChartedGeometry:
        return self.base.geometry


def lift_connection(A: LocalConnection, splitting: AlgebraSplitting,
                    g: dict[tuple[int, int], np.ndarray | Callable] | None = None,
                    h: Sequence[FormField | Callable | None] | None = None) -> LiftedConnection:
    """w_i = lift_alg(A_i) + include_h(h_i).

    ``g`` supplies lifted transitions (arrays on chart-i overlap blocks or
    callables of chart-i parameters); missing ones come from the group
    section, which must not cross a branch cut on the block.  ``h`` entries
    may be FormFields or callables returning ``(dim, m, m)`` coefficients.
    """
    if A.group != splitting.K:
        raise SchemaError(f"connection is valued in {A.group}, splitting expects {splitting.K}")
    geo = A.geometry
    n_g = splitting.G.n
    g = dict(g or {})
    lifted: dict[tuple[int, int], np.ndarray] = {}
    for ov in geo.overlaps:
        key, rev = (ov.i, ov.j), (ov.j, ov.i)
        chart = geo.charts[ov.i]
        if key in g:
            val = g[key]
            val = np.asarray(val(block_points(chart, ov.region)) if callable(val) else val, dtype=complex)
        elif rev in g:
            continue
        else:
            k = A.transitions[key]
            val = np.asarray(splitting.section_group(k), dtype=complex)
            _check_block_continuity(key, k, val, splitting.K, splitting.G, chart_grid(chart).block(ov.region).periodic)
        if val.shape != ov.block_shape + (n_g, n_g):
            raise SchemaError(f"lifted transition {key} has shape {val.shape}, expected {ov.block_shape + (n_g, n_g)}")
        lifted[key] = val
    for ov in geo.overlaps:
        if (ov.i, ov.j) not in lifted:
            back = geo.overlap(ov.j, ov.i)
            lifted[(ov.i, ov.j)] = relocate(splitting.G.inv(lifted[(ov.j, ov.i)]), back, ov)
    for (i, j), val in lifted.items():
        err = float(np.max(splitting.K.distance(splitting.project_group(val), A.transitions[(i, j)])))
        if err > 1e-8:
            raise InconsistencyError(f"lifted transition does not project to k_{i}{j} (error {err:.2e})", location=(i, j))
    h_forms: list[FormField | None] = []
    forms = []
    for c, (chart, base) in enumerate(zip(geo.charts, A.forms)):
        hc = h[c] if h is not None and c < len(h) else None
        if callable(hc):
            vals = np.asarray(hc(np.stack(chart.mesh(), axis=-1)), dtype=complex)
            hc = FormField(base.grid, 1, {(a,): vals[..., a, :, :] for a in range(chart.dim)}, vals.shape[-2:])
        if hc is not None and splitting.discrete_h:
            if hc.max_norm() > 0:
                raise SchemaError("H is discrete: its algebra is zero and no H-part can be added")
            hc = None
        w = base.apply(splitting.lift_alg)
        if hc is not None:
            w = w + hc.apply(splitting.include_h)
        h_forms.append(hc)
        forms.append(w)
    proj = max(float((w.apply(splitting.project_alg) - a).max_norm()) for w, a in zip(forms, A.forms))
    return LiftedConnection(A, splitting, forms, lifted, h_forms, proj)


@dataclass
class OverlapDifference:
    """a_ij = w_j - g_ij^* w_i on every overlap, and the identities it satisfies.

    ``a`` holds the H-component (zero for discrete H), on chart-i blocks in
    chart-i coordinates, with a_ji defined as -a_ij so antisymmetry is exact.
    ``pushforward_residual`` is the size of the discarded K-component,
    which vanishes exactly in theory and measures discretization error.
    """

    a: dict[tuple[int, int], FormField]
    pushforward_residual: float
    r1: float | None
    r2: float
    antisymmetry: float
    warnings: list[str]

    def to_json(self) -> dict:
        return {"r1": self.r1, "r2": self.r2, "pushforward_residual": self.pushforward_residual,
                "antisymmetry": self.antisymmetry, "warnings": self.warnings,
                "a_max": {f"{i},{j}": f.max_norm() for (i, j), f in sorted(self.a.items())}}


def _raw_difference(L: LiftedConnection, ov: Overlap, order: int) -> FormField:
    G = L.splitting.G
    g = L.transitions[(ov.i, ov.j)]
    ginv = G.inv(g)
    grid = L.forms[ov.i].grid.block(ov.region)
    wi = L.forms[ov.i].restrict(ov.region)
    wj = _pulled(L.forms[ov.j], ov, grid)
    return wj - wi.apply(lambda x: _ad_inv(g, x, ginv)) - maurer_cartan(G, g, grid, order)


def _h_component(L: LiftedConnection, form: FormField) -> FormField:
    s = L.splitting
    if s.discrete_h:
        return form.apply(np.zeros_like)
    return form.apply(lambda x: s.include_h(s.h_part(x)))


def _on_chart_i(form: FormField, geo: ChartedGeometry, j: int, k: int, ov_ij: Overlap,
                rel: tuple[slice, ...]) -> FormField:
    """A form on chart j's (j, k) block, moved to the triple region inside chart i's (i, j) block."""
    ov_jk = geo.overlap(j, k)
    shape = geo.charts[j].shape
    full = FormField(Grid(form.grid.spacing, form.grid.periodic, shape), form.degree,
                     {I: _embed(a, shape, ov_jk.region) for I, a in form.components.items()}, form.fiber)
    grid_i = chart_grid(geo.charts[ov_ij.i]).block(ov_ij.region)
    return _pulled(full, ov_ij, grid_i).restrict(rel)


def _relative(region: Sequence[slice], inside: Sequence[slice]) -> tuple[slice, ...]:
    return tuple(slice(r.start - b.start, r.stop - b.start) for r, b in zip(region, inside))


def overlap_difference(L: LiftedConnection, order: int = 4) -> OverlapDifference:
    """Compute a_ij and the residuals of the triple-overlap identities.

    r1 = max ‖a_jk - a_ik + a_ij + c^-1 dc‖ on triple overlaps with
    c = g_ij g_jk g_ki (the sign follows from a_ij = w_j - g_ij^* w_i);
    r2 = max of the Čech coboundary of the 2-forms da_ij, including the
    pair term ‖da_ij + da_ji‖ with a_ji computed independently.
    """
    geo = L.geometry
    G = L.splitting.G
    a: dict[tuple[int, int], FormField] = {}
    push = 0.0
    r2 = 0.0
    notes: list[str] = []
    for i, j in geo.pairs():
        ov, back = geo.overlap(i, j), geo.overlap(j, i)
        raw = _raw_difference(L, ov, order)
        a_ij = _h_component(L, raw)
        push = max(push, (raw - a_ij).max_norm())
        a[(i, j)] = a_ij
        flipped = {I: -relocate(x, ov, back) for I, x in a_ij.components.items()}
        a[(j, i)] = pull_back_affine(FormField(L.forms[j].grid.block(back.region), 1, flipped, a_ij.fiber), back.sign)
        indep = _h_component(L, _raw_difference(L, back, order))
        pair = exterior_derivative(a_ij, order) + _pulled_block(exterior_derivative(indep, order), back, ov, a_ij.grid)
        r2 = max(r2, pair.max_norm())
    anti = 0.0
    for i, j in geo.pairs():
        ov, back = geo.overlap(i, j), geo.overlap(j, i)
        moved = _pulled_block(a[(j, i)], back, ov, a[(i, j)].grid).components
        anti = max(anti, max((float(np.max(np.abs(moved[I] + a[(i, j)].components[I]))) for I in moved), default=0.0))
    if anti != 0.0:
        raise InconsistencyError(f"a_ji = -a_ij violated by {anti:.2e}")
    triples = geo.triples()
    r1: float | None = None
    if not triples:
        msg = f"geometry {geo.name!r} has no triple overlaps: r1 skipped"
        warnings.warn(msg, UserWarning, stacklevel=2)
        notes.append(msg)
    else:
        r1 = 0.0
        for i, j, k in triples:
            ov_ij, ov_ik = geo.overlap(i, j), geo.overlap(i, k)
            region = triple_region(ov_ij, ov_ik)
            rel_ij, rel_ik = _relative(region, ov_ij.region), _relative(region, ov_ik.region)
            a_ij = a[(i, j)].restrict(rel_ij)
            a_ik = a[(i, k)].restrict(rel_ik)
            a_jk = _on_chart_i(a[(j, k)], geo, j, k, ov_ij, rel_ij)
            g_ij = L.transitions[(i, j)][rel_ij]
            g_jk = _embed(L.transitions[(j, k)], geo.charts[j].shape, geo.overlap(j, k).region)
            g_jk = ov_ij.take_target(g_jk)[rel_ij]
            g_ki = G.inv(L.transitions[(i, k)][rel_ik])
            c = g_ij @ g_jk @ g_ki
            if np.any(~np.isfinite(c)):
                raise InconsistencyError(f"triple overlap {(i, j, k)} is not covered consistently")
            grid = L.forms[i].grid.block(region)
            if L.splitting.discrete_h:
                spread = float(np.max(G.distance(c, c.reshape((-1,) + c.shape[-2:])[0])))
                if spread > 1e-8:
                    raise InconsistencyError(f"c on triple {(i, j, k)} is not locally constant", location=(i, j, k))
                identity = a_jk - a_ik + a_ij
            else:
                identity = a_jk - a_ik + a_ij + maurer_cartan(G, c, grid, order)
            r1 = max(r1, identity.max_norm())
            da = [exterior_derivative(x, order) for x in (a_jk, a_ik, a_ij)]
            r2 = max(r2, (da[0] - da[1] + da[2]).max_norm())
    return OverlapDifference(a, push, r1, r2, anti, notes)


def _pulled_block(form: FormField, back: Overlap, ov: Overlap, grid: Grid) -> FormField:
    """A form on chart j's (j, i) block, re-laid on chart i's (i, j) ``grid`` in chart-i coordinates."""
    comps = {I: relocate(x, back, ov) for I, x in form.components.items()}
    return pull_back_affine(FormField(grid, form.degree, comps, form.fiber), ov.sign)


@dataclass
class GerbeCurvature:
    omega: list[FormField]
    lift_independence: float | None
    flags: list[str]

    def to_json(self) -> dict:
        return {"omega_max": [f.max_norm() for f in self.omega], "lift_independence": self.lift_independence,
                "flags": self.flags}


def gerbe_curvature(L: LiftedConnection, other: LiftedConnection | None = None, order: int = 4) -> GerbeCurvature:
    """Ω_i = d K(w_i) per chart, and for a second lift the residual ‖K(w) - K(w') - d(w - w')‖."""
    omega, flags = [], []
    for c, w in enumerate(L.forms):
        K = curvature_form(w, order)
        om = exterior_derivative(K, order)
        if "vanishes-by-dimension" in om.flags:
            flags.append(f"chart {L.geometry.charts[c].name}: 3-forms vanish on a {w.grid.dim}-dimensional chart")
        omega.append(om)
    resid = None
    if other is not None:
        if len(other.forms) != len(L.forms):
            raise SchemaError("the two lifts live on different geometries")
        resid = 0.0
        for w, w2 in zip(L.forms, other.forms):
            diff = curvature_form(w, order) - curvature_form(w2, order) - exterior_derivative(w - w2, order)
            resid = max(resid, diff.max_norm())
    return GerbeCurvature(omega, resid, flags)
