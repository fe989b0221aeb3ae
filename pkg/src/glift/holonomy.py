"""Parallel transport, loop holonomy, reductions by a uniform subgroup, towers.

Transport solves g'(t) = -A(c'(t)) g(t), g(0) = e in the trivialization of
the current chart.  If u(t) = s_i(c(t)) g_i(t) is the horizontal lift, then
switching to chart j (s_j = s_i k_ij) replaces g_i by k_ij^-1 g_i.  With
this left-action convention transport along c1 followed by c2 equals
T(c2) T(c1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .connections import LocalConnection, gauge_compat_residual
from .errors import InconsistencyError, SchemaError, ToleranceError
from .forms import FormField, exterior_derivative, wedge
from .geometry import ChartedGeometry
from .groups import PAULI, MatrixGroup, su2_to_so3

MIN_STEPS = 8
SWITCH_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Segment:
    """Curve t -> chart parameters on [0, 1], with its velocity."""

    chart: int
    curve: Callable[[np.ndarray], np.ndarray]
    velocity: Callable[[np.ndarray], np.ndarray]
    steps: int

    def reversed(self) -> "Segment":
        c, v = self.curve, self.velocity
        return Segment(self.chart, lambda t: c(1.0 - np.asarray(t)), lambda t: -v(1.0 - np.asarray(t)), self.steps)

    def start(self) -> np.ndarray:
        return np.asarray(self.curve(np.array([0.0])))[0]

    def end(self) -> np.ndarray:
        return np.asarray(self.curve(np.array([1.0])))[0]


def _periodic_gap(a: np.ndarray, b: np.ndarray, chart) -> float:
    d = np.abs(np.asarray(a, float) - np.asarray(b, float))
    for k, per in enumerate(chart.periodic):
        if per:
            period = chart.upper[k] - chart.lower[k]
            d[k] = min(d[k] % period, period - d[k] % period)
    return float(d.max())


@dataclass
class SwitchRecord:
    segment: int
    source: int
    target: int
    point: list[float]
    value: np.ndarray | None = None
    exact: bool = True
    interpolation_error: float = 0.0

    def to_json(self) -> dict:
        return {"segment": self.segment, "from": self.source, "to": self.target, "point": self.point,
                "exact": self.exact, "interpolation_error": self.interpolation_error}


@dataclass(eq=False)
class PathSpec:
    """Piecewise path through the charts of a geometry.

    Consecutive segments must meet at a point of the overlap of their charts
    (within 1e-8 after the transition map); a closed path ends where it starts.
    """

    geometry: ChartedGeometry
    segments: list[Segment]
    closed: bool = False
    switches: list[SwitchRecord] = field(default_factory=list)

    def __post_init__(self):
        if not self.segments:
            raise SchemaError("a path needs at least one segment")
        geo = self.geometry
        self.switches = []
        for s, seg in enumerate(self.segments):
            if not 0 <= seg.chart < len(geo.charts):
                raise SchemaError(f"segment {s}: chart {seg.chart} does not exist")
            if seg.steps < MIN_STEPS:
                raise SchemaError(f"segment {s}: {seg.steps} steps; at least {MIN_STEPS} are required")
            chart = geo.charts[seg.chart]
            ts = np.linspace(0.0, 1.0, 2 * seg.steps + 1)
            pts = np.asarray(seg.curve(ts), dtype=float)
            for t, p in zip(ts, pts):
                if not chart.contains(p, tol=1e-10):
                    raise SchemaError(f"segment {s} leaves chart {chart.name!r} at t={t:.4f} (point {p.tolist()})")
        pairs = list(zip(range(len(self.segments) - 1), range(1, len(self.segments))))
        if self.closed:
            pairs.append((len(self.segments) - 1, 0))
        for a, b in pairs:
            sa, sb = self.segments[a], self.segments[b]
            end, start = sa.end(), sb.start()
            if sa.chart == sb.chart:
                gap = _periodic_gap(end, start, geo.charts[sa.chart])
                if gap > SWITCH_TOL:
                    what = "closed path does not return to its start" if b == 0 else f"segments {a} and {b} do not meet"
                    raise SchemaError(f"{what} (gap {gap:.2e})")
                continue
            ov = geo.overlap(sa.chart, sb.chart)
            if ov is None:
                raise SchemaError(f"segments {a} and {b}: charts {sa.chart} and {sb.chart} do not overlap")
            mapped = ov.forward(end[None, :], geo.charts[sb.chart])[0]
            gap = _periodic_gap(mapped, start, geo.charts[sb.chart])
            if gap > SWITCH_TOL:
                raise SchemaError(f"switch after segment {a}: points disagree under the transition map (gap {gap:.2e})")
            self.switches.append(SwitchRecord(a, sa.chart, sb.chart, end.tolist()))

    @property
    def total_steps(self) -> int:
        return sum(s.steps for s in self.segments)

    def start_point(self) -> tuple[int, np.ndarray]:
        return self.segments[0].chart, self.segments[0].start()

    def reversed(self) -> "PathSpec":
        return PathSpec(self.geometry, [s.reversed() for s in reversed(self.segments)], self.closed)

    def then(self, other: "PathSpec") -> "PathSpec":
        """This path followed by ``other``."""
        return PathSpec(self.geometry, self.segments + other.segments, False)

    # constructors ----------------------------------------------------------

    @classmethod
    def straight(cls, geometry: ChartedGeometry, chart: int, start, end, steps: int = 1024) -> "PathSpec":
        a, b = np.asarray(start, float), np.asarray(end, float)
        seg = Segment(chart, lambda t: a + np.multiply.outer(np.asarray(t), b - a),
                      lambda t: np.broadcast_to(b - a, np.shape(t) + a.shape), steps)
        return cls(geometry, [seg])

    @classmethod
    def from_samples(cls, geometry: ChartedGeometry, chart: int, points, steps: int | None = None,
                     closed: bool = False) -> "PathSpec":
        """Cubic-spline path through sampled parameter points at uniform t."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or len(pts) < 4:
            raise SchemaError("a sampled path needs at least 4 points of the chart dimension")
        t = np.linspace(0.0, 1.0, len(pts))
        spline = CubicSpline(t, pts, axis=0)
        d = spline.derivative()
        seg = Segment(chart, lambda s: spline(np.asarray(s)), lambda s: d(np.asarray(s)), steps or 4 * len(pts))
        return cls(geometry, [seg], closed)

    @staticmethod
    def _sphere_side(geometry: ChartedGeometry, theta: float) -> tuple[int, float]:
        if geometry.name != "sphere2":
            raise SchemaError("latitude and meridian paths live on sphere2")
        if not 0.0 <= theta <= math.pi:
            raise SchemaError(f"colatitude must lie in [0, pi], got {theta}")
        return (0, theta) if theta <= math.pi / 2 else (1, math.pi - theta)

    @classmethod
    def latitude(cls, geometry: ChartedGeometry, theta: float, turns: float = 1.0, steps: int = 1024,
                 phi0: float = 0.0) -> "PathSpec":
        """Loop φ -> φ0 + 2π·turns·t at fixed colatitude on ``sphere2``.

        Uses chart N for θ ≤ π/2 and chart S at θ' = π - θ otherwise.
        """
        chart, th = cls._sphere_side(geometry, theta)
        if theta in (0.0, math.pi):
            raise SchemaError("a latitude loop needs 0 < theta < pi")
        w = 2 * math.pi * turns
        seg = Segment(chart,
                      lambda t: np.stack(np.broadcast_arrays(np.full(np.shape(t), th), phi0 + w * np.asarray(t)), -1),
                      lambda t: np.stack(np.broadcast_arrays(np.zeros(np.shape(t)), np.full(np.shape(t), w)), -1),
                      steps)
        return cls(geometry, [seg], closed=float(turns).is_integer())

    @classmethod
    def _meridian_segments(cls, geometry, theta_a, theta_b, phi, steps) -> list[Segment]:
        cuts = [theta_a, theta_b]
        if (theta_a - math.pi / 2) * (theta_b - math.pi / 2) < 0:
            cuts.insert(1, math.pi / 2)
        segs = []
        for a, b in zip(cuts, cuts[1:]):
            chart, _ = cls._sphere_side(geometry, (a + b) / 2)
            ua, ub = (a, b) if chart == 0 else (math.pi - a, math.pi - b)
            segs.append(Segment(chart,
                                (lambda ua, ub: lambda t: np.stack(np.broadcast_arrays(
                                    ua + (ub - ua) * np.asarray(t), np.full(np.shape(t), phi)), -1))(ua, ub),
                                (lambda d: lambda t: np.stack(np.broadcast_arrays(
                                    np.full(np.shape(t), d), np.zeros(np.shape(t))), -1))(ub - ua),
                                steps))
        return segs

    @classmethod
    def meridian(cls, geometry: ChartedGeometry, theta_a: float, theta_b: float, phi: float = 0.0,
                 steps: int = 256) -> "PathSpec":
        """Path along the meridian φ from colatitude θa to θb, switching charts at the equator."""
        return cls(geometry, cls._meridian_segments(geometry, theta_a, theta_b, phi, steps))

    @classmethod
    def lasso(cls, geometry: ChartedGeometry, base_theta: float, theta: float, turns: float = 1.0,
              steps: int = 1024, phi: float = 0.0) -> "PathSpec":
        """Loop based at (base_theta, φ): out along the meridian, once around the latitude θ, back."""
        if abs(base_theta - theta) < 1e-15:
            return cls.latitude(geometry, theta, turns, steps, phi)
        out = cls._meridian_segments(geometry, base_theta, theta, phi, max(MIN_STEPS, steps // 4))
        loop = cls.latitude(geometry, theta, turns, steps, phi).segments
        back = [s.reversed() for s in reversed(out)]
        return cls(geometry, out + loop + back, closed=True)


@dataclass
class TransportResult:
    element: np.ndarray
    method: str
    steps: int
    switches: list[SwitchRecord]
    unitarity_drift: float

    def to_json(self, group: MatrixGroup) -> dict:
        return {"element": group.encode(self.element), "method": self.method, "steps": self.steps,
                "switches": [s.to_json() for s in self.switches], "unitarity_drift": self.unitarity_drift}


def _pullback_values(A: LocalConnection, seg: Segment, ts: np.ndarray) -> np.ndarray:
    """A(c'(t)) at the requested times, shape (len(ts), n, n)."""
    pts = np.asarray(seg.curve(ts), dtype=float)
    vel = np.asarray(seg.velocity(ts), dtype=float)
    coeffs = A.evaluate(seg.chart, pts)
    return np.einsum("ta,taij->tij", vel, coeffs)


def _switch_value(A: LocalConnection, rec: SwitchRecord) -> SwitchRecord:
    pt = np.asarray(rec.point, dtype=float)[None, :]
    value = A.transition(rec.source, rec.target, pt)[0]
    exact = bool(A.transition_evaluators and (rec.source, rec.target) in A.transition_evaluators)
    err = 0.0
    if not exact:
        # deviation from the nearest grid sample bounds the interpolation error
        ov = A.geometry.overlap(rec.source, rec.target)
        chart = A.geometry.charts[rec.source]
        idx = [int(np.clip(np.rint((p - lo) / h), r.start, r.stop - 1)) - r.start
               for p, lo, h, r in zip(pt[0], chart.lower, chart.spacing, ov.region)]
        err = float(np.max(np.abs(A.transitions[(rec.source, rec.target)][tuple(idx)] - value)))
    return SwitchRecord(rec.segment, rec.source, rec.target, rec.point, value, exact, err)


def parallel_transport(A: LocalConnection, path: PathSpec, method: str = "auto") -> TransportResult:
    """Solve g' = -A(c') g along the path; returns g(1) in the frame of the starting chart.

    ``method`` is ``"rk4"`` (classical Runge-Kutta), ``"quadrature"``
    (exp(-∫A) by Simpson's rule, abelian groups only) or ``"auto"``.
    """
    if path.geometry is not A.geometry and path.geometry.name != A.geometry.name:
        raise SchemaError("path and connection live on different geometries")
    G = A.group
    abelian = G.n == 1
    if method == "auto":
        method = "quadrature" if abelian else "rk4"
    if method == "quadrature" and not abelian:
        raise SchemaError("quadrature transport needs an abelian group")
    if method not in ("rk4", "quadrature"):
        raise SchemaError(f"unknown transport method {method!r}")
    switches = {rec.segment: _switch_value(A, rec) for rec in path.switches}
    g = np.eye(G.n, dtype=complex)
    records = []
    for s, seg in enumerate(path.segments):
        n = seg.steps
        h = 1.0 / n
        ts = np.linspace(0.0, 1.0, 2 * n + 1)
        a = _pullback_values(A, seg, ts)
        if method == "quadrature":
            w = np.full(2 * n + 1, 2.0)
            w[1::2] = 4.0
            w[0] = w[-1] = 1.0
            integral = math.fsum((w * a[:, 0, 0].real).tolist()) + 1j * math.fsum((w * a[:, 0, 0].imag).tolist())
            g = np.exp(-integral * h / 6.0) * g
        else:
            for k in range(n):
                a0, am, a1 = a[2 * k], a[2 * k + 1], a[2 * k + 2]
                k1 = -a0 @ g
                k2 = -am @ (g + 0.5 * h * k1)
                k3 = -am @ (g + 0.5 * h * k2)
                k4 = -a1 @ (g + h * k3)
                g = g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if s in switches:
            rec = switches[s]
            g = G.inv(rec.value) @ g if G.kind != "gl" else np.linalg.inv(rec.value) @ g
            records.append(rec)
    drift = G.check(g) if G.kind in ("u", "su", "so") else 0.0
    return TransportResult(g, method, path.total_steps, records, drift)


# ---------------------------------------------------------------------------
# Loop holonomy
# ---------------------------------------------------------------------------


def _cyclic_order(angles: Sequence[float], budget: int, tol: float) -> int | None:
    for q in range(1, budget + 1):
        if all(abs(q * a - round(q * a)) <= q * tol for a in angles):
            return q
    return None


def subgroup_summary(group: MatrixGroup, elements: Sequence[np.ndarray], budget: int = 64,
                     tol: float = 1e-8) -> dict:
    """Sampled description of the subgroup generated by ``elements``.

    Circle-valued (1x1) elements are classified as a finite cyclic group when
    all angles are multiples of 1/q for some q ≤ budget; otherwise the sample
    is reported as dense.  Matrix elements are closed under multiplication
    until either the set stabilizes (finite) or the budget is exhausted.
    """
    elements = [np.asarray(e, dtype=complex) for e in elements]
    eye = np.eye(group.n)
    if all(np.max(np.abs(e - eye)) <= tol for e in elements):
        return {"kind": "trivial", "order": 1}
    if group.n == 1:
        angles = [float(np.angle(e[0, 0]) / (2 * math.pi)) % 1.0 for e in elements]
        q = _cyclic_order(angles, budget, tol)
        if q is None:
            return {"kind": "dense-sample", "angles": angles, "budget": budget}
        return {"kind": "finite-cyclic", "order": q, "angles": angles}
    found = [eye.astype(complex)]
    frontier = list(found)
    while frontier:
        nxt = []
        for x in frontier:
            for gen in elements:
                y = gen @ x
                if all(np.max(np.abs(y - z)) > tol for z in found):
                    found.append(y)
                    nxt.append(y)
                    if len(found) > budget:
                        return {"kind": "dense-sample", "budget": budget}
        frontier = nxt
    return {"kind": "finite", "order": len(found)}


@dataclass
class HolonomySample:
    elements: list[np.ndarray]
    results: list[TransportResult]
    summary: dict


def loop_holonomy_sample(A: LocalConnection, loops: Sequence[PathSpec], basepoint=None,
                         budget: int = 64, tol: float = 1e-8) -> HolonomySample:
    """Transport around each loop and summarize the generated subgroup.

    ``basepoint`` is ``(chart, point)``; it defaults to the first loop's start.
    """
    if not loops:
        raise SchemaError("need at least one loop")
    chart0, p0 = basepoint if basepoint is not None else loops[0].start_point()
    p0 = np.asarray(p0, dtype=float)
    geo = A.geometry
    frames = []
    for n, loop in enumerate(loops):
        if not loop.closed:
            raise SchemaError(f"loop {n} is not closed")
        c, p = loop.start_point()
        # a loop may start in another chart at the same point; its holonomy is
        # then conjugated into the basepoint chart's frame
        ov = geo.overlap(chart0, c) if c != chart0 else None
        seen = p0 if c == chart0 else (ov.forward(p0[None, :], geo.charts[c])[0] if ov is not None else None)
        if seen is None or _periodic_gap(p, seen, geo.charts[c]) > SWITCH_TOL:
            raise SchemaError(f"loop {n} starts at chart {c} point {np.round(p, 10).tolist()}, "
                              f"not at the basepoint chart {chart0} point {np.round(p0, 10).tolist()}")
        frames.append(None if c == chart0 else A.transition(chart0, c, p0[None, :])[0])
    results = [parallel_transport(A, loop) for loop in loops]
    elements = [r.element if k is None else k @ r.element @ A.group.inv(k) for r, k in zip(results, frames)]
    return HolonomySample(elements, results, subgroup_summary(A.group, elements, budget, tol))


# ---------------------------------------------------------------------------
# Transitive distributions with a uniform subgroup
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Reduction:
    """Quotient K -> M = K/L on group and algebra level."""

    name: str
    K: MatrixGroup
    M: MatrixGroup
    project_group: Callable[[np.ndarray], np.ndarray]
    project_alg: Callable[[np.ndarray], np.ndarray]
    kernel_samples: tuple = ()


def trivial_reduction(K: MatrixGroup) -> Reduction:
    """L = {e}: M = K."""
    return Reduction("L=e", K, K, lambda g: np.asarray(g), lambda x: np.asarray(x), (np.eye(K.n, dtype=complex),))


def full_reduction(K: MatrixGroup) -> Reduction:
    """L = K: M is the trivial group SU(1)."""
    M = MatrixGroup("su", 1)
    return Reduction("L=K", K, M, lambda g: np.ones(np.shape(g)[:-2] + (1, 1), complex),
                     lambda x: np.zeros(np.shape(x)[:-2] + (1, 1), complex))


def cyclic_reduction(n: int) -> Reduction:
    """K = U(1), L = n-th roots of unity, M = U(1) via z -> z^n."""
    if n < 1:
        raise SchemaError("the cyclic subgroup order must be positive")
    U1 = MatrixGroup("u", 1)
    roots = tuple(np.array([[np.exp(2j * math.pi * r / n)]]) for r in range(n))
    return Reduction(f"L=Z/{n}", U1, U1, lambda g: np.asarray(g) ** n, lambda x: n * np.asarray(x), roots)


def spin_reduction() -> Reduction:
    """K = SU(2), L = {±1}, M = SO(3)."""

    def alg(x):
        # derivative of the adjoint map: 1/2 tr(σ_a [X, σ_b])
        x = np.asarray(x)
        comm = np.einsum("...ij,bjk->...bik", x, PAULI) - np.einsum("bij,...jk->...bik", PAULI, x)
        return np.real(np.einsum("aij,...bji->...ab", PAULI, comm)) / 2.0 + 0j

    return Reduction("L=+-1", MatrixGroup("su", 2), MatrixGroup("so", 3), lambda g: su2_to_so3(g) + 0j, alg,
                     (np.eye(2, dtype=complex), -np.eye(2, dtype=complex)))


@dataclass(frozen=True, eq=False)
class TransitiveDistribution:
    """Base K-connection plus the uniform subgroup L (given through K -> K/L)."""

    connection: LocalConnection
    reduction: Reduction

    def __post_init__(self):
        if self.connection.group != self.reduction.K:
            raise SchemaError(f"connection is valued in {self.connection.group}, reduction expects {self.reduction.K}")


def check_normal(reduction: Reduction, rng: np.random.Generator | None = None, samples: int = 16,
                 tol: float = 1e-9) -> float:
    """Max distance from e of project(k l k^-1) over sampled k and listed l in L."""
    rng = rng or np.random.default_rng(0)
    K, M = reduction.K, reduction.M
    worst = 0.0
    eye = M.identity()
    for l in reduction.kernel_samples:
        for _ in range(samples):
            k = K.random(rng)
            worst = max(worst, float(np.max(np.abs(reduction.project_group(k @ l @ K.inv(k)) - eye))))
    return worst


def td_reduce(td: TransitiveDistribution, tol: float = 1e-4) -> LocalConnection:
    """Push the connection through K -> M = K/L.

    The reduced data is re-checked for gauge compatibility.  A projection that
    is not a homomorphism fails by O(1); ``tol`` only has to absorb the
    finite-difference error, which grows with the derivatives of project(k).
    """
    r = td.reduction
    if check_normal(r) > 1e-8:
        raise InconsistencyError(f"{r.name}: L is not normal (a conjugate leaves the kernel)")
    A = td.connection
    if r.name == "L=e":
        return A
    forms = [f.apply(r.project_alg) for f in A.forms]
    trans = {key: np.asarray(r.project_group(v), dtype=complex) for key, v in A.transitions.items()}
    evals = None
    if A.evaluators:
        evals = [None if e is None else (lambda e: lambda p: r.project_alg(e(p)))(e) for e in A.evaluators]
    tevals = None
    if A.transition_evaluators:
        tevals = {key: (lambda e: lambda p: r.project_group(e(p)))(e) for key, e in A.transition_evaluators.items()}
    out = LocalConnection(A.geometry, r.M, forms, trans, f"{A.name}/{r.name}", evals, tevals)
    worst = max((res.connection for res in gauge_compat_residual(out)), default=0.0)
    if worst > tol:
        raise ToleranceError("reduced connection fails gauge compatibility", worst, tol)
    return out


def td_holonomy(td: TransitiveDistribution, loop: PathSpec) -> TransportResult:
    return parallel_transport(td_reduce(td), loop)


# ---------------------------------------------------------------------------
# Covariant derivative and towers
# ---------------------------------------------------------------------------


def _act(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", a, b)


def covariant_derivative(alpha: FormField, omega: FormField, order: int = 4) -> FormField:
    """∇α = dα + ω∧α for α valued in C^n with ω acting by matrix multiplication."""
    if omega.degree != 1:
        raise SchemaError("the connection form must have degree 1")
    if len(alpha.fiber) != 1 or omega.fiber != (alpha.fiber[0], alpha.fiber[0]):
        raise SchemaError(f"module dimension {alpha.fiber} does not match connection fiber {omega.fiber}")
    if alpha.grid.shape != omega.grid.shape:
        raise SchemaError("form and connection are sampled on different grids")
    d = exterior_derivative(alpha, order)
    if not d.components:
        return d
    return d + wedge(omega, alpha, product=_act, fiber=alpha.fiber)


def product_connection(A1: LocalConnection, A2: LocalConnection) -> LocalConnection:
    """Block-diagonal connection for K1 × K2 on a shared geometry."""
    if A1.geometry is not A2.geometry:
        raise SchemaError("product_connection needs both components on the same geometry")
    n1, n2 = A1.group.n, A2.group.n
    G = MatrixGroup("u", n1 + n2)

    def block(x, y):
        out = np.zeros(np.broadcast_shapes(x.shape[:-2], y.shape[:-2]) + (n1 + n2, n1 + n2), complex)
        out[..., :n1, :n1] = x
        out[..., n1:, n1:] = y
        return out

    forms = [FormField(f1.grid, 1, {I: block(f1.components[I], f2.components[I]) for I in f1.components},
                       (n1 + n2, n1 + n2)) for f1, f2 in zip(A1.forms, A2.forms)]
    trans = {key: block(A1.transitions[key], A2.transitions[key]) for key in A1.transitions}
    evals = None
    if A1.evaluators and A2.evaluators and all(A1.evaluators) and all(A2.evaluators):
        evals = [(lambda e1, e2: lambda p: block(e1(p), e2(p)))(e1, e2) for e1, e2 in zip(A1.evaluators, A2.evaluators)]
    tevals = None
    if A1.transition_evaluators and A2.transition_evaluators:
        tevals = {key: (lambda e1, e2: lambda p: block(e1(p), e2(p)))(e, A2.transition_evaluators[key])
                  for key, e in A1.transition_evaluators.items()}
    return LocalConnection(A1.geometry, G, forms, trans, f"{A1.name}x{A2.name}", evals, tevals)


def tower_transport(components: Sequence[tuple[LocalConnection, PathSpec]],
                    lifts: Sequence[Sequence[np.ndarray]] | None = None) -> list[tuple[np.ndarray, ...]]:
    """Transport each component of a fiber-product path independently.

    A curve is horizontal for the pullback-sum distribution exactly when
    each projection is horizontal, so the transport is the tuple of
    component transports.  Each entry of ``lifts`` is a tuple of initial
    group elements (one per component); one output tuple is returned per
    lift (default: the identity lift only).
    """
    if not components:
        raise SchemaError("need at least one component")
    ref = components[0][1]
    for n, (_, path) in enumerate(components[1:], start=1):
        if path.closed != ref.closed or path.total_steps != ref.total_steps:
            raise SchemaError(f"component {n}: projected path is not parameterized like component 0 "
                              f"(closed {path.closed} vs {ref.closed}, steps {path.total_steps} vs {ref.total_steps})")
    transports = [parallel_transport(A, path).element for A, path in components]
    if lifts is None:
        lifts = [tuple(np.eye(A.group.n, dtype=complex) for A, _ in components)]
    out = []
    for lift in lifts:
        if len(lift) != len(components):
            raise SchemaError("each lift needs one initial element per component")
        out.append(tuple(T @ np.asarray(g0) for T, g0 in zip(transports, lift)))
    return out
