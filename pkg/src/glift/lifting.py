"""Obstructions to lifting a K-bundle through a central extension, and towers of them.

A K-bundle is a K-valued 1-cocycle on a nerve.  Lifting its transition
values through a section of G -> K gives a G-valued 1-cochain whose
triangle products g(i,j) g(j,k) g(k,i) land in the central subgroup H; that
H-valued 2-cocycle is the obstruction, and its cohomology class decides
whether a lift exists.  Higher levels of a tower apply the connecting
homomorphism of the next (abelian) extension to the previous obstruction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cech import (Cochain, Trivialization, coboundary, cohomology, is_cocycle, nonabelian_deviation,
                   solve_trivialization)
from .errors import BranchCutError, InconsistencyError, SchemaError
from .geometry import Nerve
from .groups import CircleGroup, CyclicGroup, Extension, Group, MatrixGroup


@dataclass(frozen=True, eq=False)
class LiftingProblem:
    nerve: Nerve
    extension: Extension
    k: Cochain

    def __post_init__(self):
        if self.k.degree != 1:
            raise SchemaError("the bundle must be given by a 1-cochain")
        if self.k.group != self.extension.K:
            raise SchemaError(f"bundle cocycle is valued in {self.k.group}, extension expects {self.extension.K}")
        if self.k.nerve is not self.nerve and self.k.nerve.simplices != self.nerve.simplices:
            raise SchemaError("bundle cocycle lives on a different nerve")


@dataclass(frozen=True, eq=False)
class TowerSpec:
    """Extensions for levels 1..n plus the level-1 bundle cocycle.

    Level l+1's quotient group must equal level l's central subgroup, since
    the level-l obstruction is the cocycle fed to the next connecting map.
    """

    levels: tuple[Extension, ...]
    base: Cochain
    stop_on_obstruction: bool = False

    def __post_init__(self):
        if not self.levels:
            raise SchemaError("a tower needs at least one level")
        for l, (lower, upper) in enumerate(zip(self.levels, self.levels[1:]), start=2):
            if not upper.abelian:
                raise SchemaError(f"tower level {l} must have abelian H, G and K")
            if upper.K != lower.H:
                raise SchemaError(f"tower level {l}: K = {upper.K} does not match the previous band {lower.H}")


@dataclass
class ObstructionReport:
    level: int
    degree: int
    cocycle: Cochain
    factors: list[int] | None
    coordinates: list[int] | None
    trivial: bool | None
    trivialization: Trivialization | None = None
    flagged: bool = False
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"level": self.level, "degree": self.degree, "cocycle": self.cocycle.to_json(),
               "cohomology_factors": self.factors, "class_coordinates": self.coordinates,
               "trivial": self.trivial, "flagged": self.flagged, "notes": self.notes}
        if self.trivialization is not None:
            out["trivialization"] = self.trivialization.to_json()
        return out


def _is_batched(group: Group, value) -> bool:
    if isinstance(group, MatrixGroup):
        return np.ndim(value) > 2
    if isinstance(group, CircleGroup):
        return np.ndim(value) > 0
    return False


def _apply(fn, value, source: Group):
    """Apply a group map sample-by-sample when the value is a sampled array."""
    if not _is_batched(source, value):
        return fn(value)
    if isinstance(source, CircleGroup):
        return np.array([fn(float(v)) for v in np.ravel(value)]).reshape(np.shape(value))
    return np.array([fn(v) for v in np.asarray(value).reshape((-1,) + np.shape(value)[-2:])])


def _check_continuity(edge, k_vals, g_vals, K: Group, G: Group) -> None:
    """Sampled mode: a lift that jumps where the bundle value does not has crossed a branch cut."""
    dk = np.asarray(K.distance(k_vals[1:], k_vals[:-1]), dtype=float)
    dg = np.asarray(G.distance(g_vals[1:], g_vals[:-1]), dtype=float)
    jumps = np.flatnonzero(dg > np.maximum(0.1, 10.0 * dk + 1e-6))
    if jumps.size:
        raise BranchCutError(f"section crosses its branch cut on edge {edge}", location=f"sample {int(jumps[0])}")


def lift_cochain(problem: LiftingProblem) -> Cochain:
    """g(i, j) = section(k(i, j)) on every edge, checked to push forward to k."""
    ext, k = problem.extension, problem.k
    vals = {}
    for edge, kv in k.values.items():
        gv = _apply(ext.section, kv, ext.K)
        back = _apply(ext.project, gv, ext.G)
        if np.max(ext.K.distance(back, kv)) > max(ext.K.tolerance, 1e-9):
            raise InconsistencyError("section does not push forward to the bundle value", location=edge)
        if k.mode == "sampled":
            _check_continuity(edge, kv, gv, ext.K, ext.G)
        vals[edge] = gv
    return Cochain(k.nerve, 1, ext.G, vals, k.mode)


def _pull_back(ext: Extension, cochain: Cochain) -> Cochain:
    """Pull G-values lying in include(H) back to H; sampled values must be locally constant."""
    vals = {}
    for s, v in cochain.values.items():
        if cochain.mode == "sampled":
            samples = (np.asarray(v).reshape((-1,) + np.shape(v)[-2:]) if isinstance(ext.G, MatrixGroup)
                       else np.ravel(v))
            hs = [ext.pullback(x if not isinstance(ext.G, CircleGroup) else float(x)) for x in samples]
            if any(h is None for h in hs):
                raise InconsistencyError("triple product leaves include(H): the extension's kernel is wrong", location=s)
            if any(not ext.H.eq(h, hs[0]) for h in hs):
                raise InconsistencyError("obstruction is not locally constant over the samples", location=s)
            h = hs[0]
        else:
            h = ext.pullback(v)
            if h is None:
                raise InconsistencyError("triple product leaves include(H): the extension's kernel is wrong", location=s)
        vals[s] = h
    return Cochain(cochain.nerve, cochain.degree, ext.H, vals)


def _classify(c: Cochain, level: int, budget: int | None, strict: bool) -> ObstructionReport:
    if not isinstance(c.group, CyclicGroup):
        return ObstructionReport(level, c.degree, c, None, None, None,
                                 notes=[f"classification needs a finite cyclic band; band is {c.group.descriptor()}"])
    H = cohomology(c.nerve, c.group, c.degree)
    coords = H.coordinates(c) if H.factors else []
    triv = solve_trivialization(c, strict=strict, budget=budget)
    if not strict and triv.trivial != (not any(coords)):
        raise InconsistencyError("class coordinates and trivialization disagree")
    return ObstructionReport(level, c.degree, c, H.factors, coords, triv.trivial, triv)


def obstruction_cocycle(problem: LiftingProblem) -> Cochain:
    """The H-valued 2-cocycle c(i,j,k) = g(i,j) g(j,k) g(k,i), after all consistency checks."""
    check = is_cocycle(problem.k)
    if not check:
        raise InconsistencyError("bundle values do not satisfy the cocycle condition", location=check.worst)
    g = lift_cochain(problem)
    c = _pull_back(problem.extension, nonabelian_deviation(g))
    centered = is_cocycle(c)
    if not centered:
        raise InconsistencyError("obstruction is not a cocycle: H is not central", location=centered.worst)
    return c


def obstruction(problem: LiftingProblem, budget: int | None = None, strict: bool = False) -> ObstructionReport:
    """Obstruction cocycle of a lifting problem with its class and a verdict.

    The verdict carries either a witness b (δb = c, so the section can be
    corrected edge by edge) or a certificate that no such b exists.
    """
    return _classify(obstruction_cocycle(problem), 1, budget, strict)


def quotient_cocycle(g: Cochain, extension: Extension) -> Cochain:
    """Push a G-valued 1-cocycle down to K."""
    if g.group != extension.G:
        raise SchemaError(f"cocycle is valued in {g.group}, extension expects {extension.G}")
    check = is_cocycle(g)
    if not check:
        raise InconsistencyError("input is not a G-cocycle", location=check.worst)
    k = Cochain(g.nerve, g.degree, extension.K,
                {s: _apply(extension.project, v, extension.G) for s, v in g.values.items()}, g.mode)
    if not is_cocycle(k):
        raise InconsistencyError("projection of a cocycle is not a cocycle: project is not a homomorphism")
    return k


def connecting_map(c: Cochain, extension: Extension) -> Cochain:
    """Connecting homomorphism H^n(K) -> H^{n+1}(H) on the cocycle level.

    Lift c through the section, take the coboundary in G, pull back to H.
    """
    if not extension.abelian:
        raise SchemaError("connecting_map needs H, G and K abelian")
    if c.group != extension.K:
        raise SchemaError(f"cocycle is valued in {c.group}, extension expects {extension.K}")
    check = is_cocycle(c)
    if not check:
        raise InconsistencyError("input is not a cocycle", location=check.worst)
    lifted = c.map(lambda v: _apply(extension.section, v, extension.K), extension.G)
    out = _pull_back(extension, coboundary(lifted))
    if not is_cocycle(out):
        raise InconsistencyError("connecting map produced a non-cocycle")
    return out


def tower_obstructions(spec: TowerSpec, budget: int | None = None, strict: bool = False) -> list[ObstructionReport]:
    """One report per level; level l carries a degree-(l+1) cocycle.

    A level whose class is nontrivial is flagged; iteration continues
    formally unless ``stop_on_obstruction`` is set.
    """
    nerve = spec.base.nerve
    reports = []
    c = obstruction_cocycle(LiftingProblem(nerve, spec.levels[0], spec.base))
    for level, ext in enumerate(spec.levels, start=1):
        if level > 1:
            c = connecting_map(c, ext)
        rep = _classify(c, level, budget, strict)
        rep.flagged = rep.trivial is False
        reports.append(rep)
        if rep.flagged and spec.stop_on_obstruction and level < len(spec.levels):
            rep.notes.append("stopped: nontrivial obstruction at this level")
            break
    return reports


@dataclass(frozen=True, eq=False)
class AdjointTransitions:
    """Edge-wise linear maps Ad(g(i, j)) on the Lie algebra of G, in algebra coordinates."""

    nerve: Nerve
    group: Group
    maps: dict

    def value(self, i: int, j: int) -> np.ndarray:
        if (i, j) in self.maps:
            return self.maps[(i, j)]
        return np.linalg.inv(self.maps[(j, i)])

    def triangle(self, simplex) -> np.ndarray:
        i, j, k = simplex
        return self.value(i, j) @ self.value(j, k) @ self.value(k, i)


def adjoint_transitions(g: Cochain) -> AdjointTransitions:
    """Transition maps of the adjoint bundle: edge (i, j) -> Ad(g(i, j))."""
    G = g.group
    if isinstance(G, CircleGroup) or (isinstance(G, MatrixGroup) and G.abelian):
        dim = 1 if isinstance(G, CircleGroup) else G.algebra_dim
        maps = {e: np.eye(dim) for e in g.values}
    elif isinstance(G, MatrixGroup):
        maps = {e: G.ad_matrix(v) for e, v in g.values.items()}
    else:
        raise SchemaError(f"adjoint action is not defined for {G}")
    return AdjointTransitions(g.nerve, G, maps)
