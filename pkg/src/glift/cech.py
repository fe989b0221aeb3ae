"""Čech cochains on nerves, coboundaries, cohomology and trivialization.

Cochains are stored on ascending simplices only; any other vertex order is
resolved on lookup (alternating sign for abelian groups, inverse for
nonabelian 1-cochains).  The coboundary is the alternating face sum with
faces indexed from 0.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from . import snf
from .errors import InconsistencyError, SchemaError
from .geometry import Nerve, Simplex
from .groups import CyclicGroup, Group, Integers, group_from_descriptor, json_key

DEFAULT_BUDGET = 2 ** 20
SAMPLED_TOL = 1e-8


def default_budget() -> int:
    """Brute-force search budget; ``GLIFT_BUDGET`` overrides the 2^20 default."""
    raw = os.environ.get("GLIFT_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(f"GLIFT_BUDGET must be an integer, got {raw!r}") from None


def permutation_sign(seq: Iterable[int]) -> int:
    seq = list(seq)
    sign = 1
    for a, b in itertools.combinations(range(len(seq)), 2):
        if seq[a] > seq[b]:
            sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class Cochain:
    """Group-valued function on the n-simplices of a nerve.

    In ``sampled`` mode every value is an array over a common set of sample
    points (circle and matrix groups only, degree <= 2).
    """

    nerve: Nerve
    degree: int
    group: Group
    values: dict[Simplex, Any]
    mode: str = "combinatorial"

    def __post_init__(self):
        expected = set(self.nerve.simplices_of_dim(self.degree))
        if set(self.values) != expected:
            missing = sorted(expected - set(self.values))
            extra = sorted(set(self.values) - expected)
            raise SchemaError(f"cochain keys must be the {self.degree}-simplices; missing {missing[:3]}, extra {extra[:3]}")
        if self.mode not in ("combinatorial", "sampled"):
            raise SchemaError(f"unknown cochain mode {self.mode!r}")
        if self.mode == "sampled" and self.degree > 2:
            raise SchemaError("sampled cochains are limited to degree <= 2")

    @property
    def simplices(self) -> tuple[Simplex, ...]:
        return self.nerve.simplices_of_dim(self.degree)

    def __getitem__(self, simplex) -> Any:
        return self.value(simplex)

    def value(self, simplex: Iterable[int]):
        s = tuple(simplex)
        if s in self.values:
            return self.values[s]
        key = tuple(sorted(s))
        if len(set(s)) != len(s):
            if self.group.abelian:
                return self.group.identity()
            raise SchemaError(f"degenerate simplex {s} for a nonabelian cochain")
        if key not in self.values:
            raise SchemaError(f"{s} is not a {self.degree}-simplex of the nerve")
        v = self.values[key]
        if self.group.abelian:
            return v if permutation_sign(s) > 0 else self.group.inv(v)
        if self.degree == 1:
            return self.group.inv(v)
        raise SchemaError(f"no ordering convention for nonabelian degree-{self.degree} value at {s}")

    def map(self, fn, group: Group) -> "Cochain":
        return Cochain(self.nerve, self.degree, group, {s: fn(v) for s, v in self.values.items()}, self.mode)

    def to_vector(self) -> np.ndarray:
        """Integer coordinates (cyclic or integer coefficients only)."""
        if not isinstance(self.group, (CyclicGroup, Integers)):
            raise SchemaError(f"no integer coordinates for {self.group}")
        return np.array([int(self.values[s]) for s in self.simplices], dtype=np.int64)

    @classmethod
    def from_vector(cls, nerve: Nerve, degree: int, group: Group, vec) -> "Cochain":
        simplices = nerve.simplices_of_dim(degree)
        vec = list(vec)
        if len(vec) != len(simplices):
            raise SchemaError(f"expected {len(simplices)} coordinates, got {len(vec)}")
        return cls(nerve, degree, group, {s: group.canonical(int(v)) for s, v in zip(simplices, vec)})

    @classmethod
    def constant(cls, nerve: Nerve, degree: int, group: Group, value=None) -> "Cochain":
        value = group.identity() if value is None else value
        return cls(nerve, degree, group, {s: value for s in nerve.simplices_of_dim(degree)})

    def is_identity(self) -> bool:
        return all(self.group.is_identity(v) for v in self.values.values())

    def equals(self, other: "Cochain") -> bool:
        return (self.degree == other.degree and self.group == other.group
                and all(self.group.eq(self.values[s], other.values[s]) for s in self.simplices))

    def to_json(self) -> dict:
        return {"degree": self.degree, "group": self.group.descriptor(),
                "values": {json_key(s): _encode(self.group, v) for s, v in sorted(self.values.items())}}

    @classmethod
    def from_json(cls, doc: dict, nerve: Nerve) -> "Cochain":
        if not isinstance(doc, dict):
            raise SchemaError("cochain must be a JSON object")
        extra = set(doc) - {"degree", "group", "values"}
        if extra:
            raise SchemaError(f"unknown fields in cochain: {sorted(extra)}")
        try:
            degree = int(doc["degree"])
            group = group_from_descriptor(doc["group"])
            raw = doc["values"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad cochain document: {exc}") from None
        values = {}
        for key, val in raw.items():
            try:
                s = tuple(int(v) for v in key.split(","))
            except ValueError:
                raise SchemaError(f"bad simplex key {key!r}") from None
            if len(s) != degree + 1:
                raise SchemaError(f"simplex key {key!r} does not have degree {degree}")
            v = group.decode(val)
            if tuple(sorted(s)) != s:
                v = _reorient(group, degree, s, v)
                s = tuple(sorted(s))
            if s not in nerve:
                raise SchemaError(f"{list(s)} is not a simplex of the nerve")
            values[s] = v
        for s in nerve.simplices_of_dim(degree):
            values.setdefault(s, group.identity())
        return cls(nerve, degree, group, values)


def _reorient(group: Group, degree: int, s: Simplex, v):
    """Value on the ascending simplex given the value on the ordered tuple ``s``."""
    if group.abelian:
        return v if permutation_sign(s) > 0 else group.inv(v)
    if degree == 1:
        return group.inv(v)
    raise SchemaError(f"nonabelian degree-{degree} values must use ascending keys")


def _encode(group: Group, v):
    if isinstance(v, np.ndarray) and v.dtype != object and getattr(group, "n", None) is None:
        return v.tolist()
    return group.encode(v)


def coboundary(c: Cochain) -> Cochain:
    """Čech coboundary.

    Abelian groups: (δc)(σ) = Σ_k (-1)^k c(σ without vertex k).  Nonabelian
    groups are accepted in degree 0, (δh)(i, j) = h_i^-1 h_j, and degree 1,
    where δ is :func:`nonabelian_deviation`.
    """
    G, n, nerve = c.group, c.degree, c.nerve
    if not G.abelian:
        if n == 0:
            vals = {(i, j): G.mul(G.inv(c.values[(i,)]), c.values[(j,)]) for i, j in nerve.simplices_of_dim(1)}
            return Cochain(nerve, 1, G, vals, c.mode)
        if n == 1:
            return nonabelian_deviation(c)
        raise SchemaError(f"coboundary of a nonabelian cochain in degree {n} is not defined")
    if isinstance(G, (CyclicGroup, Integers)) and c.mode == "combinatorial":
        out = nerve.boundary_matrix(n) @ c.to_vector()
        if isinstance(G, CyclicGroup):
            out %= G.m
        return Cochain.from_vector(nerve, n + 1, G, out)
    vals = {}
    for s in nerve.simplices_of_dim(n + 1):
        terms = [(-1 if k % 2 else 1, c.values[s[:k] + s[k + 1:]]) for k in range(len(s))]
        vals[s] = G.combine(terms)
    return Cochain(nerve, n + 1, G, vals, c.mode)


def nonabelian_deviation(g: Cochain) -> Cochain:
    """t(i, j, k) = g(i, j) g(j, k) g(k, i), the identity cochain iff g is a 1-cocycle."""
    if g.degree != 1:
        raise SchemaError("nonabelian_deviation needs a 1-cochain")
    G = g.group
    vals = {}
    for i, j, k in g.nerve.simplices_of_dim(2):
        vals[(i, j, k)] = G.mul(G.mul(g.value((i, j)), g.value((j, k))), g.value((k, i)))
    return Cochain(g.nerve, 2, G, vals, g.mode)


@dataclass
class CocycleCheck:
    ok: bool
    residual: float
    worst: Simplex | None = None
    failures: list[Simplex] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def is_cocycle(c: Cochain, tol: float = SAMPLED_TOL) -> CocycleCheck:
    """Check δc = identity, exactly (combinatorial) or within ``tol`` (sampled)."""
    if not c.group.abelian and c.degree not in (0, 1):
        raise SchemaError("cocycle check for nonabelian cochains is limited to degree <= 1")
    d = coboundary(c)
    G = c.group
    e = G.identity()
    worst, where, failures = 0.0, None, []
    for s in d.simplices:
        r = float(np.max(G.distance(d.values[s], e)))
        limit = tol if c.mode == "sampled" else max(G.tolerance, 0.0)
        if r > limit:
            failures.append(s)
        if r > worst:
            worst, where = r, s
    return CocycleCheck(not failures, worst, where, failures)


# ---------------------------------------------------------------------------
# Cohomology with Z or Z/m coefficients
# ---------------------------------------------------------------------------


def _modulus(group: Group) -> int:
    if isinstance(group, CyclicGroup):
        return group.m
    if isinstance(group, Integers):
        return 0
    raise SchemaError(f"cohomology needs cyclic or integer coefficients, got {group}")


@dataclass
class Cohomology:
    """H^n(nerve; Z or Z/m) with generators.

    ``factors`` lists the cyclic orders of the summands (0 means Z).
    ``generators[j]`` is a representative cocycle of summand j.
    """

    nerve: Nerve
    degree: int
    group: Group
    factors: list[int]
    generators: list[Cochain]
    _Vinv: list = field(repr=False, default_factory=list)
    _scales: list = field(repr=False, default_factory=list)
    _rank: int = field(repr=False, default=0)
    _Uprime: list = field(repr=False, default_factory=list)
    _orders: list = field(repr=False, default_factory=list)
    _keep: list = field(repr=False, default_factory=list)

    @property
    def is_trivial_group(self) -> bool:
        return not self.factors

    def coordinates(self, c: Cochain) -> list[int]:
        """Class of a cocycle in terms of :attr:`generators` (entry j mod factors[j])."""
        if c.degree != self.degree or c.group != self.group:
            raise SchemaError("cochain does not belong to this cohomology group")
        if not self.factors:
            return []
        x = c.to_vector()
        m = _modulus(self.group)
        y = snf.matvec(self._Vinv, x)
        if m == 0:
            if any(y[: self._rank]):
                raise InconsistencyError("cochain is not a cocycle")
            z = y[self._rank:]
        else:
            z = []
            for yi, sc in zip(y, self._scales):
                if yi % sc:
                    raise InconsistencyError("cochain is not a cocycle")
                z.append(yi // sc)
        w = snf.matvec(self._Uprime, z)
        out = []
        for j in self._keep:
            e = self._orders[j]
            out.append(w[j] % e if e else w[j])
        return out

    def is_trivial_class(self, c: Cochain) -> bool:
        return not any(self.coordinates(c))


def cohomology(nerve: Nerve, group: Group, degree: int) -> Cohomology:
    """Cohomology of the nerve via Smith normal forms of its coboundary matrices.

    The cocycle lattice {x : D_n x ≡ 0 (mod m)} is read off the Smith form of
    D_n; the relation lattice im(D_{n-1}) + mZ^N is re-expressed in that
    basis and put in Smith form again, whose diagonal gives the invariant
    factors and whose left transform gives the generators.
    """
    m = _modulus(group)
    N = nerve.count(degree) if degree >= 0 else 0
    if degree < 0 or N == 0:
        return Cohomology(nerve, degree, group, [], [])
    D = nerve.boundary_matrix(degree)
    Dprev = nerve.boundary_matrix(degree - 1) if degree > 0 else np.zeros((N, 0), dtype=np.int64)
    sf = snf.smith_normal_form(D)
    r = sf.rank
    diag = sf.diagonal
    if m == 0:
        scales = []
        basis_cols = list(range(r, N))
        K = [[sf.V[i][c] for c in basis_cols] for i in range(N)]
    else:
        scales = [m // math.gcd(d, m) for d in diag] + [1] * (N - r)
        K = [[sf.V[i][c] * scales[c] for c in range(N)] for i in range(N)]

    def coords(x):
        y = snf.matvec(sf.V_inv, x)
        if m == 0:
            return y[r:]
        return [yi // sc for yi, sc in zip(y, scales)]

    gens = [list(col) for col in np.asarray(Dprev, dtype=object).T.tolist()]
    if m:
        gens += [[m * int(i == k) for i in range(N)] for k in range(N)]
    k = len(K[0]) if K and K[0] else 0
    if k == 0:
        return Cohomology(nerve, degree, group, [], [])
    R = [list(col) for col in zip(*[coords(g) for g in gens])] if gens else [[] for _ in range(k)]
    sf2 = snf.smith_normal_form(np.array(R, dtype=object).reshape(k, len(gens)))
    orders = sf2.diagonal + [0] * (k - sf2.rank)
    keep = [j for j, e in enumerate(orders) if e != 1]
    generators = []
    for j in keep:
        col = [sf2.U_inv[i][j] for i in range(k)]
        vec = snf.matvec(K, col)
        if m:
            vec = [v % m for v in vec]
        generators.append(Cochain.from_vector(nerve, degree, group, vec))
    return Cohomology(nerve, degree, group, [orders[j] for j in keep], generators,
                      sf.V_inv, scales, r, sf2.U, orders, keep)


# ---------------------------------------------------------------------------
# Trivialization
# ---------------------------------------------------------------------------


@dataclass
class Trivialization:
    """Outcome of :func:`solve_trivialization`.

    Exactly one of ``witness`` (an (n-1)-cochain b with δb = c) and
    ``certificate`` is set.  The certificate is a functional φ on n-cochains
    with φ·D ≡ 0 and φ·c ≢ 0 (mod m), which rules out every b at once.
    """

    trivial: bool
    witness: Cochain | None
    certificate: list[int] | None
    modulus: int
    method: str
    brute_force: bool | None = None
    searched: int = 0

    def to_json(self) -> dict:
        out = {"trivial": self.trivial, "method": self.method, "modulus": self.modulus,
               "brute_force_agrees": self.brute_force, "searched": self.searched}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.certificate is not None:
            out["certificate"] = {"functional": self.certificate}
        return out


def verify_witness(c: Cochain, b: Cochain) -> bool:
    return coboundary(b).equals(c)


def verify_certificate(nerve: Nerve, degree: int, modulus: int, c_vec, functional) -> bool:
    """Independent re-check of a nonexistence certificate."""
    phi = np.asarray(functional, dtype=object)
    D = np.asarray(nerve.boundary_matrix(degree - 1), dtype=object)
    if len(phi) != D.shape[0]:
        return False
    annihilates = all(int(v) % modulus == 0 for v in phi.dot(D)) if D.shape[1] else True
    return annihilates and int(phi.dot(np.asarray(c_vec, dtype=object))) % modulus != 0


def _brute_force(D: np.ndarray, c_vec: np.ndarray, m: int, chunk: int = 1 << 16):
    """Lexicographically smallest b with D b ≡ c (mod m), first simplex most significant."""
    N = D.shape[1]
    total = m ** N
    powers = m ** np.arange(N - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % m
        hits = np.flatnonzero(np.all((digits @ D.T) % m == c_vec[None, :], axis=1))
        if hits.size:
            return digits[hits[0]]
    return None


def solve_trivialization(c: Cochain, strict: bool = False, budget: int | None = None) -> Trivialization:
    """Decide whether a finite-cyclic n-cocycle is a coboundary and return the evidence.

    The Smith form of D_{n-1} decides; when |H|^#(n-1)-simplices fits in the
    budget an exhaustive lexicographic search runs too, must agree, and
    supplies the (lexicographically smallest) witness.  ``strict`` reads
    "trivial" as "every value is the identity" instead.
    """
    G = c.group
    if not isinstance(G, CyclicGroup):
        raise SchemaError(f"trivialization needs a finite cyclic group, got {G}")
    check = is_cocycle(c)
    if not check:
        raise InconsistencyError("input is not a cocycle", location=check.worst)
    m, n, nerve = G.m, c.degree, c.nerve
    x = c.to_vector() % m
    budget = default_budget() if budget is None else budget
    if strict or n == 0:
        ok = not x.any()
        phi = None
        if not ok:
            # evaluation at a nonzero simplex is a functional φ with φ·c ≠ 0; D is
            # ignored in strict mode
            phi = [int(i == int(np.flatnonzero(x)[0])) for i in range(len(x))]
        wit = Cochain.constant(nerve, n - 1, G) if ok and n > 0 else None
        return Trivialization(ok, wit, phi, m, "strict" if strict else "degree-0")
    D = nerve.boundary_matrix(n - 1)
    sf = snf.smith_normal_form(D)
    u = [v % m for v in snf.matvec(sf.U, x)]
    y = [0] * D.shape[1]
    phi = None
    for i, ui in enumerate(u):
        if i < sf.rank:
            d = sf.diagonal[i]
            g = math.gcd(d, m)
            if ui % g:
                phi = [(m // g) * v for v in sf.U[i]]
                break
            mm = m // g
            y[i] = (ui // g) * pow(d // g, -1, mm) % mm if mm > 1 else 0
        elif ui % m:
            phi = list(sf.U[i])
            break
    snf_trivial = phi is None
    witness = None
    if snf_trivial:
        bvec = [v % m for v in snf.matvec(sf.V, y)]
        witness = Cochain.from_vector(nerve, n - 1, G, bvec)
        if not verify_witness(c, witness):
            raise InconsistencyError("Smith-form witness failed re-verification")
    else:
        phi = [v % m for v in phi]
    result = Trivialization(snf_trivial, witness, phi, m, "snf")
    space = m ** D.shape[1]
    if space <= budget:
        found = _brute_force(D, x, m)
        result.searched = space
        result.brute_force = (found is not None) == snf_trivial
        if not result.brute_force:
            raise InconsistencyError("exhaustive search disagrees with the Smith-form verdict")
        if found is not None:
            result.witness = Cochain.from_vector(nerve, n - 1, G, found)
            result.method = "snf+exhaustive"
        else:
            result.method = "snf+exhaustive"
    return result


# ---------------------------------------------------------------------------
# Random cochains (tests, CLI demos)
# ---------------------------------------------------------------------------


def random_cochain(nerve: Nerve, degree: int, group: Group, rng: np.random.Generator) -> Cochain:
    return Cochain(nerve, degree, group, {s: group.random(rng) for s in nerve.simplices_of_dim(degree)})


def random_cocycle(nerve: Nerve, degree: int, group: Group, rng: np.random.Generator,
                   twist: Cochain | None = None) -> Cochain:
    """A random cocycle.

    Abelian finite cyclic groups: a random coboundary plus a random
    combination of cohomology generators.  Other groups (degree 1): the
    coboundary h_i^-1 z_ij h_j of a random 0-cochain h, with z an optional
    G-valued cocycle (``twist``) taking values in an abelian subgroup.
    """
    if degree == 0:
        return Cochain.constant(nerve, 0, group, group.random(rng))
    if isinstance(group, CyclicGroup):
        base = coboundary(random_cochain(nerve, degree - 1, group, rng))
        H = cohomology(nerve, group, degree)
        vec = base.to_vector()
        for gen in H.generators:
            vec = vec + int(rng.integers(group.m)) * gen.to_vector()
        return Cochain.from_vector(nerve, degree, group, vec % group.m)
    if degree != 1:
        raise SchemaError("random cocycles of non-cyclic groups are limited to degree 1")
    h = {v: group.random(rng) for (v,) in nerve.simplices_of_dim(0)}
    vals = {}
    for i, j in nerve.simplices_of_dim(1):
        z = twist.values[(i, j)] if twist is not None else group.identity()
        vals[(i, j)] = group.mul(group.mul(group.inv(h[i]), z), h[j])
    return Cochain(nerve, 1, group, vals)
