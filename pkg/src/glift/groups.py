"""Coefficient and structure groups, their Lie algebras, and central extensions.

Elements are plain Python/numpy values so they can be stored in cochains and
serialized without wrappers:

========================  ==========================================
kind                      element representation
========================  ==========================================
cyclic(m), integers       ``int`` (cyclic values canonical in [0, m))
circle (R mod 1)          ``float`` in [0, 1); arrays in sampled mode
matrix (u, su, so, gl)    ``numpy`` square array, batched on leading axes
finite (table)            ``int`` label
product                   ``tuple`` of factor elements
========================  ==========================================

Circle and matrix operations broadcast over leading array axes, which is
how sampled cochains and form fields reuse them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import BranchCutError, InconsistencyError, SchemaError

CIRCLE_EPS = 1e-9
MATRIX_TOL = 1e-10


class Group:
    """Interface shared by every group kind."""

    abelian: bool = True
    finite: bool = False

    def identity(self):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def distance(self, a, b) -> float:
        """A metric (exact 0/1 for discrete kinds); broadcasts for sampled values."""
        raise NotImplementedError

    def eq(self, a, b) -> bool:
        return bool(np.all(self.distance(a, b) <= self.tolerance))

    tolerance: float = 0.0

    def is_identity(self, a) -> bool:
        return self.eq(a, self.identity())

    def canonical(self, a):
        return a

    def contains(self, a) -> bool:
        return True

    def random(self, rng: np.random.Generator):
        raise NotImplementedError

    def elements(self) -> list:
        raise SchemaError(f"{self} is not finite")

    @property
    def order(self) -> int:
        raise SchemaError(f"{self} is not finite")

    def descriptor(self) -> dict:
        raise NotImplementedError

    def encode(self, a) -> Any:
        return a

    def decode(self, obj):
        return obj

    def power(self, a, n: int):
        """a^n (n may be negative)."""
        if n < 0:
            a, n = self.inv(a), -n
        out = self.identity()
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def combine(self, terms: Sequence[tuple[int, Any]]):
        """Product of a^s over ``(s, a)`` terms, left to right."""
        out = self.identity()
        for s, a in terms:
            out = self.mul(out, self.power(a, s))
        return out

    def commutator(self, a, b):
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    # Lie-algebra hooks (circle and matrix kinds)
    def ad(self, g, x):
        raise SchemaError(f"adjoint action is not defined for {self}")

    def exp(self, x):
        raise SchemaError(f"exp is not defined for {self}")

    def log(self, g):
        raise SchemaError(f"log is not defined for {self}")

    def __eq__(self, other) -> bool:
        return isinstance(other, Group) and self.descriptor() == other.descriptor()

    def __hash__(self) -> int:
        return hash(repr(self.descriptor()))

    def __repr__(self) -> str:
        return f"Group({self.descriptor()})"


class CyclicGroup(Group):
    abelian = True
    finite = True

    def __init__(self, m: int):
        if int(m) < 1:
            raise SchemaError(f"cyclic order must be positive, got {m}")
        self.m = int(m)

    def identity(self):
        return 0

    def mul(self, a, b):
        return (a + b) % self.m

    def inv(self, a):
        return (-a) % self.m

    def power(self, a, n):
        return (a * n) % self.m

    def distance(self, a, b):
        return np.asarray((np.asarray(a) - np.asarray(b)) % self.m != 0, dtype=float)

    def canonical(self, a):
        return int(a) % self.m

    def contains(self, a) -> bool:
        return isinstance(a, (int, np.integer)) and 0 <= a < self.m

    def random(self, rng):
        return int(rng.integers(self.m))

    def elements(self):
        return list(range(self.m))

    @property
    def order(self):
        return self.m

    def descriptor(self):
        return {"kind": "cyclic", "order": self.m}

    def decode(self, obj):
        if not isinstance(obj, int) or isinstance(obj, bool):
            raise SchemaError(f"cyclic element must be an integer, got {obj!r}")
        return obj % self.m


class Integers(Group):
    abelian = True

    def identity(self):
        return 0

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def power(self, a, n):
        return a * n

    def distance(self, a, b):
        return np.asarray(np.asarray(a) != np.asarray(b), dtype=float)

    def random(self, rng):
        return int(rng.integers(-5, 6))

    def descriptor(self):
        return {"kind": "integers"}

    def decode(self, obj):
        if not isinstance(obj, int) or isinstance(obj, bool):
            raise SchemaError(f"integer element expected, got {obj!r}")
        return obj


class CircleGroup(Group):
    """Reals mod 1.  Its Lie algebra is R with exp(x) = x mod 1."""

    abelian = True
    tolerance = CIRCLE_EPS

    def identity(self):
        return 0.0

    def mul(self, a, b):
        return np.mod(np.add(a, b), 1.0) if np.ndim(a) or np.ndim(b) else (a + b) % 1.0

    def inv(self, a):
        return np.mod(np.negative(a), 1.0) if np.ndim(a) else (-a) % 1.0

    def power(self, a, n):
        return np.mod(np.multiply(a, n), 1.0) if np.ndim(a) else (a * n) % 1.0

    def distance(self, a, b):
        d = np.mod(np.subtract(a, b), 1.0)
        return np.minimum(d, 1.0 - d)

    def canonical(self, a):
        out = np.mod(a, 1.0)
        # fold values that round up to 1.0
        return np.where(out >= 1.0, 0.0, out) if np.ndim(out) else (0.0 if out >= 1.0 else float(out))

    def random(self, rng):
        return float(rng.random())

    def descriptor(self):
        return {"kind": "circle"}

    def decode(self, obj):
        if not isinstance(obj, (int, float)) or isinstance(obj, bool):
            raise SchemaError(f"circle element must be a number, got {obj!r}")
        return float(obj) % 1.0

    def ad(self, g, x):
        return x

    def exp(self, x):
        return self.canonical(x)

    def log(self, g):
        """Representative in (-1/2, 1/2); 1/2 itself is the branch cut."""
        x = np.mod(np.add(g, 0.5), 1.0) - 0.5
        if np.any(np.abs(np.abs(x) - 0.5) < CIRCLE_EPS):
            raise BranchCutError("circle log evaluated at the branch cut 1/2")
        return x

    def algebra_basis(self) -> np.ndarray:
        return np.ones((1,))


_MATRIX_KINDS = {"u": "unitary", "su": "special unitary", "so": "orthogonal det 1", "gl": "invertible"}


class MatrixGroup(Group):
    """Matrix Lie group U(n), SU(n), SO(n) or GL(n, C)."""

    tolerance = 1e-9

    def __init__(self, kind: str, dim: int):
        if kind not in _MATRIX_KINDS:
            raise SchemaError(f"unknown matrix kind {kind!r}")
        if int(dim) < 1:
            raise SchemaError(f"matrix dimension must be positive, got {dim}")
        self.kind = kind
        self.n = int(dim)
        self.abelian = self.n == 1 and kind in ("u", "gl", "so", "su")
        self.dtype = float if kind == "so" else complex

    def identity(self):
        return np.eye(self.n, dtype=self.dtype)

    def mul(self, a, b):
        return np.matmul(a, b)

    def inv(self, a):
        if self.kind == "gl":
            return np.linalg.inv(a)
        return np.conj(np.swapaxes(a, -1, -2))

    def distance(self, a, b):
        d = np.asarray(a) - np.asarray(b)
        return np.max(np.abs(d), axis=(-1, -2))

    def check(self, a, tol: float = MATRIX_TOL) -> float:
        """Residual of the defining property (0 when satisfied exactly)."""
        a = np.asarray(a)
        if a.shape[-2:] != (self.n, self.n):
            raise SchemaError(f"expected {self.n}x{self.n} matrices, got shape {a.shape}")
        eye = np.eye(self.n)
        if self.kind == "gl":
            return 0.0 if np.all(np.abs(np.linalg.det(a)) > tol) else float("inf")
        res = np.max(np.abs(np.conj(np.swapaxes(a, -1, -2)) @ a - eye))
        if self.kind in ("su", "so"):
            res = max(res, float(np.max(np.abs(np.linalg.det(a) - 1.0))))
        if self.kind == "so":
            res = max(res, float(np.max(np.abs(np.imag(a)))))
        return float(res)

    def contains(self, a) -> bool:
        return self.check(a) <= MATRIX_TOL

    def random(self, rng):
        n = self.n
        if self.kind == "so":
            q, r = np.linalg.qr(rng.standard_normal((n, n)))
            q = q * np.sign(np.diag(r))
            if np.linalg.det(q) < 0:
                q[:, 0] = -q[:, 0]
            return q
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
        if self.kind == "gl":
            return z + 2 * np.eye(n)
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        q = q * (d / np.abs(d))
        if self.kind == "su":
            q = q / np.linalg.det(q) ** (1.0 / n)
        return q

    def descriptor(self):
        return {"kind": self.kind, "dim": self.n}

    def encode(self, a):
        a = np.asarray(a)
        out = {"re": np.real(a).tolist()}
        if self.dtype is complex:
            out["im"] = np.imag(a).tolist()
        return out

    def decode(self, obj):
        try:
            a = np.asarray(obj["re"], dtype=float)
            if "im" in obj:
                a = a + 1j * np.asarray(obj["im"], dtype=float)
        except (TypeError, KeyError, ValueError):
            raise SchemaError(f"matrix element must be {{'re': ..., 'im': ...}}, got {obj!r}") from None
        a = a.astype(self.dtype) if self.dtype is float else a.astype(complex)
        if self.check(a) > 1e-8:
            raise SchemaError(f"matrix violates the {_MATRIX_KINDS[self.kind]} property")
        return a

    # Lie algebra
    @cached_property
    def _basis(self) -> np.ndarray:
        n = self.n
        mats = []
        if self.kind == "gl":
            for a in range(n):
                for b in range(n):
                    e = np.zeros((n, n), complex)
                    e[a, b] = 1
                    mats += [e, 1j * e]
            return np.array(mats)
        for a in range(n):
            for b in range(a + 1, n):
                e = np.zeros((n, n), complex)
                e[a, b], e[b, a] = 1, -1
                mats.append(e)
                if self.kind != "so":
                    f = np.zeros((n, n), complex)
                    f[a, b] = f[b, a] = 1j
                    mats.append(f)
        if self.kind == "u":
            for a in range(n):
                e = np.zeros((n, n), complex)
                e[a, a] = 1j
                mats.append(e)
        elif self.kind == "su":
            for a in range(n - 1):
                e = np.zeros((n, n), complex)
                e[a, a], e[a + 1, a + 1] = 1j, -1j
                mats.append(e)
        out = np.array(mats).reshape(-1, n, n)
        return np.real(out) if self.kind == "so" else out

    def algebra_basis(self) -> np.ndarray:
        return self._basis

    @property
    def algebra_dim(self) -> int:
        return len(self._basis)

    def algebra_coords(self, x) -> np.ndarray:
        """Real coordinates of algebra elements in :meth:`algebra_basis` (batched)."""
        B = self._basis.reshape(len(self._basis), -1)
        A = np.concatenate([np.real(B), np.imag(B)], axis=1).T
        x = np.asarray(x)
        flat = x.reshape(x.shape[:-2] + (-1,))
        rhs = np.concatenate([np.real(flat), np.imag(flat)], axis=-1)
        sol, *_ = np.linalg.lstsq(A, rhs.reshape(-1, rhs.shape[-1]).T, rcond=None)
        return sol.T.reshape(x.shape[:-2] + (len(self._basis),))

    def algebra_residual(self, x) -> float:
        """Distance of x from the Lie algebra (0 for members)."""
        x = np.asarray(x)
        back = np.tensordot(self.algebra_coords(x), self._basis, axes=(-1, 0))
        return float(np.max(np.abs(back - x))) if x.size else 0.0

    def ad(self, g, x):
        return g @ x @ self.inv(g)

    def ad_matrix(self, g) -> np.ndarray:
        """Ad(g) as a real matrix acting on algebra coordinates."""
        images = np.array([self.ad(g, e) for e in self._basis])
        return self.algebra_coords(images).T

    def exp(self, x):
        x = np.asarray(x)
        if x.ndim == 2:
            out = scipy.linalg.expm(x)
        else:
            out = np.array([scipy.linalg.expm(m) for m in x.reshape(-1, self.n, self.n)]).reshape(x.shape)
        return np.real(out) if self.kind == "so" else out

    def log(self, g, cut_tol: float = 1e-9):
        """Principal logarithm via (complex Schur) eigendecomposition.

        Raises :class:`BranchCutError` when an eigenvalue sits on the negative
        real axis (e.g. -identity), where the principal branch is undefined.
        """
        g = np.asarray(g)
        if g.ndim > 2:
            return np.array([self.log(m, cut_tol) for m in g.reshape(-1, self.n, self.n)]).reshape(g.shape)
        if self.kind == "gl":
            lam = np.linalg.eigvals(g)
            if np.any((np.abs(np.imag(lam)) < cut_tol) & (np.real(lam) < 0)):
                raise BranchCutError("matrix log: eigenvalue on the negative real axis")
            return scipy.linalg.logm(g)
        T, Z = scipy.linalg.schur(g.astype(complex), output="complex")
        lam = np.diag(T)
        if np.any(np.abs(lam + 1.0) < cut_tol):
            raise BranchCutError("matrix log: eigenvalue -1 lies on the principal branch cut")
        out = Z @ np.diag(np.log(lam)) @ np.conj(Z.T)
        return np.real(out) if self.kind == "so" else out


class FiniteGroup(Group):
    """Finite group given by a Cayley table on labels 0..n-1 (0 is the identity)."""

    finite = True

    def __init__(self, name: str, table: Sequence[Sequence[int]], labels: Sequence[str] | None = None):
        self.name = name
        self.table = np.asarray(table, dtype=np.int64)
        n = len(self.table)
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        self._inv = [int(np.flatnonzero(self.table[a] == 0)[0]) for a in range(n)]
        self.abelian = bool(np.all(self.table == self.table.T))

    def identity(self):
        return 0

    def mul(self, a, b):
        return int(self.table[a, b])

    def inv(self, a):
        return self._inv[a]

    def distance(self, a, b):
        return float(a != b)

    def contains(self, a) -> bool:
        return isinstance(a, (int, np.integer)) and 0 <= a < len(self.table)

    def random(self, rng):
        return int(rng.integers(len(self.table)))

    def elements(self):
        return list(range(len(self.table)))

    @property
    def order(self):
        return len(self.table)

    def descriptor(self):
        return {"kind": self.name}

    def decode(self, obj):
        if isinstance(obj, str) and obj in self.labels:
            return self.labels.index(obj)
        if isinstance(obj, int) and self.contains(obj):
            return obj
        raise SchemaError(f"not an element of {self.name}: {obj!r}")

    def encode(self, a):
        return self.labels[a]


def quaternion_group() -> FiniteGroup:
    """Q8 with labels 1, -1, i, -i, j, -j, k, -k."""
    units = ["1", "i", "j", "k"]
    # quaternion unit products: (sign, unit)
    prod = {
        ("1", u): (1, u) for u in units
    }
    prod.update({(u, "1"): (1, u) for u in units})
    prod.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
                 ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
                 ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})
    labels = []
    elems = []
    for u in units:
        for s in (1, -1):
            labels.append(u if s == 1 else "-" + u)
            elems.append((s, u))
    index = {e: n for n, e in enumerate(elems)}
    table = [[0] * 8 for _ in range(8)]
    for a, (sa, ua) in enumerate(elems):
        for b, (sb, ub) in enumerate(elems):
            s, u = prod[(ua, ub)]
            table[a][b] = index[(sa * sb * s, u)]
    return FiniteGroup("quaternion", table, labels)


class ProductGroup(Group):
    def __init__(self, factors: Sequence[Group]):
        if not factors:
            raise SchemaError("product needs at least one factor")
        self.factors = tuple(factors)
        self.abelian = all(f.abelian for f in self.factors)
        self.finite = all(f.finite for f in self.factors)
        self.tolerance = max(f.tolerance for f in self.factors)

    def identity(self):
        return tuple(f.identity() for f in self.factors)

    def mul(self, a, b):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a):
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    def power(self, a, n):
        return tuple(f.power(x, n) for f, x in zip(self.factors, a))

    def distance(self, a, b):
        return np.max([np.asarray(f.distance(x, y), dtype=float) for f, x, y in zip(self.factors, a, b)], axis=0)

    def eq(self, a, b):
        return all(f.eq(x, y) for f, x, y in zip(self.factors, a, b))

    def canonical(self, a):
        return tuple(f.canonical(x) for f, x in zip(self.factors, a))

    def contains(self, a):
        return len(a) == len(self.factors) and all(f.contains(x) for f, x in zip(self.factors, a))

    def random(self, rng):
        return tuple(f.random(rng) for f in self.factors)

    def elements(self):
        import itertools

        return [tuple(e) for e in itertools.product(*(f.elements() for f in self.factors))]

    @property
    def order(self):
        return math.prod(f.order for f in self.factors)

    def descriptor(self):
        return {"kind": "product", "factors": [f.descriptor() for f in self.factors]}

    def encode(self, a):
        return [f.encode(x) for f, x in zip(self.factors, a)]

    def decode(self, obj):
        if not isinstance(obj, (list, tuple)) or len(obj) != len(self.factors):
            raise SchemaError(f"product element must be a list of {len(self.factors)} entries")
        return tuple(f.decode(x) for f, x in zip(self.factors, obj))

    def ad(self, g, x):
        return tuple(f.ad(a, b) for f, a, b in zip(self.factors, g, x))

    def exp(self, x):
        return tuple(f.exp(a) for f, a in zip(self.factors, x))

    def log(self, g):
        return tuple(f.log(a) for f, a in zip(self.factors, g))


def group_from_descriptor(doc: dict) -> Group:
    """Build a group from its JSON descriptor (see :meth:`Group.descriptor`)."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError(f"group descriptor must be an object with 'kind', got {doc!r}")
    kind = doc["kind"]
    allowed = {"cyclic": {"kind", "order"}, "integers": {"kind"}, "circle": {"kind"},
               "product": {"kind", "factors"}, "quaternion": {"kind"}}
    extra = set(doc) - allowed.get(kind, {"kind", "dim"})
    if extra:
        raise SchemaError(f"unknown fields in group descriptor: {sorted(extra)}")
    if kind == "cyclic":
        return CyclicGroup(doc.get("order", 0))
    if kind == "integers":
        return Integers()
    if kind == "circle":
        return CircleGroup()
    if kind in _MATRIX_KINDS:
        return MatrixGroup(kind, doc.get("dim", 0))
    if kind == "quaternion":
        return quaternion_group()
    if kind == "product":
        return ProductGroup([group_from_descriptor(f) for f in doc.get("factors", [])])
    raise SchemaError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# Central extensions 1 -> H -> G -> K -> 1
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Extension:
    """Central extension data with a set-theoretic section K -> G.

    ``pullback`` inverts ``include``: it returns the H element mapping to a
    given G element, or ``None`` when the element is not in the image.
    """

    H: Group
    G: Group
    K: Group
    include: Callable
    project: Callable
    section: Callable
    pullback: Callable
    name: str = ""
    section_name: str = "principal-branch"
    table: dict | None = field(default=None, repr=False)

    @property
    def abelian(self) -> bool:
        return self.H.abelian and self.G.abelian and self.K.abelian

    def with_section(self, section: Callable | dict, name: str = "custom") -> "Extension":
        """Same extension, different section (a dict is read as a lookup table)."""
        if isinstance(section, dict):
            table = dict(section)
            if self.K.finite:
                missing = [k for k in self.K.elements() if k not in table]
                if missing:
                    raise SchemaError(f"section table misses {missing}")
            return replace(self, section=lambda k: table[k], section_name="table", table=table)
        return replace(self, section=section, section_name=name, table=None)

    def check(self, rng: np.random.Generator, samples: int = 1000) -> dict[str, float]:
        """Sampled residuals of the extension axioms (all 0 when they hold)."""
        res = {"project_include": 0.0, "project_section": 0.0, "centrality": 0.0, "kernel": 0.0}
        Hs = self.H.elements() if self.H.finite else [self.H.random(rng) for _ in range(samples)]
        for h in Hs:
            res["project_include"] = max(res["project_include"],
                                         float(self.K.distance(self.project(self.include(h)), self.K.identity())))
        for _ in range(samples):
            k = self.K.random(rng)
            res["project_section"] = max(res["project_section"], float(self.K.distance(self.project(self.section(k)), k)))
            g = self.G.random(rng)
            h = Hs[int(rng.integers(len(Hs)))]
            c = self.G.commutator(self.include(h), g)
            res["centrality"] = max(res["centrality"], float(self.G.distance(c, self.G.identity())))
            # kernel: g * section(project(g))^-1 projects to e_K, so it must come from H
            kern = self.G.mul(g, self.G.inv(self.section(self.project(g))))
            if self.K.distance(self.project(kern), self.K.identity()) <= max(self.K.tolerance, 1e-9):
                if self.pullback(kern) is None:
                    res["kernel"] = 1.0
        return res

    def descriptor(self) -> dict:
        doc = {"preset": self.name} if self.name else {}
        doc.update({"H": self.H.descriptor(), "G": self.G.descriptor(), "K": self.K.descriptor(),
                    "section": self.section_name})
        if self.table is not None:
            doc["table"] = {json_key(self.K.encode(k)): self.G.encode(v) for k, v in self.table.items()}
        return doc


def json_key(x) -> str:
    return str(x) if not isinstance(x, (list, tuple)) else ",".join(str(v) for v in x)


def cyclic_extension(a: int, b: int, table: dict | None = None) -> Extension:
    """Z/a -> Z/ab -> Z/b with include h -> b h and project g -> g mod b."""
    H, G, K = CyclicGroup(a), CyclicGroup(a * b), CyclicGroup(b)

    def pullback(g):
        return (g // b) % a if g % b == 0 else None

    ext = Extension(H, G, K, include=lambda h: (b * h) % (a * b), project=lambda g: g % b,
                    section=lambda k: k % b, pullback=pullback, name=f"z{a}-z{a * b}-z{b}",
                    section_name="table", table={k: k for k in range(b)})
    return ext.with_section(table) if table is not None else ext


def circle_squaring() -> Extension:
    """Z/2 -> circle -> circle with project = doubling and section k -> k/2 on [0, 1)."""
    H, G, K = CyclicGroup(2), CircleGroup(), CircleGroup()

    def pullback(g):
        for h, v in ((0, 0.0), (1, 0.5)):
            if G.distance(g, v) <= CIRCLE_EPS:
                return h
        return None

    return Extension(H, G, K, include=lambda h: 0.5 * h, project=lambda g: G.power(g, 2),
                     section=lambda k: K.canonical(k) / 2.0, pullback=pullback, name="circle-squaring")


PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def su2_to_so3(g: np.ndarray) -> np.ndarray:
    """Rotation matrix of an SU(2) element acting on su(2) by conjugation (batched)."""
    g = np.asarray(g)
    # R_ab = 1/2 tr(σ_a g σ_b g^†)
    gd = np.conj(np.swapaxes(g, -1, -2))
    return np.real(np.einsum("aij,...jk,bkl,...li->...ab", PAULI, g, PAULI, gd)) / 2.0


def so3_to_su2(R: np.ndarray) -> np.ndarray:
    """Principal-branch lift: the unit quaternion with w >= 0.

    On the cut w = 0 (rotations by pi) the first nonzero of (x, y, z) is made positive.
    """
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    # Shepperd's method, numerically stable
    cands = np.array([1 + tr, 1 + 2 * R[0, 0] - tr, 1 + 2 * R[1, 1] - tr, 1 + 2 * R[2, 2] - tr])
    m = int(np.argmax(cands))
    q = np.zeros(4)
    q[m] = math.sqrt(max(cands[m], 0.0)) / 2.0
    s = 4.0 * q[m]
    if m == 0:
        q[1:] = [(R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif m == 1:
        q[0], q[2], q[3] = (R[2, 1] - R[1, 2]) / s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s
    elif m == 2:
        q[0], q[1], q[3] = (R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, (R[1, 2] + R[2, 1]) / s
    else:
        q[0], q[1], q[2] = (R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s
    if q[0] < -1e-15 or (abs(q[0]) <= 1e-15 and q[np.flatnonzero(np.abs(q[1:]) > 1e-15)[0] + 1] < 0):
        q = -q
    w, x, y, z = q
    # rotation by angle t about n  <->  cos(t/2) - i sin(t/2) n.σ
    return w * np.eye(2) - 1j * (x * PAULI[0] + y * PAULI[1] + z * PAULI[2])


def spin3() -> Extension:
    """Z/2 -> SU(2) -> SO(3), the spin lifting problem."""
    H, G, K = CyclicGroup(2), MatrixGroup("su", 2), MatrixGroup("so", 3)
    signs = {0: np.eye(2, dtype=complex), 1: -np.eye(2, dtype=complex)}

    def pullback(g):
        for h, v in signs.items():
            if G.distance(g, v) <= 1e-8:
                return h
        return None

    return Extension(H, G, K, include=lambda h: signs[h], project=su2_to_so3, section=so3_to_su2,
                     pullback=pullback, name="spin3")


def quaternion_extension() -> Extension:
    """Z/2 -> Q8 -> Z/2 x Z/2 with section (0,0)->1, (1,0)->i, (0,1)->j, (1,1)->k."""
    Q = quaternion_group()
    H, K = CyclicGroup(2), ProductGroup([CyclicGroup(2), CyclicGroup(2)])
    L = Q.labels.index
    proj = {}
    for lab, img in (("1", (0, 0)), ("i", (1, 0)), ("j", (0, 1)), ("k", (1, 1))):
        proj[L(lab)] = img
        proj[L("-" + lab)] = img
    table = {(0, 0): L("1"), (1, 0): L("i"), (0, 1): L("j"), (1, 1): L("k")}

    def pullback(g):
        return {L("1"): 0, L("-1"): 1}.get(g)

    return Extension(H, Q, K, include=lambda h: L("-1") if h else L("1"), project=lambda g: proj[g],
                     section=lambda k: table[tuple(k)], pullback=pullback, name="quaternion",
                     section_name="table", table=table)


def product_extension(K: Group, H: Group) -> Extension:
    """Split extension H -> K x H -> K: project to the first factor, section k -> (k, e)."""
    G = ProductGroup([K, H])

    def pullback(g):
        return g[1] if K.eq(g[0], K.identity()) else None

    return Extension(H, G, K, include=lambda h: (K.identity(), h), project=lambda g: g[0],
                     section=lambda k: (k, H.identity()), pullback=pullback, name="product")


EXTENSION_PRESETS: dict[str, Callable[[], Extension]] = {
    "z2-z4-z2": lambda: cyclic_extension(2, 2),
    "circle-squaring": circle_squaring,
    "spin3": spin3,
    "quaternion": quaternion_extension,
}


def extension_from_descriptor(doc: dict) -> Extension:
    """Parse ``{"preset": ...}`` or ``{"H":..., "G":..., "K":..., "section":..., "table":...}``."""
    if not isinstance(doc, dict):
        raise SchemaError("extension must be a JSON object")
    extra = set(doc) - {"preset", "H", "G", "K", "section", "table"}
    if extra:
        raise SchemaError(f"unknown fields in extension: {sorted(extra)}")
    if "preset" in doc:
        try:
            ext = EXTENSION_PRESETS[doc["preset"]]()
        except KeyError:
            raise SchemaError(f"unknown extension preset {doc['preset']!r}") from None
    else:
        try:
            H, G, K = (group_from_descriptor(doc[k]) for k in ("H", "G", "K"))
        except KeyError as exc:
            raise SchemaError(f"extension misses group {exc}") from None
        ext = _infer_extension(H, G, K)
    section = doc.get("section")
    if section == "table" or "table" in doc:
        raw = doc.get("table")
        if not isinstance(raw, dict):
            raise SchemaError("section 'table' requires a 'table' object")
        table = {}
        for key, val in raw.items():
            k = ext.K.decode(_parse_key(key, ext.K))
            table[k if not isinstance(k, list) else tuple(k)] = ext.G.decode(val)
        ext = ext.with_section(table)
    elif section not in (None, "principal-branch"):
        raise SchemaError(f"unknown section kind {section!r}")
    return ext


def _parse_key(key: str, K: Group):
    if isinstance(K, ProductGroup):
        return [int(p) for p in key.split(",")]
    try:
        return int(key)
    except ValueError:
        return float(key) if not isinstance(K, FiniteGroup) else key


def _infer_extension(H: Group, G: Group, K: Group) -> Extension:
    if all(isinstance(x, CyclicGroup) for x in (H, G, K)) and H.m * K.m == G.m:
        return cyclic_extension(H.m, K.m)
    if H == CyclicGroup(2) and isinstance(G, CircleGroup) and isinstance(K, CircleGroup):
        return circle_squaring()
    if H == CyclicGroup(2) and G == MatrixGroup("su", 2) and K == MatrixGroup("so", 3):
        return spin3()
    if isinstance(G, ProductGroup) and len(G.factors) == 2 and G.factors[0] == K and G.factors[1] == H:
        return product_extension(K, H)
    if isinstance(G, FiniteGroup) and G.name == "quaternion":
        return quaternion_extension()
    raise SchemaError(f"cannot infer the maps of extension {H} -> {G} -> {K}; use a preset")


def check_central(ext: Extension, rng: np.random.Generator, samples: int = 1000, tol: float = 1e-10) -> None:
    """Raise :class:`InconsistencyError` when sampled extension axioms fail."""
    res = ext.check(rng, samples)
    bad = {k: v for k, v in res.items() if v > tol}
    if bad:
        raise InconsistencyError(f"extension {ext.name or ''} violates its axioms: {bad}")
