import numpy as np
import pytest
from hypothesis import given, strategies as st

from glift.cech import (Cochain, coboundary, cohomology, default_budget, is_cocycle, nonabelian_deviation,
                        random_cochain, random_cocycle, solve_trivialization, verify_certificate, verify_witness)
from glift.errors import InconsistencyError, SchemaError
from glift.geometry import NERVE_NAMES, builtin_nerve
from glift.groups import CircleGroup, CyclicGroup, Integers, MatrixGroup, ProductGroup, quaternion_group

NERVES = {name: builtin_nerve(name) for name in NERVE_NAMES}
seeds = st.integers(0, 2 ** 32 - 1)
names = st.sampled_from(NERVE_NAMES)


def rank_mod_p(M, p):
    """Rank over GF(p) by plain Gaussian elimination (independent of the SNF code)."""
    A = [[int(x) % p for x in row] for row in np.asarray(M)]
    rank, cols = 0, len(A[0]) if A else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(A)) if A[r][c]), None)
        if pivot is None:
            continue
        A[rank], A[pivot] = A[pivot], A[rank]
        inv = pow(A[rank][c], -1, p)
        A[rank] = [x * inv % p for x in A[rank]]
        for r in range(len(A)):
            if r != rank and A[r][c]:
                f = A[r][c]
                A[r] = [(x - f * y) % p for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


def betti_mod_p(nerve, n, p):
    N = nerve.count(n)
    r_out = rank_mod_p(nerve.boundary_matrix(n), p) if n < nerve.dimension else 0
    r_in = rank_mod_p(nerve.boundary_matrix(n - 1), p) if n > 0 else 0
    return N - r_out - r_in


@given(names, st.integers(0, 2), st.sampled_from([2, 3, 4, 6]), seeds)
def test_coboundary_squares_to_zero(name, degree, m, seed):
    nerve = NERVES[name]
    if degree + 2 > nerve.dimension:
        return
    c = random_cochain(nerve, degree, CyclicGroup(m), np.random.default_rng(seed))
    assert coboundary(coboundary(c)).is_identity()


@given(names, seeds)
def test_coboundary_squares_to_zero_over_integers_and_circle(name, seed):
    nerve = NERVES[name]
    rng = np.random.default_rng(seed)
    z = Cochain.from_vector(nerve, 0, Integers(), rng.integers(-50, 50, nerve.count(0)))
    assert coboundary(coboundary(z)).is_identity()
    t = random_cochain(nerve, 0, CircleGroup(), rng)
    assert is_cocycle(coboundary(t))


def test_matrix_path_agrees_with_generic_face_sum(rng):
    nerve = NERVES["rp2_6"]
    c = random_cochain(nerve, 1, CyclicGroup(5), rng)
    fast = coboundary(c)
    P = ProductGroup([CyclicGroup(5)])
    slow = coboundary(c.map(lambda v: (v,), P))
    assert all(fast.values[s] == slow.values[s][0] for s in fast.simplices)


@pytest.mark.parametrize("name", NERVE_NAMES)
@pytest.mark.parametrize("p", [2, 3])
def test_cohomology_ranks_match_gf_p(name, p):
    nerve = NERVES[name]
    for n in range(nerve.dimension + 1):
        H = cohomology(nerve, CyclicGroup(p), n)
        assert H.factors == [p] * betti_mod_p(nerve, n, p)


@pytest.mark.parametrize("name,degree,factors", [
    ("circle3", 1, [0]), ("sphere4", 1, []), ("sphere4", 2, [0]),
    ("rp2_6", 1, []), ("rp2_6", 2, [2]),
    ("rp3_11", 1, []), ("rp3_11", 2, [2]), ("rp3_11", 3, [0]),
])
def test_integral_cohomology(name, degree, factors):
    assert cohomology(NERVES[name], Integers(), degree).factors == factors


def test_z4_cohomology_of_rp2():
    nerve = NERVES["rp2_6"]
    assert cohomology(nerve, CyclicGroup(4), 1).factors == [2]
    assert cohomology(nerve, CyclicGroup(4), 2).factors == [2]


@pytest.mark.parametrize("name", NERVE_NAMES)
def test_generators_have_unit_coordinates(name):
    nerve = NERVES[name]
    for n in range(1, nerve.dimension + 1):
        H = cohomology(nerve, CyclicGroup(2), n)
        for j, gen in enumerate(H.generators):
            assert is_cocycle(gen)
            assert H.coordinates(gen) == [int(k == j) for k in range(len(H.factors))]


@given(names, st.sampled_from([2, 3, 4]), seeds)
def test_coboundaries_have_zero_class(name, m, seed):
    nerve = NERVES[name]
    b = random_cochain(nerve, 0, CyclicGroup(m), np.random.default_rng(seed))
    H = cohomology(nerve, CyclicGroup(m), 1)
    assert not any(H.coordinates(coboundary(b)))


def test_coordinates_reject_non_cocycles():
    nerve = NERVES["rp2_6"]
    H = cohomology(nerve, CyclicGroup(2), 1)
    vec = [0] * nerve.count(1)
    vec[0] = 1
    with pytest.raises(InconsistencyError):
        H.coordinates(Cochain.from_vector(nerve, 1, CyclicGroup(2), vec))


@given(names, st.sampled_from([2, 3]), seeds)
def test_trivialization_of_coboundary_is_verified(name, m, seed):
    nerve = NERVES[name]
    rng = np.random.default_rng(seed)
    c = coboundary(random_cochain(nerve, 1, CyclicGroup(m), rng)) if nerve.dimension >= 2 else \
        coboundary(random_cochain(nerve, 0, CyclicGroup(m), rng))
    t = solve_trivialization(c, budget=0)
    assert t.trivial and verify_witness(c, t.witness)


def test_rp2_generator_has_a_certificate_confirmed_by_search():
    nerve = NERVES["rp2_6"]
    gen = cohomology(nerve, CyclicGroup(2), 2).generators[0]
    t = solve_trivialization(gen, budget=2 ** 15)
    assert not t.trivial and t.brute_force is True and t.searched == 2 ** 15
    assert verify_certificate(nerve, 2, 2, gen.to_vector(), t.certificate)


def test_exhaustive_search_returns_smallest_witness():
    nerve = NERVES["circle3"]
    b = Cochain.from_vector(nerve, 0, CyclicGroup(3), [0, 1, 2])
    t = solve_trivialization(coboundary(b), budget=27)
    assert t.method == "snf+exhaustive"
    assert t.witness.to_vector().tolist() == [0, 1, 2]


def test_certificate_rejects_wrong_functionals():
    nerve = NERVES["rp2_6"]
    gen = cohomology(nerve, CyclicGroup(2), 2).generators[0]
    assert not verify_certificate(nerve, 2, 2, gen.to_vector(), [0] * nerve.count(2))
    assert not verify_certificate(nerve, 2, 2, gen.to_vector(), [1])


def test_strict_mode_reads_trivial_as_identity():
    nerve = NERVES["sphere4"]
    c = coboundary(Cochain.from_vector(nerve, 1, CyclicGroup(2), [1, 0, 0, 0, 0, 0]))
    assert solve_trivialization(c).trivial
    assert not solve_trivialization(c, strict=True).trivial


def test_budget_env_override(monkeypatch):
    monkeypatch.setenv("GLIFT_BUDGET", "17")
    assert default_budget() == 17
    monkeypatch.setenv("GLIFT_BUDGET", "lots")
    with pytest.raises(SchemaError):
        default_budget()


def test_orientation_convention():
    nerve = NERVES["sphere4"]
    c = random_cochain(nerve, 1, CyclicGroup(7), np.random.default_rng(0))
    assert c.value((1, 0)) == (-c.value((0, 1))) % 7
    d = random_cochain(nerve, 2, CyclicGroup(7), np.random.default_rng(1))
    assert d.value((1, 0, 2)) == (-d.value((0, 1, 2))) % 7
    assert d.value((1, 2, 0)) == d.value((0, 1, 2))


def test_nonabelian_cocycles_have_trivial_deviation(rng):
    nerve = NERVES["rp2_6"]
    for G in (quaternion_group(), MatrixGroup("su", 2)):
        g = random_cocycle(nerve, 1, G, rng)
        assert is_cocycle(g)
        t = nonabelian_deviation(g)
        assert all(G.distance(v, G.identity()) < 1e-10 for v in t.values.values())


def test_random_cocycles_are_cocycles(rng):
    for name, nerve in NERVES.items():
        for n in range(1, nerve.dimension):
            assert is_cocycle(random_cocycle(nerve, n, CyclicGroup(4), rng))


@pytest.mark.parametrize("G", [CyclicGroup(4), MatrixGroup("su", 2), quaternion_group()])
def test_cochain_json_roundtrip(G, rng):
    nerve = NERVES["sphere4"]
    c = random_cochain(nerve, 1, G, rng)
    assert Cochain.from_json(c.to_json(), nerve).equals(c)


def test_reversed_keys_in_json_are_reoriented():
    nerve = NERVES["circle3"]
    doc = {"degree": 1, "group": {"kind": "cyclic", "order": 5}, "values": {"1,0": 2}}
    c = Cochain.from_json(doc, nerve)
    assert c.value((0, 1)) == 3 and c.value((1, 2)) == 0


def test_cochain_keys_are_validated():
    nerve = NERVES["circle3"]
    with pytest.raises(SchemaError):
        Cochain(nerve, 1, CyclicGroup(2), {(0, 1): 1})
    with pytest.raises(SchemaError):
        Cochain.from_json({"degree": 1, "group": {"kind": "cyclic", "order": 2}, "values": {"0,5": 1}}, nerve)
