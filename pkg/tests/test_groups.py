import numpy as np
import pytest
from hypothesis import given, strategies as st

from glift.errors import BranchCutError, InconsistencyError, SchemaError
from glift.groups import (EXTENSION_PRESETS, PAULI, CircleGroup, CyclicGroup, MatrixGroup, ProductGroup,
                          check_central, cyclic_extension, extension_from_descriptor, group_from_descriptor,
                          product_extension, quaternion_group, so3_to_su2, su2_to_so3)

seeds = st.integers(0, 2 ** 32 - 1)


@given(st.integers(1, 40), st.integers(-100, 100), st.integers(-100, 100))
def test_cyclic_arithmetic_is_mod_m(m, a, b):
    G = CyclicGroup(m)
    assert G.mul(a % m, b % m) == (a + b) % m
    assert G.mul(a % m, G.inv(a % m)) == 0
    assert G.power(a % m, 3) == (3 * a) % m


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_circle_distance_is_mod_one(a, b):
    G = CircleGroup()
    assert G.distance(a, a + 3.0) < 1e-9
    assert 0.0 <= G.distance(a, b) <= 0.5 + 1e-12


def test_quaternion_relations():
    Q = quaternion_group()
    L = Q.labels.index
    i, j, k, m1 = L("i"), L("j"), L("k"), L("-1")
    assert Q.mul(i, i) == m1 and Q.mul(j, j) == m1 and Q.mul(k, k) == m1
    assert Q.mul(Q.mul(i, j), k) == m1
    assert Q.mul(i, j) != Q.mul(j, i)


@pytest.mark.parametrize("kind,dim", [("u", 1), ("u", 3), ("su", 2), ("so", 3)])
def test_random_matrices_lie_in_the_group(kind, dim, rng):
    G = MatrixGroup(kind, dim)
    for _ in range(20):
        g = G.random(rng)
        assert G.check(g) < 1e-10
        assert G.distance(G.mul(g, G.inv(g)), G.identity()) < 1e-12


@pytest.mark.parametrize("kind,dim", [("u", 2), ("su", 2), ("so", 3)])
def test_exp_log_roundtrip_on_small_elements(kind, dim, rng):
    G = MatrixGroup(kind, dim)
    basis = G.algebra_basis()
    for _ in range(10):
        x = np.tensordot(rng.uniform(-0.5, 0.5, len(basis)), basis, axes=1)
        assert np.allclose(G.log(G.exp(x)), x, atol=1e-12)
        assert G.algebra_residual(x) < 1e-12


def test_log_refuses_the_branch_cut():
    with pytest.raises(BranchCutError):
        MatrixGroup("u", 1).log(np.array([[-1.0 + 0j]]))


def test_algebra_coordinates_invert_the_basis(rng):
    G = MatrixGroup("su", 2)
    c = rng.normal(size=G.algebra_dim)
    x = np.tensordot(c, G.algebra_basis(), axes=1)
    assert np.allclose(G.algebra_coords(x), c)


def test_ad_matrix_represents_conjugation(rng):
    G = MatrixGroup("su", 2)
    g = G.random(rng)
    c = rng.normal(size=3)
    x = np.tensordot(c, G.algebra_basis(), axes=1)
    assert np.allclose(G.algebra_coords(G.ad(g, x)), G.ad_matrix(g) @ c)


def test_double_cover_is_a_homomorphism_with_kernel_pm1(rng):
    G = MatrixGroup("su", 2)
    for _ in range(20):
        a, b = G.random(rng), G.random(rng)
        assert np.allclose(su2_to_so3(a @ b), su2_to_so3(a) @ su2_to_so3(b), atol=1e-12)
        assert np.allclose(su2_to_so3(-a), su2_to_so3(a))
    assert np.allclose(su2_to_so3(-np.eye(2)), np.eye(3))


def test_double_cover_section(rng):
    K = MatrixGroup("so", 3)
    for _ in range(50):
        R = K.random(rng)
        assert np.allclose(su2_to_so3(so3_to_su2(R)), R, atol=1e-10)


def test_double_cover_matches_pauli_rotation():
    # conjugating by exp(-i t σ_z / 2) rotates the (x, y) plane by t
    t = 0.7
    g = np.cos(t / 2) * np.eye(2) - 1j * np.sin(t / 2) * PAULI[2]
    R = su2_to_so3(g)
    expected = np.array([[np.cos(t), -np.sin(t), 0], [np.sin(t), np.cos(t), 0], [0, 0, 1]])
    assert np.allclose(R, expected)


@pytest.mark.parametrize("name", sorted(EXTENSION_PRESETS))
def test_preset_extensions_satisfy_axioms(name, rng):
    res = EXTENSION_PRESETS[name]().check(rng, samples=200)
    assert all(v < 1e-9 for v in res.values()), res


def test_product_extension_axioms(rng):
    ext = product_extension(CyclicGroup(3), CyclicGroup(4))
    assert all(v == 0 for v in ext.check(rng, 100).values())


def test_bogus_section_is_caught(rng):
    ext = cyclic_extension(2, 2).with_section({0: 0, 1: 3})
    assert ext.check(rng, 50)["project_section"] == 0
    bad = cyclic_extension(2, 2).with_section({0: 0, 1: 2})
    with pytest.raises(InconsistencyError):
        check_central(bad, rng, 50)


def test_section_table_must_cover_k():
    with pytest.raises(SchemaError):
        cyclic_extension(2, 3).with_section({0: 0, 1: 1})


@pytest.mark.parametrize("G", [CyclicGroup(5), CircleGroup(), MatrixGroup("su", 2), quaternion_group(),
                               ProductGroup([CyclicGroup(2), CyclicGroup(3)])])
def test_descriptor_roundtrip(G):
    assert group_from_descriptor(G.descriptor()) == G


@given(seeds)
def test_matrix_encode_decode_roundtrip(seed):
    G = MatrixGroup("u", 2)
    g = G.random(np.random.default_rng(seed))
    assert np.allclose(G.decode(G.encode(g)), g)


def test_extension_from_descriptor_infers_maps():
    ext = extension_from_descriptor({"H": {"kind": "cyclic", "order": 2}, "G": {"kind": "cyclic", "order": 4},
                                     "K": {"kind": "cyclic", "order": 2}, "section": "table",
                                     "table": {"0": 0, "1": 3}})
    assert ext.section(1) == 3
    assert extension_from_descriptor({"preset": "spin3"}).name == "spin3"


def test_unknown_descriptors_are_schema_errors():
    with pytest.raises(SchemaError):
        group_from_descriptor({"kind": "monster"})
    with pytest.raises(SchemaError):
        extension_from_descriptor({"preset": "nope"})
    with pytest.raises(SchemaError):
        group_from_descriptor({"kind": "cyclic", "order": 2, "extra": 1})
