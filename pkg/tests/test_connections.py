import math
import warnings

import numpy as np
import pytest

from glift.connections import (U1, bianchi_residual, block_points, chern_number, circle_squaring_splitting,
                               constant_connection, curvature, gauge_compat_residual, gerbe_curvature,
                               lift_connection, monopole, overlap_difference, product_splitting, zero_connection)
from glift.errors import BranchCutError, SchemaError, ToleranceError
from glift.geometry import builtin_geometry
from glift.groups import MatrixGroup

from conftest import SU2, X1, X2, X3, box3, box_su2, circle_form, gauged_su2, phase_lift, plane3


@pytest.fixture(scope="module")
def small_sphere():
    return builtin_geometry("sphere2", (96, 192))


@pytest.fixture(scope="module")
def lifted_plane():
    return phase_lift(gauged_su2(plane3(161)))


def test_constant_connection_curvature_is_commutator():
    geo = builtin_geometry("plane1", (33, 33))
    M, N = X1 + 0.3 * X3, 0.7 * X2 - X3
    F = curvature(constant_connection(geo, SU2, [M, N]))[0]
    assert np.max(np.abs(F.components[(0, 1)] - (M @ N - N @ M))) < 1e-10


def test_constant_connection_rejects_non_algebra_matrices():
    geo = builtin_geometry("plane1", (9, 9))
    with pytest.raises(SchemaError):
        constant_connection(geo, SU2, [np.eye(2), np.zeros((2, 2))])


@pytest.mark.parametrize("q", [-1, 2])
def test_monopole_field_strength_matches_closed_form(small_sphere, q):
    F = curvature(monopole(small_sphere, q))
    for c, sign in ((0, 1), (1, -1)):
        theta = small_sphere.charts[c].mesh()[0]
        exact = sign * 0.5j * q * np.sin(theta)
        assert np.max(np.abs(F[c].components[(0, 1)][..., 0, 0] - exact)) < 1e-6


def test_monopole_is_gauge_compatible(sphere):
    for r in gauge_compat_residual(monopole(sphere, 3)):
        assert r.connection < 1e-6 and r.curvature < 1e-8


def test_wrong_transition_is_detected(small_sphere):
    A = monopole(small_sphere, 1)
    A.transitions[(0, 1)] = np.conj(A.transitions[(0, 1)])
    worst = max(r.connection for r in gauge_compat_residual(A))
    assert worst > 0.5


def test_gauged_su2_is_gauge_compatible():
    A = gauged_su2(plane3(81))
    res = gauge_compat_residual(A)
    assert len(res) == 6
    assert max(r.connection for r in res) < 1e-7 and max(r.curvature for r in res) < 1e-6


def test_zero_connection_is_flat(small_sphere):
    A = zero_connection(small_sphere, MatrixGroup("su", 2))
    assert max(f.max_norm() for f in curvature(A)) == 0.0


@pytest.mark.parametrize("q", [-2, -1, 0, 1, 2, 3])
def test_chern_number_is_the_charge(sphere, q):
    res = chern_number(curvature(monopole(sphere, q)), sphere)
    assert res.value == q and res.defect <= 1e-6


def test_chern_defect_over_limit_raises(small_sphere):
    with pytest.raises(ToleranceError):
        chern_number(curvature(monopole(small_sphere, 0.5)), small_sphere)


def test_bianchi_identity_in_three_dimensions():
    assert bianchi_residual(box_su2(box3(33))) < 1e-5


def test_bianchi_is_vacuous_on_surfaces(small_sphere):
    assert bianchi_residual(monopole(small_sphere, 1)) == 0.0


def test_overlap_difference_matches_closed_form(lifted_plane):
    L, phases = lifted_plane
    D = overlap_difference(L)
    geo = L.geometry
    for key, (_, grad) in phases.items():
        ov = geo.overlap(*key)
        pts = block_points(geo.charts[key[0]], ov.region)
        expected = -1j * grad(pts)
        a = D.a[key]
        for axis in range(2):
            got = a.components[(axis,)][..., 2, 2]
            assert np.max(np.abs(got - expected[..., axis])) < 1e-7


def test_triple_overlap_identities_hold(lifted_plane):
    D = overlap_difference(lifted_plane[0])
    assert D.r1 is not None and D.r1 <= 1e-8
    assert D.r2 <= 1e-8
    assert D.antisymmetry == 0.0
    assert D.pushforward_residual < 1e-7


def test_lifted_forms_project_to_base(lifted_plane):
    assert lifted_plane[0].projection_residual == 0.0


def test_r1_holds_for_any_lifted_transitions(lifted_plane):
    L, _ = lifted_plane
    bumped = L.transitions[(0, 1)].copy()
    pts = block_points(L.geometry.charts[0], L.geometry.overlap(0, 1).region)
    bumped[..., 2, 2] *= np.exp(0.2j * pts[..., 0] ** 2)
    L2 = type(L)(L.base, L.splitting, L.forms, {**L.transitions, (0, 1): bumped}, L.h_forms, L.projection_residual)
    D = overlap_difference(L2)
    # a_01 changes by -0.4 i x dx while the triple product c absorbs the same phase: r1 stays small
    assert D.r1 <= 1e-7


def test_two_chart_geometry_warns_and_skips_r1(small_sphere):
    A = monopole(small_sphere, 2)
    L = lift_connection(A, product_splitting(U1, U1), h=[None, circle_form([0.0, 1.0])])
    with pytest.warns(UserWarning, match="no triple overlaps"):
        D = overlap_difference(L)
    assert D.r1 is None and D.warnings
    assert D.r2 < 1e-8
    assert np.max(np.abs(D.a[(0, 1)].components[(1,)][..., 1, 1] - 1j)) < 1e-10


def test_circle_squaring_lift_of_even_charge(small_sphere):
    A = monopole(small_sphere, 2)
    g = {(0, 1): lambda p: np.exp(-1j * p[..., 1])[..., None, None]}
    L = lift_connection(A, circle_squaring_splitting(), g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        D = overlap_difference(L)
    assert D.r2 == 0.0 and D.pushforward_residual < 1e-7


def test_default_section_crossing_branch_cut(small_sphere):
    with pytest.raises(BranchCutError):
        lift_connection(monopole(small_sphere, 2), circle_squaring_splitting())


def test_discrete_h_refuses_h_part(small_sphere):
    g = {(0, 1): lambda p: np.exp(-1j * p[..., 1])[..., None, None]}
    with pytest.raises(SchemaError):
        lift_connection(monopole(small_sphere, 2), circle_squaring_splitting(), g, h=[circle_form([0, 1]), None])


def test_lift_independence_for_shifted_h(small_sphere):
    A = monopole(small_sphere, 1)
    sp = product_splitting(U1, U1)

    def shifted(p):
        out = np.zeros(p.shape[:-1] + (2, 1, 1), complex)
        out[..., 1, 0, 0] = 1j * np.sin(p[..., 0])
        return out

    L1 = lift_connection(A, sp)
    L2 = lift_connection(A, sp, h=[shifted, shifted])
    G = gerbe_curvature(L1, L2)
    assert G.lift_independence <= 1e-6
    assert G.flags and all("vanish" in f for f in G.flags)


def test_exact_h_part_leaves_three_curvature_unchanged():
    geo = box3(29)
    A = box_su2(geo)
    sp = product_splitting(SU2, U1)

    def h(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        grad = np.stack([y * z + 2 * x, x * z, x * y - 3 * z * z], -1)
        return (1j * grad)[..., None, None]

    base, shifted = lift_connection(A, sp), lift_connection(A, sp, h=[h])
    Gb, Gs = gerbe_curvature(base), gerbe_curvature(shifted, base)
    assert Gs.lift_independence <= 1e-6
    assert (Gs.omega[0] - Gb.omega[0]).max_norm() <= 1e-6
    assert not Gs.flags


def test_lift_needs_matching_group(small_sphere):
    with pytest.raises(SchemaError):
        lift_connection(monopole(small_sphere, 1), product_splitting(SU2, U1))
