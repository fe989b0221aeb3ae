"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import os
import sys
import time
import warnings

import numpy as np
import pytest
import scipy.linalg

sys.path.insert(0, os.path.dirname(__file__))

from conftest import SU2, X1, X2, X3, box3, box_su2, circle_form, gauged_su2, phase_lift, plane3  # noqa: E402
from glift.cech import (Cochain, coboundary, cohomology, random_cochain, random_cocycle,  # noqa: E402
                        verify_certificate, verify_witness)
from glift.connections import (U1, chern_number, constant_connection, curvature, gerbe_curvature,  # noqa: E402
                               lift_connection, monopole, overlap_difference, product_splitting)
from glift.geometry import NERVE_NAMES, builtin_geometry, builtin_nerve  # noqa: E402
from glift.groups import CyclicGroup, cyclic_extension, quaternion_extension, spin3  # noqa: E402
from glift.holonomy import (PathSpec, TransitiveDistribution, cyclic_reduction, full_reduction,  # noqa: E402
                            parallel_transport, product_connection, td_holonomy, tower_transport,
                            trivial_reduction)
from glift.lifting import (LiftingProblem, TowerSpec, connecting_map, obstruction, obstruction_cocycle,  # noqa: E402
                           quotient_cocycle, tower_obstructions)

SEED = 20240601


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def _sphere():
    if not hasattr(_sphere, "geo"):
        _sphere.geo = builtin_geometry("sphere2")
    return _sphere.geo


def _z2_pair_cocycle(nerve, K, rng):
    a, b = (random_cocycle(nerve, 1, CyclicGroup(2), rng) for _ in range(2))
    return Cochain(nerve, 1, K, {e: (a.values[e], b.values[e]) for e in a.values})


def criterion_1():
    rng = np.random.default_rng(SEED)
    bad = checked = 0
    with Timer() as t:
        for name in NERVE_NAMES:
            nerve = builtin_nerve(name)
            for degree in range(3):
                for _ in range(1000):
                    m = int(rng.integers(2, 13))
                    c = random_cochain(nerve, degree, CyclicGroup(m), rng)
                    bad += not coboundary(coboundary(c)).is_identity()
                    checked += 1
    return bad == 0 and t.seconds < 5, f"{checked} cochains, {bad} failures, {t.seconds:.2f}s"


def criterion_2():
    rng = np.random.default_rng(SEED)
    nerves = [builtin_nerve("rp2_6"), builtin_nerve("sphere4"), builtin_nerve("rp3_11")]
    exts = [cyclic_extension(2, 2), cyclic_extension(3, 3), quaternion_extension()]
    bad = 0
    with Timer() as t:
        for n in range(200):
            ext, nerve = exts[n % 3], nerves[(n // 3) % 3]
            k = random_cocycle(nerve, 1, ext.K, rng) if isinstance(ext.K, CyclicGroup) else \
                _z2_pair_cocycle(nerve, ext.K, rng)
            c = obstruction_cocycle(LiftingProblem(nerve, ext, k))
            ok = c.group == ext.H and all(ext.H.contains(v) for v in c.values.values())
            bad += not (ok and coboundary(c).is_identity())
    return bad == 0 and t.seconds < 5, f"200 cocycles, {bad} failures, {t.seconds:.2f}s"


def criterion_3():
    rng = np.random.default_rng(SEED)
    nerve = builtin_nerve("rp2_6")
    exts = [cyclic_extension(2, 2), quaternion_extension(), spin3()]
    bad = 0
    with Timer() as t:
        for n in range(100):
            ext = exts[n % 3]
            g = random_cocycle(nerve, 1, ext.G, rng)
            rep = obstruction(LiftingProblem(nerve, ext, quotient_cocycle(g, ext)))
            bad += not (rep.trivial is True and verify_witness(rep.cocycle, rep.trivialization.witness))
    return bad == 0 and t.seconds < 10, f"100 cocycles, {bad} failures, {t.seconds:.2f}s"


def criterion_4():
    nerve = builtin_nerve("rp2_6")
    with Timer() as t:
        base = cohomology(nerve, CyclicGroup(2), 1).generators[0]
        rep = obstruction(LiftingProblem(nerve, cyclic_extension(2, 2), base), budget=2 ** 15)
        H2 = cohomology(nerve, CyclicGroup(2), 2)
        triv = rep.trivialization
        ok = (rep.coordinates == H2.coordinates(H2.generators[0]) == [1] and rep.trivial is False
              and triv.brute_force is True and triv.searched == 2 ** 15
              and verify_certificate(nerve, 2, 2, rep.cocycle.to_vector(), triv.certificate))
    return ok and t.seconds < 10, f"class {rep.coordinates}, searched {triv.searched}, {t.seconds:.2f}s"


def criterion_5():
    rng = np.random.default_rng(SEED)
    nerve = builtin_nerve("rp2_6")
    base = cyclic_extension(2, 2)
    other = base.with_section({0: 0, 1: 3}, "odd")
    bad = 0
    with Timer() as t:
        for _ in range(50):
            k = random_cocycle(nerve, 1, base.K, rng)
            c1 = obstruction_cocycle(LiftingProblem(nerve, base, k))
            c2 = obstruction_cocycle(LiftingProblem(nerve, other, k))
            b = Cochain(nerve, 1, base.H, {e: base.pullback((other.section(v) - base.section(v)) % 4)
                                            for e, v in k.values.items()})
            diff = Cochain(nerve, 2, base.H, {s: (c2.values[s] - c1.values[s]) % 2 for s in c1.values})
            bad += not coboundary(b).equals(diff)
    return bad == 0 and t.seconds < 5, f"50 cocycles, {bad} failures, {t.seconds:.2f}s"


def criterion_6():
    rng = np.random.default_rng(SEED)
    bad = 0
    for name in ("rp2_6", "rp3_11", "sphere4"):
        nerve = builtin_nerve(name)
        for a, b in ((2, 2), (2, 3), (4, 2), (3, 3)):
            ext = cyclic_extension(a, b)
            for _ in range(10):
                k = random_cocycle(nerve, 1, ext.K, rng)
                bad += not obstruction_cocycle(LiftingProblem(nerve, ext, k)).equals(connecting_map(k, ext))
    return bad == 0, f"120 cocycles, {bad} disagreements"


def criterion_7():
    geo = _sphere()
    lines, ok = [], True
    for q in (-2, -1, 0, 1, 2, 3):
        with Timer() as t:
            res = chern_number(curvature(monopole(geo, q)), geo)
        ok &= res.value == q and res.defect <= 1e-6 and t.seconds < 5
        lines.append(f"q={q}:{res.value} (defect {res.defect:.1e}, {t.seconds:.2f}s)")
    return ok, ", ".join(lines)


def criterion_8():
    plane = builtin_geometry("plane1")
    Mx, Ny = X1 + 0.3 * X3, 0.7 * X2 - X3
    F = curvature(constant_connection(plane, SU2, [Mx, Ny]))[0]
    err_const = float(np.max(np.abs(F.components[(0, 1)] - (Mx @ Ny - Ny @ Mx))))
    geo = _sphere()
    err_mono = 0.0
    for q in (1, -2, 3):
        Fm = curvature(monopole(geo, q))
        for c, sign in ((0, 1), (1, -1)):
            theta = geo.charts[c].mesh()[0]
            exact = sign * 0.5j * q * np.sin(theta)
            err_mono = max(err_mono, float(np.max(np.abs(Fm[c].components[(0, 1)][..., 0, 0] - exact))))
    return err_const <= 1e-10 and err_mono <= 1e-6, f"constant {err_const:.1e}, monopole {err_mono:.1e}"


def _plane_suite():
    A = gauged_su2(plane3(161))
    L1, _ = phase_lift(A)

    def h(p):
        x, y = p[..., 0], p[..., 1]
        return (1j * np.stack([np.sin(y), x * x], -1))[..., None, None]

    L2 = lift_connection(A, product_splitting(SU2, U1), L1.transitions, h=[h, None, h])
    return [("plane3 phase lift", L1), ("plane3 phase lift + h", L2)]


def criterion_9():
    worst1 = worst2 = 0.0
    for _, L in _plane_suite():
        D = overlap_difference(L)
        worst1, worst2 = max(worst1, D.r1), max(worst2, D.r2)
    geo = builtin_geometry("sphere2", (128, 256))
    L = lift_connection(monopole(geo, 2), product_splitting(U1, U1), h=[None, circle_form([0.0, 1.0])])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        D = overlap_difference(L)
    warned = any("no triple overlaps" in str(w.message) for w in caught) and D.r1 is None
    return worst1 <= 1e-8 and worst2 <= 1e-8 and warned, \
        f"r1 {worst1:.1e}, r2 {worst2:.1e}, two-chart warning {'emitted' if warned else 'missing'}"


def criterion_10():
    worst = 0.0
    pairs = []
    geo = builtin_geometry("sphere2", (128, 256))

    def shift(p):
        out = np.zeros(p.shape[:-1] + (2, 1, 1), complex)
        out[..., 1, 0, 0] = 1j * np.sin(p[..., 0])
        return out

    sp = product_splitting(U1, U1)
    A = monopole(geo, 1)
    pairs.append((lift_connection(A, sp), lift_connection(A, sp, h=[shift, shift])))
    box = box3(29)
    B = box_su2(box)

    def exact(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return (1j * np.stack([y * z + 2 * x, x * z, x * y - 3 * z * z], -1))[..., None, None]

    spb = product_splitting(SU2, U1)
    pairs.append((lift_connection(B, spb), lift_connection(B, spb, h=[exact])))
    suite = _plane_suite()
    pairs.append((suite[0][1], suite[1][1]))
    for L1, L2 in pairs:
        worst = max(worst, gerbe_curvature(L1, L2).lift_independence)
    return worst <= 1e-6, f"{len(pairs)} lift pairs, worst residual {worst:.1e}"


def _rk4_errors(A, path_fn, exact, steps):
    return [float(np.max(np.abs(parallel_transport(A, path_fn(n), "rk4").element - exact))) for n in steps]


def criterion_11():
    plane = builtin_geometry("plane1", (33, 33))
    M = 2.0 * X1 + 1.5 * X3
    A = constant_connection(plane, SU2, [M, 0 * M])
    t = 1.8
    exp_m = scipy.linalg.expm(-t * M)
    const = _rk4_errors(A, lambda n: PathSpec.straight(plane, 0, (-0.9, 0.0), (-0.9 + t, 0.0), n), exp_m,
                        (16, 32, 1024))
    geo = _sphere()
    theta = 2.5
    mono = _rk4_errors(monopole(geo, 1), lambda n: PathSpec.latitude(geo, theta, steps=n),
                       np.exp(-1j * math.pi * (1 - math.cos(theta))), (16, 32, 1024))
    ratios = (const[0] / const[1], mono[0] / mono[1])
    ok = const[2] <= 1e-8 and mono[2] <= 1e-8 and min(ratios) >= 8
    return ok, (f"1024-step errors {const[2]:.1e} / {mono[2]:.1e}, "
                f"halving-step ratios {ratios[0]:.1f} / {ratios[1]:.1f}")


def criterion_12():
    geo = _sphere()
    A = monopole(geo, 1)
    worst = 0.0
    for theta in (0.6, 1.0, 2.2):
        loop = PathSpec.latitude(geo, theta, steps=1024)
        base = parallel_transport(A, loop).element[0, 0]
        for n in (2, 3, 5):
            red = td_holonomy(TransitiveDistribution(A, cyclic_reduction(n)), loop).element[0, 0]
            gap = (np.angle(red) - n * np.angle(base)) / (2 * math.pi)
            worst = max(worst, abs(gap - round(gap)))
    loop = PathSpec.latitude(geo, 1.0, steps=256)
    base = parallel_transport(A, loop).element
    same = np.array_equal(td_holonomy(TransitiveDistribution(A, trivial_reduction(U1)), loop).element, base)
    flat = np.array_equal(td_holonomy(TransitiveDistribution(A, full_reduction(U1)), loop).element, np.ones((1, 1)))
    return worst <= 1e-8 and same and flat, f"angle error {worst:.1e}, L=e exact {same}, L=K exact {flat}"


def criterion_13():
    geo = _sphere()
    worst = 0.0
    A1, A2 = monopole(geo, 1), monopole(geo, -2)
    P = product_connection(A1, A2)
    for loop in (PathSpec.latitude(geo, 1.1, steps=512), PathSpec.lasso(geo, 1.0, 2.0, steps=512)):
        (t1, t2), = tower_transport([(A1, loop), (A2, loop)])
        g = parallel_transport(P, loop, "rk4").element
        worst = max(worst, float(np.max(np.abs(g[:1, :1] - t1))), float(np.max(np.abs(g[1:, 1:] - t2))))
    plane = builtin_geometry("plane1", (33, 33))
    B1 = constant_connection(plane, SU2, [X1, X2])
    B2 = constant_connection(plane, U1, [np.array([[0.5j]]), np.array([[-1j]])])
    path = PathSpec.straight(plane, 0, (-0.5, -0.5), (0.7, 0.2), 512)
    (s1, s2), = tower_transport([(B1, path), (B2, path)])
    g = parallel_transport(product_connection(B1, B2), path, "rk4").element
    worst = max(worst, float(np.max(np.abs(g[:2, :2] - s1))), float(np.max(np.abs(g[2:, 2:] - s2))))
    return worst <= 1e-10, f"max component deviation {worst:.1e}"


def criterion_14():
    nerve = builtin_nerve("rp3_11")
    with Timer() as t:
        base = cohomology(nerve, CyclicGroup(2), 1).generators[0]
        ext = cyclic_extension(2, 2)
        reports = tower_obstructions(TowerSpec((ext, ext), base))
        top = reports[1]
        ok = top.trivial is True and verify_witness(top.cocycle, top.trivialization.witness)
    return ok and t.seconds < 60, f"level-2 class {top.coordinates}, witness verified {ok}, {t.seconds:.2f}s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13, criterion_14]


def _line(n, ok, detail):
    return f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for n, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        failures += not ok
        print(_line(n, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
