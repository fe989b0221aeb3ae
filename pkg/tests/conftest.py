import math
import os

import numpy as np
import pytest
import scipy.linalg
from hypothesis import HealthCheck, settings

from glift.connections import LocalConnection, U1
from glift.geometry import Chart, ChartedGeometry
from glift.groups import PAULI, MatrixGroup

settings.register_profile("glift", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "glift"))

SU2 = MatrixGroup("su", 2)
X1, X2, X3 = (-0.5j * PAULI[k] for k in range(3))


def plane3(n: int = 81) -> ChartedGeometry:
    """Three overlapping squares in the plane with a common triple overlap."""
    charts = [
        Chart("a", (0.0, 0.0), (1.0, 1.0), (n, n), (False, False)),
        Chart("b", (0.5, 0.0), (1.5, 1.0), (n, n), (False, False)),
        Chart("c", (0.25, 0.5), (1.25, 1.5), (n, n), (False, False)),
    ]
    ident = ((1, 1), (0.0, 0.0))
    return ChartedGeometry.build("plane3", charts, [(0, 1, *ident), (0, 2, *ident), (1, 2, *ident)])


def circle3_charts(n: int = 65) -> ChartedGeometry:
    """The circle R/Z covered by three grid-aligned arcs with pairwise overlaps and no triple overlap.

    Arc c runs past 1, and its overlap with arc a uses the shift x -> x - 1.
    """
    charts = [
        Chart("a", (0.0,), (0.5,), (n,), (False,)),
        Chart("b", (0.375,), (0.875,), (n,), (False,)),
        Chart("c", (0.75,), (1.25,), (n,), (False,)),
    ]
    return ChartedGeometry.build("circle3-arcs", charts,
                                 [(0, 1, (1,), (0.0,)), (1, 2, (1,), (0.0,)), (2, 0, (1,), (-1.0,))])


def _expm_batch(x):
    flat = x.reshape(-1, x.shape[-2], x.shape[-1])
    return np.array([scipy.linalg.expm(m) for m in flat]).reshape(x.shape)


# gauge functions phi_i = exp(f_i X_i); the connection is the gauge transform of B
_GAUGE = [
    (lambda p: 0.7 * p[..., 0] * p[..., 1], lambda p: np.stack([0.7 * p[..., 1], 0.7 * p[..., 0]], -1), X1),
    (lambda p: np.sin(p[..., 0]) + 0.3 * p[..., 1], lambda p: np.stack([np.cos(p[..., 0]), 0.3 + 0 * p[..., 1]], -1), X2),
    (lambda p: 0.5 * p[..., 1] ** 2, lambda p: np.stack([0 * p[..., 0], p[..., 1]], -1), X3),
]


def _B(p):
    x, y = p[..., 0], p[..., 1]
    out = np.zeros(p.shape[:-1] + (2, 2, 2), complex)
    out[..., 0, :, :] = np.sin(y)[..., None, None] * X1 + 0.4 * X3
    out[..., 1, :, :] = x[..., None, None] * X2 + (x * y)[..., None, None] * X1
    return out


def _phi(i, p):
    f, _, X = _GAUGE[i]
    return _expm_batch(f(p)[..., None, None] * X)


def gauged_su2(geo: ChartedGeometry) -> LocalConnection:
    """A_i = phi_i^-1 B phi_i + phi_i^-1 d phi_i with k_ij = phi_i^-1 phi_j, all analytic."""

    def coeff(i):
        def fn(p):
            _, df, X = _GAUGE[i]
            ph = _phi(i, p)
            phinv = np.conj(np.swapaxes(ph, -1, -2))
            B = _B(p)
            out = np.einsum("...ij,...ajk,...kl->...ail", phinv, B, ph)
            return out + df(p)[..., :, None, None] * X
        return fn

    def trans(i, j):
        def fn(p):
            return np.conj(np.swapaxes(_phi(i, p), -1, -2)) @ _phi(j, p)
        return fn

    pairs = {(i, j): trans(i, j) for i, j in geo.pairs()}
    return LocalConnection.from_functions(geo, SU2, [coeff(i) for i in range(len(geo.charts))], pairs, "gauged-su2")


def box3(n: int = 33) -> ChartedGeometry:
    return ChartedGeometry("box3", (Chart("box", (-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (n, n, n), (False,) * 3),))


def box_su2(geo: ChartedGeometry) -> LocalConnection:
    """A smooth non-flat su(2) connection on the cube."""

    def fn(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        out = np.zeros(p.shape[:-1] + (3, 2, 2), complex)
        out[..., 0, :, :] = (0.5 * y)[..., None, None] * X1 + (0.3 * z * z)[..., None, None] * X2
        out[..., 1, :, :] = np.sin(z)[..., None, None] * X2 + (0.2 * x)[..., None, None] * X3
        out[..., 2, :, :] = (x * y)[..., None, None] * X3 + 0.1 * X1
        return out

    return LocalConnection.from_functions(geo, SU2, [fn], name="box-su2")


def circle_form(coeffs):
    """Callable returning constant U(1) coefficients i*c_a on every sample."""
    c = np.asarray(coeffs, dtype=float)

    def fn(p):
        return np.broadcast_to((1j * c)[:, None, None], p.shape[:-1] + (len(c), 1, 1))
    return fn


@pytest.fixture(scope="session")
def sphere():
    from glift.geometry import builtin_geometry
    return builtin_geometry("sphere2")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


__all__ = ["SU2", "U1", "X1", "X2", "X3", "plane3", "circle3_charts", "gauged_su2", "box3", "box_su2",
           "circle_form", "phase_lift", "math"]


def phase_lift(A: LocalConnection, amp: float = 0.3):
    """Product lift of ``A`` to SU(2) x U(1) whose U(1) transitions exp(i e_ij) do not form a cocycle.

    Returns the lifted connection and the phases e_ij with their gradients so
    that tests can compare a_ij with its closed form -i de_ij.
    """
    from glift.connections import _block_diag, lift_connection, product_splitting

    phases = {
        (0, 1): (lambda p: amp * p[..., 0] * p[..., 1], lambda p: amp * np.stack([p[..., 1], p[..., 0]], -1)),
        (0, 2): (lambda p: amp * p[..., 0] ** 2, lambda p: amp * np.stack([2 * p[..., 0], 0 * p[..., 1]], -1)),
        (1, 2): (lambda p: amp * np.sin(p[..., 1]), lambda p: amp * np.stack([0 * p[..., 0], np.cos(p[..., 1])], -1)),
    }

    def lifted(key):
        k, (e, _) = A.transition_evaluators[key], phases[key]
        return lambda p: _block_diag(k(p), np.exp(1j * e(p))[..., None, None])

    g = {key: lifted(key) for key in phases}
    return lift_connection(A, product_splitting(SU2, U1), g), phases
