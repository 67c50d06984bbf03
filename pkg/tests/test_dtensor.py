import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualjet import arrays
from dualjet.chart import JetChart
from dualjet.connections import random_cartan, random_polynomial
from dualjet.dtensor import (
    S_DN,
    S_UP,
    T_DN,
    T_UP,
    V_DN,
    V_UP,
    DTensor,
    Slot,
    cov_deriv_hM,
    cov_deriv_hT,
    cov_deriv_v,
    covariant_derivative,
)
from dualjet.symbolic import ZERO, cos, sin, sum_products


def _coords(ch):
    return list(ch.T) + list(ch.X) + [p for row in ch.P for p in row]


def random_tensor(ch, signature, seed):
    rng = random.Random(seed)
    coords = _coords(ch)
    return DTensor.from_function(ch, signature, lambda *idx: random_polynomial(rng, coords, 2, 2))


def contract(X, W):
    """Scalar X^u W_u for a one-slot X and its dual W."""
    return sum_products([(1, X.comps[u], W.comps[u]) for u in range(X.shape[0])])


def outer(X, Y):
    comps = np.multiply.outer(X.comps, Y.comps)
    return DTensor(X.chart, X.signature + Y.signature, comps)


def test_indexing(cartan22):
    ch = cartan22.chart
    T = DTensor.from_function(ch, (V_UP, S_DN), lambda k, j: k * 10 + j)
    assert T[(2, 1), 2] == 21
    assert T.shape == (4, 2)
    assert T.rank == 2
    assert dict(T.nonzero())[((1, 1), 2)] == 1
    assert ((1, 1), 1) not in dict(T.nonzero())
    with pytest.raises(IndexError):
        T[1, 1]
    with pytest.raises(IndexError):
        T[(1, 1),]


def test_signature_checks():
    ch = JetChart(1, 2)
    with pytest.raises(ValueError):
        DTensor(ch, (S_UP,), [1, 2, 3])
    a = DTensor.zeros(ch, (S_UP,))
    b = DTensor.zeros(ch, (S_DN,))
    with pytest.raises(ValueError):
        a - b
    assert str(V_DN) == "V_" and str(T_UP) == "T^"
    assert Slot("V", True).size(JetChart(2, 3)) == 6


def test_arithmetic():
    ch = JetChart(1, 2)
    a = DTensor(ch, (S_UP,), [ch.x(1), 1])
    b = DTensor(ch, (S_UP,), [ch.x(1), 0])
    assert (a - b) == DTensor(ch, (S_UP,), [0, 1])
    assert (a + b).scale(2)[1] == 4 * ch.x(1)
    assert (a - a).is_zero()


def test_sphere_vector_derivative(sphere):
    # X = d/dphi; X^i_|j = dX^i/dx^j + H^i_rj X^r
    ch = sphere.chart
    th = ch.x(1)
    X = DTensor(ch, (S_UP,), [0, 1])
    DX = cov_deriv_hM(X, sphere)
    assert DX.signature == (S_UP, S_DN)
    assert DX[1, 2] == -sin(th) * cos(th)
    assert DX[2, 1] == cos(th) / sin(th)
    assert DX[1, 1] == ZERO and DX[2, 2] == ZERO


def test_metric_is_parallel(sphere):
    # the spatial metric is H-parallel for Berwald
    ch = sphere.chart
    g = DTensor(ch, (S_DN, S_DN), [[1, 0], [0, sin(ch.x(1)) ** 2]])
    assert cov_deriv_hM(g, sphere).is_zero()
    assert cov_deriv_hT(g, sphere).is_zero()
    assert cov_deriv_v(g, sphere).is_zero()


def test_scalar_derivatives_are_adapted_frame(cartan22):
    ch = cartan22.chart
    f = DTensor(ch, (), np.array(ch.p(1, 2) * ch.x(1) + ch.t(2), dtype=object))
    dt, dx, dp = cartan22.N.frame_derivatives(f.comps[()])
    assert list(cov_deriv_hT(f, cartan22).comps) == dt
    assert list(cov_deriv_hM(f, cartan22).comps) == dx
    assert list(cov_deriv_v(f, cartan22).comps) == dp


DUALS = [(T_UP, T_DN), (S_UP, S_DN), (V_UP, V_DN)]


@pytest.mark.parametrize("up, dn", DUALS)
@pytest.mark.parametrize("d", ["T", "S", "V"])
@given(seed=st.integers(0, 10**6))
@settings(max_examples=8)
def test_contraction_rule(cartan22, up, dn, d, seed):
    # D_g (X^u W_u) = (D_g X)^u W_u + X^u (D_g W)_u
    ch = cartan22.chart
    X = random_tensor(ch, (up,), seed)
    W = random_tensor(ch, (dn,), seed + 1)
    s = DTensor(ch, (), np.array(contract(X, W), dtype=object))
    Ds = covariant_derivative(s, cartan22, d)
    DX = covariant_derivative(X, cartan22, d)
    DW = covariant_derivative(W, cartan22, d)
    for g in range(Ds.shape[0]):
        lhs = Ds.comps[g]
        rhs = contract(DTensor(ch, (up,), DX.comps[:, g]), W) + contract(X, DTensor(ch, (dn,), DW.comps[:, g]))
        assert lhs == rhs


@pytest.mark.parametrize("d", ["T", "S", "V"])
@given(seed=st.integers(0, 10**6))
@settings(max_examples=5)
def test_product_rule(d, seed):
    hn = random_cartan(JetChart(1, 2), seed=seed)
    ch = hn.chart
    X = random_tensor(ch, (V_UP, S_DN), seed)
    Y = random_tensor(ch, (T_DN,), seed + 7)
    lhs = covariant_derivative(outer(X, Y), hn, d)
    DX = covariant_derivative(X, hn, d)
    DY = covariant_derivative(Y, hn, d)
    # move the derivative slot of DX past Y's slot
    rhs = np.moveaxis(np.multiply.outer(DX.comps, Y.comps), 2, 3) + np.multiply.outer(X.comps, DY.comps)
    assert arrays.equal(lhs.comps, rhs)


def test_derivative_is_linear(cartan22):
    ch = cartan22.chart
    X = random_tensor(ch, (S_UP, V_DN), 1)
    Y = random_tensor(ch, (S_UP, V_DN), 2)
    for d in "TSV":
        D = covariant_derivative(X + Y, cartan22, d)
        assert D == covariant_derivative(X, cartan22, d) + covariant_derivative(Y, cartan22, d)
