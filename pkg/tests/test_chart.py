import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualjet.chart import (
    DegenerateMetricError,
    JetChart,
    NonlinearConnection,
    SpatialMetric,
    TemporalMetric,
    canonical_nonlinear_connection,
    christoffel_spatial,
    christoffel_temporal,
    delta_dt,
    delta_dx,
)
from dualjet.symbolic import ZERO, cos, diff, exp, parse_expr, sin, sum_products


def test_default_names():
    ch = JetChart(2, 3)
    assert ch.t_names == ("t1", "t2")
    assert ch.x_names == ("x1", "x2", "x3")
    assert ch.p_names[1] == ("p2_1", "p2_2", "p2_3")
    assert ch.dim == 2 + 3 + 6
    assert str(ch.p(2, 3)) == "p2_3"


def test_custom_names_and_prefix():
    ch = JetChart(1, 2, t_names=["t"], x_names=["theta", "phi"], momentum_prefix="y")
    assert ch.coordinate_names == ("t", "theta", "phi", "y1_1", "y1_2")


@pytest.mark.parametrize("kwargs", [
    dict(m=0, n=1),
    dict(m=1, n=1, t_names=["a", "b"]),
    dict(m=1, n=2, x_names=["u", "u"]),
    dict(m=1, n=1, x_names=["sin"]),
    dict(m=1, n=1, x_names=["2x"]),
])
def test_bad_charts(kwargs):
    with pytest.raises(ValueError):
        JetChart(**kwargs)


def test_vertical_index_layout():
    ch = JetChart(2, 3)
    for a in range(2):
        for i in range(3):
            assert ch.vpair(ch.vflat(a, i)) == (a, i)
    assert ch.p_ids[ch.vflat(1, 0)] == ch.p_ids[3]


def test_sample_point_is_inside_box():
    pt = JetChart(2, 2).sample_point()
    assert all(0.2 <= pt[k] <= 1.2 for k in ("t1", "t2", "x1", "x2"))
    assert all(-1 <= pt[k] <= 1 for k in ("p1_1", "p2_2"))


def test_sphere_christoffel():
    ch = JetChart(1, 2)
    th = ch.x(1)
    G = christoffel_spatial(SpatialMetric(ch, [[1, 0], [0, sin(th) ** 2]]))
    assert G[0, 1, 1] == -sin(th) * cos(th)
    assert G[1, 0, 1] == cos(th) / sin(th)
    assert G[1, 1, 0] == G[1, 0, 1]
    assert G[0, 0, 0] == ZERO and G[1, 1, 1] == ZERO and G[0, 0, 1] == ZERO


def test_polar_temporal_christoffel():
    ch = JetChart(2, 1)
    t1 = ch.t(1)
    chi = christoffel_temporal(TemporalMetric(ch, [[1, 0], [0, t1**2]]))
    assert chi[0, 1, 1] == -t1
    assert chi[1, 0, 1] == 1 / t1
    assert chi[0, 0, 0] == ZERO


def test_metric_inverse():
    ch = JetChart(1, 2)
    x1, x2 = ch.X
    phi = SpatialMetric(ch, [[1 + x1**2, x2], [x2, 2]])
    assert phi.identity_check()
    assert phi[1, 2] == x2
    assert phi.inv(1, 1) == 2 / (2 + 2 * x1**2 - x2**2)


def test_metric_from_text():
    ch = JetChart(1, 1, x_names=["u"])
    phi = SpatialMetric(ch, [["exp(u)"]])
    assert phi[1, 1] == exp(ch.x(1))


@pytest.mark.parametrize("g", [[[0]], [[1, 1], [1, 1]]])
def test_degenerate_metric(g):
    ch = JetChart(1, len(g))
    with pytest.raises((DegenerateMetricError, ZeroDivisionError)):
        SpatialMetric(ch, g)


def test_metric_must_be_symmetric():
    ch = JetChart(1, 2)
    with pytest.raises(ValueError, match="symmetric"):
        SpatialMetric(ch, [[1, ch.x(1)], [0, 1]])


def test_metric_wrong_coordinates():
    ch = JetChart(1, 1)
    with pytest.raises(ValueError, match="depends on t1"):
        SpatialMetric(ch, [[1 + ch.t(1) ** 2]])


def test_canonical_connection_components():
    ch = JetChart(2, 2)
    t1, th = ch.t(1), ch.x(1)
    h = TemporalMetric(ch, [[1, 0], [0, t1**2]])
    phi = SpatialMetric(ch, [[1, 0], [0, sin(th) ** 2]])
    N = canonical_nonlinear_connection(christoffel_temporal(h), christoffel_spatial(phi), ch)
    # N1^(a)_(i)b = chi^a_bc p^c_i
    assert N.n1(1, 2, 2) == -t1 * ch.p(2, 2)
    assert N.n1(2, 1, 1) == ch.p(2, 1) / t1
    # N2^(a)_(i)j = -Gamma^k_ij p^a_k
    assert N.n2(1, 2, 2) == sin(th) * cos(th) * ch.p(1, 1)
    assert N.n2(2, 1, 2) == -cos(th) / sin(th) * ch.p(2, 2)


def test_adapted_derivatives():
    ch = JetChart(1, 1)
    N = NonlinearConnection(ch, [[[ch.x(1)]]], [[[ch.t(1) * ch.p(1, 1)]]])
    f = ch.p(1, 1) ** 2 + ch.t(1) * ch.x(1)
    assert delta_dt(f, 1, N) == ch.x(1) - 2 * ch.x(1) * ch.p(1, 1)
    assert delta_dx(f, 1, N) == ch.t(1) - 2 * ch.t(1) * ch.p(1, 1) ** 2
    with pytest.raises(IndexError):
        delta_dx(f, 2, N)


def test_zero_connection_gives_partials():
    ch = JetChart(1, 2)
    N = NonlinearConnection.zero(ch)
    f = parse_expr("sin(t1*x2) + p1_1*x1", ch.coordinate_names)
    assert delta_dt(f, 1, N) == diff(f, "t1")
    assert delta_dx(f, 1, N) == diff(f, "x1")


coef = st.integers(-3, 3)


@given(coef, coef, st.integers(1, 3), st.integers(0, 2))
def test_levi_civita_is_metric_compatible(a, b, c, k):
    # d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il
    ch = JetChart(1, 2)
    x1, x2 = ch.X
    g11 = c + x2**2
    g12 = a * x1 * x2 / 7
    g22 = 4 + b * sin(x1) / 5 + x1**k
    phi = SpatialMetric(ch, [[g11, g12], [g12, g22]])
    G = christoffel_spatial(phi)
    g = phi.matrix
    for i in range(2):
        for j in range(2):
            for kk in range(2):
                rhs = sum_products([(1, G[l, kk, i], g[l, j]) for l in range(2)]
                                   + [(1, G[l, kk, j], g[i, l]) for l in range(2)])
                assert diff(g[i, j], ch.X[kk]) == rhs
