import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualjet import arrays
from dualjet.chart import JetChart, NonlinearConnection, SpatialMetric, TemporalMetric
from dualjet.connections import (
    BLOCK_NAMES,
    HNormalConnection,
    NLinearConnection,
    berwald_connection,
    complete_hnormal,
    is_cartan,
    normalization_tensor,
    random_cartan,
    verify_normalization,
)
from dualjet.symbolic import ZERO, cos, sin


def test_berwald_blocks(sphere):
    full = sphere.completed
    th = sphere.chart.x(1)
    assert full.component("H_ss", 1, 2, 2) == -sin(th) * cos(th)
    assert full.component("H_ss", 2, 1, 2) == cos(th) / sin(th)
    # H^(a)(j)_(i)(b)k = delta^a_b H^j_ik
    assert full.component("H_vv", 1, 2, 1, 1, 2) == -sin(th) * cos(th)
    assert full.component("H_vv", 1, 1, 1, 2, 2) == cos(th) / sin(th)
    for name in ("A_ss", "C_tt", "C_ss", "C_vv", "H_tt", "A_vv", "A_tt"):
        assert arrays.all_zero(full.block(name)), name
    assert full.source is sphere


def test_completion_layout(cartan22):
    hn = cartan22
    full = complete_hnormal(hn)
    m, n = hn.chart.m, hn.chart.n
    for a in range(m):
        for i in range(n):
            for b in range(m):
                for j in range(n):
                    for c in range(m):
                        want = (hn.A[j, i, c] if a == b else ZERO) - (hn.chi[a, b, c] if i == j else ZERO)
                        assert full.A_vv[a, i, b, j, c] == want
                    for k in range(n):
                        assert full.H_vv[a, i, b, j, k] == (hn.H[j, i, k] if a == b else ZERO)
    assert arrays.equal(full.A_tt, hn.chi)
    assert arrays.all_zero(full.H_tt) and arrays.all_zero(full.C_tt)
    assert full == hn.completed


def test_is_cartan():
    ch = JetChart(1, 2)
    h = TemporalMetric(ch, [[1]])
    N = NonlinearConnection.zero(ch)
    H = arrays.zeros((2, 2, 2))
    H[0, 0, 1] = ch.x(1)
    assert not is_cartan(HNormalConnection(h, N, H=H))
    H[0, 1, 0] = ch.x(1)
    assert is_cartan(HNormalConnection(h, N, H=H))
    C = arrays.zeros((2, 2, 2, 1))
    C[0, 1, 1, 0] = ch.p(1, 1)
    assert not is_cartan(HNormalConnection(h, N, H=H, C=C))
    C[1, 1, 0, 0] = ch.p(1, 1)
    assert is_cartan(HNormalConnection(h, N, H=H, C=C))


def test_nine_block_connection_without_source_is_not_cartan(cartan22):
    assert is_cartan(cartan22.completed)
    assert not is_cartan(cartan22.completed.perturbed("A_tt", (1, 1, 1)))


@given(st.integers(0, 10**6), st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)]))
@settings(max_examples=25)
def test_random_cartan_is_cartan_and_deterministic(seed, dims):
    ch = JetChart(*dims)
    a, b = random_cartan(ch, seed=seed), random_cartan(ch, seed=seed)
    assert a == b
    assert is_cartan(a)


def test_random_cartan_seeds_differ():
    ch = JetChart(2, 2)
    assert random_cartan(ch, seed=1) != random_cartan(ch, seed=2)


def test_random_cartan_default_metric():
    ch = JetChart(2, 2)
    hn = random_cartan(ch, seed=0)
    assert hn.h[2, 2] == ch.t(1) ** 4
    assert hn.chi[0, 1, 1] == -2 * ch.t(1) ** 3


def test_random_cartan_canonical_n():
    ch = JetChart(2, 2)
    hn = random_cartan(ch, seed=0, canonical_N=True)
    # N1^(a)_(i)b = chi^a_bc p^c_i, N2 = 0 for flat phi
    assert hn.N.n1(1, 1, 2) == -2 * ch.t(1) ** 3 * ch.p(2, 1)
    assert arrays.all_zero(hn.N.N2)


def test_perturbed_copies():
    hn = random_cartan(JetChart(1, 2), seed=4)
    p = hn.perturbed("H", (1, 1, 2), 3)
    assert p.H[0, 0, 1] == hn.H[0, 0, 1] + 3
    assert hn.H[0, 0, 1] != p.H[0, 0, 1]
    full = hn.completed.perturbed("C_vv", (1, 1, 1, 2, 2, 1), -1)
    assert full.source is None
    assert full.C_vv[0, 0, 0, 1, 1, 0] == hn.completed.C_vv[0, 0, 0, 1, 1, 0] - 1


def test_nine_block_defaults_to_zero():
    ch = JetChart(1, 1)
    c = NLinearConnection(NonlinearConnection.zero(ch), {})
    assert all(arrays.all_zero(c.block(k)) for k in BLOCK_NAMES)


def test_normalization_tensor(sphere2):
    J = normalization_tensor(sphere2)
    t1 = sphere2.chart.t(1)
    # J^(i)_(a)bj = h_ab delta^i_j, vertical slot flattened as a*n + i
    assert J.comps[1 * 2 + 0, 1, 0] == t1**2
    assert J.comps[0, 0, 0] == 1
    assert J.comps[0, 1, 0] == ZERO
    assert J.comps[0, 0, 1] == ZERO


@pytest.mark.parametrize("fixture", ["sphere", "sphere2", "flat", "cartan22"])
def test_normalization_holds(fixture, request):
    res = verify_normalization(request.getfixturevalue(fixture))
    assert res.passed, res.nonzero_components()[:3]


@given(st.integers(0, 10**6))
@settings(max_examples=10)
def test_normalization_holds_for_random_cartan(seed):
    assert verify_normalization(random_cartan(JetChart(2, 1), seed=seed)).passed


def test_normalization_holds_for_any_effective_blocks():
    # A, H, C are free; only the completion pattern matters
    hn = random_cartan(JetChart(1, 2), seed=9).perturbed("A", (1, 2, 1), 5)
    assert verify_normalization(hn).passed


DERIVED = [
    ("A_tt", (1, 1, 1)),
    ("A_vv", (1, 1, 1, 2, 1)),
    ("H_tt", (1, 1, 2)),
    ("H_vv", (1, 2, 1, 1, 1)),
    ("C_tt", (1, 1, 1, 1)),
    ("C_vv", (1, 1, 1, 2, 2, 1)),
]


@pytest.mark.parametrize("name, idx", DERIVED)
def test_perturbing_derived_block_breaks_normalization(sphere, name, idx):
    full = sphere.completed.perturbed(name, idx, 1)
    res = verify_normalization(full, hn=sphere)
    assert not res.passed


def test_normalization_needs_metric(sphere):
    with pytest.raises(ValueError):
        verify_normalization(sphere.completed.perturbed("A_tt", (1, 1, 1)))


def test_metric_and_connection_charts_must_agree():
    h = TemporalMetric(JetChart(1, 1), [[1]])
    N = NonlinearConnection.zero(JetChart(1, 2))
    with pytest.raises(ValueError):
        HNormalConnection(h, N)


def test_berwald_on_flat_space(flat):
    assert all(arrays.all_zero(b) for b in flat.completed.blocks().values())
    assert SpatialMetric(flat.chart, [[1]]).identity_check()
    assert berwald_connection(flat.h, SpatialMetric(flat.chart, [[1]])) == flat
