import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sphere_connection
from dualjet import arrays
from dualjet.chart import JetChart
from dualjet.connections import random_cartan
from dualjet.torsion_curvature import (
    CURVATURE_SIGNATURES,
    TORSION_SIGNATURES,
    NotHNormalError,
    curvature_closed_form,
    curvature_from_definition,
    torsion_closed_form,
    torsion_from_definition,
)
from dualjet.symbolic import ZERO, sin
from sympy_oracle import BerwaldOracle


def closed(D):
    tor = torsion_closed_form(D)
    return tor, curvature_closed_form(D, tor)


def test_sphere_riemann(sphere):
    _, cur = closed(sphere)
    th = sphere.chart.x(1)
    assert cur.R_ijk[1, 2, 1, 2] == -sin(th) ** 2
    assert cur.R_ijk[1, 2, 2, 1] == sin(th) ** 2
    assert cur.R_ijk[2, 1, 1, 2] == 1
    assert cur.R_ijk[1, 1, 1, 2] == ZERO


def test_sphere_torsion(sphere):
    tor, _ = closed(sphere)
    ch = sphere.chart
    assert tor.nonzero_families() == ["R_ij"]
    # R^(1)_(r)ij = -R^s_rij p^1_s
    assert tor.R_ij[(1, 1), 1, 2] == -ch.p(1, 2)
    assert tor.R_ij[(1, 2), 1, 2] == sin(ch.x(1)) ** 2 * ch.p(1, 1)


def test_families_have_declared_signatures(cartan22):
    tor, cur = closed(cartan22)
    for name, t in tor.families().items():
        assert t.signature == TORSION_SIGNATURES[name]
    for name, t in cur.families().items():
        assert t.signature == CURVATURE_SIGNATURES[name]


@pytest.mark.parametrize("fixture", ["flat", "sphere", "sphere2", "cartan22"])
def test_closed_form_matches_definition(fixture, request):
    D = request.getfixturevalue(fixture)
    tor, cur = closed(D)
    assert tor.differences(torsion_from_definition(D.completed)) == []
    assert cur.differences(curvature_from_definition(D.completed)) == []


@given(st.integers(0, 10**6), st.sampled_from([(1, 1), (1, 2), (2, 1)]))
@settings(max_examples=12)
def test_closed_form_matches_definition_random(seed, dims):
    D = random_cartan(JetChart(*dims), seed=seed, degree=2)
    tor, cur = closed(D)
    assert tor.differences(torsion_from_definition(D.completed)) == []
    assert cur.differences(curvature_from_definition(D.completed)) == []


def test_definition_reports_structural_zeros(cartan22):
    assert torsion_from_definition(cartan22.completed).extra["unexpected"] == []
    assert curvature_from_definition(cartan22.completed).extra["violations"] == []


def test_definition_flags_non_hnormal_blocks(sphere):
    full = sphere.completed.perturbed("C_tt", (1, 1, 1, 1), 1)
    assert torsion_from_definition(full).extra["unexpected"] != []
    full = sphere.completed.perturbed("H_tt", (1, 1, 2), sphere.chart.x(1))
    assert curvature_from_definition(full).extra["violations"] != []


def test_closed_form_needs_hnormal(sphere):
    with pytest.raises(NotHNormalError):
        torsion_closed_form(sphere.completed.perturbed("A_tt", (1, 1, 1)))
    with pytest.raises(NotHNormalError):
        curvature_closed_form(sphere.completed.perturbed("H_vv", (1, 1, 1, 1, 1)))


def test_definition_sees_a_perturbation(sphere):
    full = sphere.completed.perturbed("H_ss", (1, 2, 2), 1)
    cur = curvature_from_definition(full)
    assert cur.differences(curvature_closed_form(sphere)) != []


def test_v_column_views(sphere2):
    _, cur = closed(sphere2)
    ch = sphere2.chart
    m, n = ch.m, ch.n
    Rv = cur.v_column("Rv_jk")
    Rbc = cur.v_column("Rv_bc")
    for d in range(m):
        for a in range(m):
            for l in range(n):
                for i in range(n):
                    for j in range(n):
                        for k in range(n):
                            want = cur.R_ijk.comps[i, l, j, k] if d == a else ZERO
                            assert Rv.comps[d * n + l, a * n + i, j, k] == want
                    for b in range(m):
                        for c in range(m):
                            want = -cur.chi.comps[d, a, b, c] if i == l else ZERO
                            assert Rbc.comps[d * n + l, a * n + i, b, c] == want + (
                                cur.R_ibc.comps[i, l, b, c] if d == a else ZERO)


def _oracle(D, h, phi):
    ch = D.chart
    return BerwaldOracle(h, phi, ch.t_names, ch.x_names, ch.p_names)


t1, x1 = sp.symbols("t1 x1")


@pytest.mark.parametrize("temporal, h", [
    ("polar", [[1, 0], [0, t1**2]]),
    ("sphere", [[1, 0], [0, sp.sin(t1) ** 2]]),
])
def test_berwald_against_sympy(temporal, h):
    D = sphere_connection(2, temporal)
    o = _oracle(D, h, [[1, 0], [0, sp.sin(x1) ** 2]])
    tor, cur = closed(D)
    ch = D.chart
    m, n = ch.m, ch.n
    expected_t = {"R_ab", "R_ij"} if temporal == "sphere" else {"R_ij"}
    assert set(tor.nonzero_families()) == expected_t
    expected_c = {"chi", "R_ijk"} if temporal == "sphere" else {"R_ijk"}
    assert set(cur.nonzero_families()) == expected_c
    for f in range(m):
        for r in range(n):
            for a in range(m):
                for b in range(m):
                    assert o.equal(tor.R_ab.comps[f * n + r, a, b], o.torsion_R_ab(f, r, a, b))
            for i in range(n):
                for j in range(n):
                    assert o.equal(tor.R_ij.comps[f * n + r, i, j], o.torsion_R_ij(f, r, i, j))
    for idx in arrays.indices(cur.R_ijk.shape):
        assert o.equal(cur.R_ijk.comps[idx], o.R[idx])
    for idx in arrays.indices(cur.chi.shape):
        assert o.equal(cur.chi.comps[idx], o.chi_curv[idx])
    Rv = cur.v_column("Rv_bc")
    nonzero_views = {k for k in ("Rv_bc", "Rv_bk", "Pv_bc", "Rv_jk", "Pv_jc", "Sv") if not cur.v_column(k).is_zero()}
    assert nonzero_views == ({"Rv_bc", "Rv_jk"} if temporal == "sphere" else {"Rv_jk"})
    assert Rv.comps[0, 0, 0, 1] == -cur.chi.comps[0, 0, 0, 1]
